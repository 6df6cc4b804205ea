import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiltsvm.errors import InvalidConfigError, InvalidInputError
from tiltsvm.imu_sim import (
    EulerAngles,
    FieldConfig,
    GenConfig,
    NoiseProfile,
    SensorSample,
    apply_noise,
    gaussian_stream,
    generate_dataset,
    ideal_reading,
    rotation_matrix,
    sensor_bias,
)

angle = st.floats(-math.pi / 2, math.pi / 2, allow_nan=False)
yaw = st.floats(-math.pi, math.pi, allow_nan=False)


def _rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def _ry(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])


def _rx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])


def test_identity_rotation():
    np.testing.assert_array_equal(rotation_matrix(EulerAngles(0.0, 0.0, 0.0)), np.eye(3))


def test_yaw_quarter_turn_maps_body_x_to_nav_y():
    r = rotation_matrix(EulerAngles(0.0, 0.0, math.pi / 2))
    np.testing.assert_allclose(r @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(angle, angle, yaw)
def test_matches_elementary_rotation_product(r, p, y):
    expected = _rz(y) @ _ry(p) @ _rx(r)
    np.testing.assert_allclose(rotation_matrix(EulerAngles(r, p, y)), expected, atol=1e-15)


def test_orthonormal_for_random_angles():
    rng = np.random.default_rng(7)
    for r, p, y in rng.uniform(-math.pi / 2, math.pi / 2, size=(1000, 3)):
        m = rotation_matrix(EulerAngles(r, p, y))
        np.testing.assert_allclose(m.T @ m, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(m) - 1.0) < 1e-12
        v = rng.normal(size=3)
        assert abs(np.linalg.norm(m @ v) - np.linalg.norm(v)) < 1e-12


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_non_finite_angle_rejected(bad):
    with pytest.raises(InvalidInputError):
        rotation_matrix(EulerAngles(0.0, bad, 0.0))


def test_level_reading():
    s = ideal_reading(EulerAngles(0.0, 0.0, 0.0), FieldConfig(9.81))
    assert s.accel == (0.0, 0.0, 9.81)
    assert s.gyro == (0.0, 0.0, 0.0)


def test_pitch_30_reading():
    s = ideal_reading(EulerAngles.from_degrees(0.0, 30.0), FieldConfig(9.81))
    ax, ay, az = s.accel
    # R^T (0, 0, g) for pitch only is g * (-sin p, 0, cos p)
    assert ax == pytest.approx(-4.905, abs=1e-12)
    assert ay == pytest.approx(0.0, abs=1e-15)
    assert az == pytest.approx(9.81 * math.cos(math.radians(30.0)), abs=1e-12)
    assert az == pytest.approx(8.496, abs=5e-4)


def test_roll_sign_convention():
    s = ideal_reading(EulerAngles.from_degrees(30.0, 0.0), FieldConfig(9.81))
    assert s.accel[1] == pytest.approx(4.905, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(angle, angle, yaw)
def test_noiseless_norms(r, p, y):
    f = FieldConfig()
    s = ideal_reading(EulerAngles(r, p, y), f)
    assert abs(np.linalg.norm(s.accel) - f.gravity_magnitude) < 1e-12
    assert abs(np.linalg.norm(s.mag) - np.linalg.norm(f.mag_field)) < 1e-12


def test_default_mag_field():
    f = FieldConfig()
    assert np.linalg.norm(f.mag_field) == pytest.approx(50.0)
    # inclination of 60 degrees below the horizon
    assert math.degrees(math.atan2(-f.mag_field[2], f.mag_field[0])) == pytest.approx(60.0)


@pytest.mark.parametrize(
    "kwargs", [{"gravity_magnitude": 0.0}, {"gravity_magnitude": -1.0}, {"mag_field": (0.0, 0.0, 0.0)}]
)
def test_field_config_validation(kwargs):
    with pytest.raises(InvalidConfigError):
        FieldConfig(**kwargs)


def test_noise_profile_rejects_negative():
    with pytest.raises(InvalidConfigError):
        NoiseProfile(accel_sigma=-0.1)


def test_zero_noise_is_identity():
    s = ideal_reading(EulerAngles.from_degrees(10.0, -5.0, 3.0))
    assert apply_noise(s, NoiseProfile.zero(seed=3), 17) == s


def test_noise_deterministic():
    s = ideal_reading(EulerAngles.from_degrees(10.0, 0.0))
    n = NoiseProfile(seed=99)
    a, b = apply_noise(s, n, 5), apply_noise(s, n, 5)
    assert a.vector().tobytes() == b.vector().tobytes()
    assert apply_noise(s, n, 6) != a


def test_accel_noise_std_monte_carlo():
    s = ideal_reading(EulerAngles(0.0, 0.0, 0.0))
    n = NoiseProfile(accel_sigma=0.2, accel_bias_bound=0.0, gyro_sigma=0.0, gyro_bias_bound=0.0, mag_sigma=0.0, seed=1)
    draws = np.array([apply_noise(s, n, i).accel for i in range(10_000)])
    std = draws.std(axis=0, ddof=1)
    np.testing.assert_allclose(std, 0.2, rtol=0.05)
    np.testing.assert_allclose(draws.mean(axis=0), s.accel, atol=4 * 0.2 / 100)


def test_box_muller_moments():
    z = gaussian_stream(12345, 0, 200_001)
    assert z.shape == (200_001,)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1.0) < 0.01
    # fraction within one sigma for a standard normal is 0.6827
    assert abs(np.mean(np.abs(z) < 1.0) - 0.6827) < 0.005


def test_bias_constant_and_bounded():
    n = NoiseProfile(seed=5)
    b = sensor_bias(n)
    np.testing.assert_array_equal(b, sensor_bias(NoiseProfile(seed=5)))
    assert np.all(np.abs(b) <= n.bias_bounds())
    assert np.all(b[6:] == 0.0)
    s = ideal_reading(EulerAngles(0.0, 0.0, 0.0))
    only_bias = NoiseProfile(0.0, n.accel_bias_bound, 0.0, n.gyro_bias_bound, 0.0, seed=5)
    np.testing.assert_allclose(apply_noise(s, only_bias, 0).vector() - s.vector(), b, atol=1e-15)
    np.testing.assert_allclose(apply_noise(s, only_bias, 9).vector() - s.vector(), b, atol=1e-15)


def test_sample_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        SensorSample((0.0, float("nan"), 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


def test_default_class_count_and_rows():
    d = generate_dataset(GenConfig(samples_per_class=100))
    assert d.n == 1300
    assert d.column_names == ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")
    np.testing.assert_array_equal(np.bincount(d.labels), [100] * 13)


def test_paper_scale_corpus_size():
    cfg = GenConfig(samples_per_class=742)
    assert len(cfg.class_poses()) == 13
    d = generate_dataset(cfg)
    assert d.n == 9646
    # 6749 + 2893 = 9642 in the original corpus
    assert abs(d.n - (6749 + 2893)) == 4


def test_class_poses_layout():
    poses = GenConfig().class_poses()
    assert poses[0] == EulerAngles(0.0, 0.0, 0.0)
    assert [round(math.degrees(p.roll)) for p in poses[1:7]] == [5, 10, 15, 20, 25, 30]
    assert all(p.pitch == 0.0 for p in poses[1:7])
    assert [round(math.degrees(p.pitch)) for p in poses[7:]] == [5, 10, 15, 20, 25, 30]


def test_levels_without_zero_are_not_shared():
    cfg = GenConfig(angle_levels=(10.0, 20.0), axes=("x", "y", "z"), samples_per_class=2)
    assert len(cfg.class_poses()) == 6


def test_zero_noise_rows_identical_within_class():
    d = generate_dataset(GenConfig(samples_per_class=5, noise=NoiseProfile.zero()))
    for c in d.classes:
        rows = d.features[d.labels == c]
        assert np.all(rows == rows[0])


def test_generation_is_pure():
    cfg = GenConfig(samples_per_class=20, noise=NoiseProfile(seed=11))
    assert generate_dataset(cfg).to_csv() == generate_dataset(cfg).to_csv()
    other = GenConfig(samples_per_class=20, noise=NoiseProfile(seed=12))
    assert generate_dataset(other).to_csv() != generate_dataset(cfg).to_csv()


def test_rows_match_apply_noise_streams():
    cfg = GenConfig(samples_per_class=3, noise=NoiseProfile(seed=4))
    d = generate_dataset(cfg)
    poses = cfg.class_poses()
    for r in (0, 4, 38):
        s = ideal_reading(poses[r // 3], cfg.fields)
        np.testing.assert_array_equal(d.features[r], apply_noise(s, cfg.noise, r).vector())


@pytest.mark.parametrize(
    "kwargs",
    [
        {"angle_levels": ()},
        {"axes": ()},
    ],
)
def test_zero_classes_rejected(kwargs):
    with pytest.raises(InvalidConfigError):
        generate_dataset(GenConfig(samples_per_class=1, **kwargs))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"angle_levels": (0.0, 31.0)},
        {"angle_levels": (-5.0,)},
        {"angle_levels": (5.0, 5.0)},
        {"axes": ("x", "w")},
        {"samples_per_class": 0},
    ],
)
def test_gen_config_validation(kwargs):
    with pytest.raises(InvalidConfigError):
        GenConfig(**kwargs)


def test_csv_format():
    d = generate_dataset(GenConfig(samples_per_class=1, noise=NoiseProfile(seed=1)))
    text = d.to_csv()
    lines = text.split("\n")
    assert lines[0] == "ax,ay,az,gx,gy,gz,mx,my,mz,label"
    assert text.endswith("\n") and "\r" not in text
    first = lines[1].split(",")
    assert first[-1] == "0"
    assert float(first[0]) == d.features[0, 0]
    assert float(format(d.features[0, 0], ".17g")) == float(d.features[0, 0])
    assert len(first[0].lstrip("-").replace(".", "").lstrip("0").split("e")[0]) <= 17
