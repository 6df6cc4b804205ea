"""Static tilt-platform forward model for a 9-axis MEMS IMU.

Conventions
-----------
* Euler angles are roll (about body X), pitch (about body Y) and yaw (about
  body Z), composed as the intrinsic Z-Y-X sequence ``R = Rz(yaw) Ry(pitch)
  Rx(roll)``.  ``R`` maps body-frame vectors into the navigation frame.
* The navigation frame has X pointing to magnetic north and Z pointing up.
* The accelerometer reports specific force, so a level platform at rest reads
  ``(0, 0, +g)``.

Randomness comes from numpy's Philox-4x64 counter-based generator, keyed by
the 64-bit seed.  Each draw sequence is addressed by the counter word pair
``(stream_index, domain)``; uniforms use the top 53 bits of each raw 64-bit
output and Gaussian variates use the Box-Muller transform, so results do not
depend on numpy's internal sampling algorithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from tiltsvm.dataset import SENSOR_COLUMNS, Dataset
from tiltsvm.errors import InvalidConfigError, InvalidInputError

STANDARD_GRAVITY = 9.80665
_MASK64 = (1 << 64) - 1

# counter word 3 separates the per-dataset bias draws from per-sample noise
_DOMAIN_BIAS = 0
_DOMAIN_NOISE = 1


@dataclass(frozen=True)
class EulerAngles:
    roll: float
    pitch: float
    yaw: float = 0.0

    @classmethod
    def from_degrees(cls, roll: float, pitch: float, yaw: float = 0.0) -> "EulerAngles":
        return cls(math.radians(roll), math.radians(pitch), math.radians(yaw))


def _default_mag_field() -> tuple[float, float, float]:
    # 50 uT, 60 deg inclination (pointing down), 0 deg declination
    b, inc = 50.0, math.radians(60.0)
    return (b * math.cos(inc), 0.0, -b * math.sin(inc))


@dataclass(frozen=True)
class FieldConfig:
    gravity_magnitude: float = 9.81
    mag_field: tuple[float, float, float] = field(default_factory=_default_mag_field)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gravity_magnitude) and self.gravity_magnitude > 0):
            raise InvalidConfigError("gravity_magnitude must be positive")
        m = tuple(float(v) for v in self.mag_field)
        if len(m) != 3 or not all(math.isfinite(v) for v in m):
            raise InvalidConfigError("mag_field must be a finite 3-vector")
        if math.hypot(*m) <= 0:
            raise InvalidConfigError("mag_field must be non-zero")
        object.__setattr__(self, "mag_field", m)


@dataclass(frozen=True)
class NoiseProfile:
    """Additive sensor error model.

    Each axis gets a constant bias, drawn once per ``seed`` uniformly from
    ``[-bias_bound, +bias_bound]``, plus independent zero-mean white Gaussian
    noise.  Units: m/s^2 (accel), rad/s (gyro), uT (mag).
    """

    accel_sigma: float = 0.02 * STANDARD_GRAVITY
    accel_bias_bound: float = 0.01 * STANDARD_GRAVITY
    gyro_sigma: float = math.radians(0.5)
    gyro_bias_bound: float = math.radians(1.0)
    mag_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("accel_sigma", "accel_bias_bound", "gyro_sigma", "gyro_bias_bound", "mag_sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidConfigError(f"{name} must be a finite value >= 0, got {v!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise InvalidConfigError("seed must be an integer")

    @classmethod
    def zero(cls, seed: int = 0) -> "NoiseProfile":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, seed)

    def sigmas(self) -> np.ndarray:
        a, g, m = self.accel_sigma, self.gyro_sigma, self.mag_sigma
        return np.array([a, a, a, g, g, g, m, m, m])

    def bias_bounds(self) -> np.ndarray:
        a, g = self.accel_bias_bound, self.gyro_bias_bound
        return np.array([a, a, a, g, g, g, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class SensorSample:
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]
    mag: tuple[float, float, float]
    label: int | None = None

    def __post_init__(self) -> None:
        for name in ("accel", "gyro", "mag"):
            v = tuple(float(c) for c in getattr(self, name))
            if len(v) != 3 or not all(math.isfinite(c) for c in v):
                raise InvalidInputError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)

    def vector(self) -> np.ndarray:
        """Return the 9 components in column order ax..mz."""
        return np.array(self.accel + self.gyro + self.mag)

    @classmethod
    def from_vector(cls, v: np.ndarray, label: int | None = None) -> "SensorSample":
        v = [float(c) for c in v]
        return cls(tuple(v[0:3]), tuple(v[3:6]), tuple(v[6:9]), label)


AXES = ("x", "y", "z")


@dataclass(frozen=True)
class GenConfig:
    """Labeled dataset recipe.

    Classes are ``(tilt axis, tilt level)`` pairs.  A 0 deg level is the same
    physical pose for every axis and is emitted once, as class 0.  The
    remaining classes follow in ``axes`` order, levels ascending.  With the
    defaults that gives 13 classes: 0 = level, 1-6 = roll 5..30 deg,
    7-12 = pitch 5..30 deg.
    """

    angle_levels: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    axes: tuple[str, ...] = ("x", "y")
    samples_per_class: int = 100
    noise: NoiseProfile = field(default_factory=NoiseProfile)
    fields: FieldConfig = field(default_factory=FieldConfig)

    def __post_init__(self) -> None:
        levels = tuple(float(v) for v in self.angle_levels)
        if any(not (0.0 <= v <= 30.0) for v in levels):
            raise InvalidConfigError("angle_levels must lie within [0, 30] degrees")
        if len(set(levels)) != len(levels):
            raise InvalidConfigError("angle_levels must be distinct")
        axes = tuple(str(a).lower() for a in self.axes)
        if any(a not in AXES for a in axes) or len(set(axes)) != len(axes):
            raise InvalidConfigError(f"axes must be distinct members of {AXES}")
        if int(self.samples_per_class) < 1:
            raise InvalidConfigError("samples_per_class must be >= 1")
        object.__setattr__(self, "angle_levels", tuple(sorted(levels)))
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "samples_per_class", int(self.samples_per_class))

    def class_poses(self) -> list[EulerAngles]:
        """Pose for each class id, indexed by class id."""
        poses: list[EulerAngles] = []
        if 0.0 in self.angle_levels and self.axes:
            poses.append(EulerAngles(0.0, 0.0, 0.0))
        for axis in self.axes:
            for level in self.angle_levels:
                if level == 0.0:
                    continue
                rad = [0.0, 0.0, 0.0]
                rad[AXES.index(axis)] = math.radians(level)
                poses.append(EulerAngles(*rad))
        return poses


def _check_angles(e: EulerAngles) -> None:
    if not all(math.isfinite(a) for a in (e.roll, e.pitch, e.yaw)):
        raise InvalidInputError(f"non-finite Euler angle in {e}")


def rotation_matrix(e: EulerAngles) -> np.ndarray:
    """Body-to-navigation rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    _check_angles(e)
    cr, sr = math.cos(e.roll), math.sin(e.roll)
    cp, sp = math.cos(e.pitch), math.sin(e.pitch)
    cy, sy = math.cos(e.yaw), math.sin(e.yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def ideal_reading(e: EulerAngles, f: FieldConfig | None = None) -> SensorSample:
    """Noise-free readings of a static platform at attitude ``e``."""
    f = f or FieldConfig()
    r = rotation_matrix(e)
    accel = r.T @ np.array([0.0, 0.0, f.gravity_magnitude])
    mag = r.T @ np.asarray(f.mag_field)
    return SensorSample(tuple(accel), (0.0, 0.0, 0.0), tuple(mag))


def _philox(seed: int, stream_index: int, domain: int) -> np.random.Philox:
    return np.random.Philox(
        key=int(seed) & _MASK64,
        counter=[0, 0, int(stream_index) & _MASK64, domain],
    )


def uniform_stream(seed: int, stream_index: int, count: int, domain: int = _DOMAIN_NOISE) -> np.ndarray:
    """``count`` doubles in the open interval (0, 1) from one Philox stream."""
    raw = _philox(seed, stream_index, domain).random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def gaussian_stream(seed: int, stream_index: int, count: int) -> np.ndarray:
    """``count`` standard normal variates via Box-Muller on one stream."""
    pairs = (count + 1) // 2
    u = uniform_stream(seed, stream_index, 2 * pairs)
    radius = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(theta)
    z[1::2] = radius * np.sin(theta)
    return z[:count]


@lru_cache(maxsize=64)
def _unit_bias(seed: int) -> np.ndarray:
    u = uniform_stream(seed, 0, 9, domain=_DOMAIN_BIAS)
    out = 2.0 * u - 1.0
    out.setflags(write=False)
    return out


def sensor_bias(n: NoiseProfile) -> np.ndarray:
    """The per-run constant bias vector (9 components) for profile ``n``."""
    return _unit_bias(int(n.seed) & _MASK64) * n.bias_bounds()


def apply_noise(s: SensorSample, n: NoiseProfile, stream_index: int) -> SensorSample:
    """Add the run bias and white noise from stream ``stream_index``."""
    v = s.vector()
    noisy = v + sensor_bias(n) + n.sigmas() * gaussian_stream(n.seed, stream_index, 9)
    return SensorSample.from_vector(noisy, s.label)


def generate_dataset(cfg: GenConfig) -> Dataset:
    """Emit ``samples_per_class`` noisy readings for every class.

    Row ``r`` (0-based, rows grouped by class id) draws its noise from
    stream index ``r``, so class ``k`` owns streams
    ``k * samples_per_class ... (k + 1) * samples_per_class - 1``.
    """
    poses = cfg.class_poses()
    if not poses:
        raise InvalidConfigError("configuration yields zero classes")
    spc = cfg.samples_per_class
    n_rows = spc * len(poses)
    sigmas = cfg.noise.sigmas()
    bias = sensor_bias(cfg.noise)
    feats = np.empty((n_rows, 9))
    labels = np.repeat(np.arange(len(poses)), spc)
    for k, pose in enumerate(poses):
        base = ideal_reading(pose, cfg.fields).vector() + bias
        for j in range(spc):
            r = k * spc + j
            feats[r] = base + sigmas * gaussian_stream(cfg.noise.seed, r, 9)
    return Dataset(feats, labels, SENSOR_COLUMNS)
