from tiltsvm.cli import main

main()
