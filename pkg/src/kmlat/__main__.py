from kmlat.cli import main

main()
