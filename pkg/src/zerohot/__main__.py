from zerohot.cli import main

main()
