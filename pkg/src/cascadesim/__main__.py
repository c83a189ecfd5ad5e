import sys

from cascadesim.cli import main

sys.exit(main())
