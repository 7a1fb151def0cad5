import sys

from anharmonic.cli import main

sys.exit(main())
