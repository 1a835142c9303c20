import sys

from cyclerank.cli import main

sys.exit(main())
