import sys

from procfn.cli import main

sys.exit(main())
