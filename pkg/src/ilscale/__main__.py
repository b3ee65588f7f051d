import sys

from ilscale.cli import main

sys.exit(main())
