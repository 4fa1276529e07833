"""Allow ``python3 -m curvedepth`` as an alias for the console script."""

import sys

from curvedepth.cli import main

if __name__ == "__main__":
    sys.exit(main())
