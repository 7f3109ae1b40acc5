"""Allow `python -m spirallp` as an alias for the spirallp script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
