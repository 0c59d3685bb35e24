import sys

from frachj.cli import main

sys.exit(main())
