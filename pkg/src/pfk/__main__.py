import sys

from pfk.cli import main

sys.exit(main())
