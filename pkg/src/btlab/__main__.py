import sys

from btlab.cli import main

sys.exit(main())
