import sys

from finmetrics.cli import main

sys.exit(main())
