import sys

from tfse.cli import main

sys.exit(main())
