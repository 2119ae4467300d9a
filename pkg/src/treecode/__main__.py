import sys

from treecode.cli import main

sys.exit(main())
