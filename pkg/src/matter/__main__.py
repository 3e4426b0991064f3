import sys

from matter.cli import main

sys.exit(main())
