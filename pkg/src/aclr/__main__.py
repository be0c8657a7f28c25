import sys

from aclr.cli import main

sys.exit(main())
