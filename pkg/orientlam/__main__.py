"""``python -m orientlam``."""

import sys

from orientlam.cli import main

sys.exit(main())
