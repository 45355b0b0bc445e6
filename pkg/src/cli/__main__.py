"""Run with ``python -m src.cli <command> ...``."""

import sys

from src.cli.main import main

sys.exit(main())
