"""
Entry point for ``python -m narrated_vmr``.
"""

import sys

from narrated_vmr.cli import main

if __name__ == "__main__":
    sys.exit(main())
