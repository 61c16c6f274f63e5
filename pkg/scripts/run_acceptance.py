"""Run every acceptance criterion outside pytest and print one line each.

Exit status is 0 when all criteria pass.
"""

import sys

from ncdeform.acceptance import run_all

if __name__ == "__main__":
    sys.exit(0 if run_all() else 1)
