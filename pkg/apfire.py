"""Almost periodic inputs and the leaky integrate-and-fire firing map.

Evaluates symbolic input signals, computes firing times, displacements and firing
rates, estimates Stepanov and mu-almost periodicity metrics and mean values, and
projects inputs onto the Haar system.

Run a command using::

    uv run apfire.py fire --preset ex4_3 --t 0,1
    uv run apfire.py verify --only firing
"""

import sys

from dotenv import load_dotenv

load_dotenv(override=True)

from adapters.cli.commands import run

if __name__ == "__main__":
    sys.exit(run())
