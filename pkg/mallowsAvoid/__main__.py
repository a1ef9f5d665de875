"""
Punto de entrada principal para mallowsAvoid.

Permite ejecutar `python -m mallowsAvoid <subcomando>`.
"""

import sys

from .cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
