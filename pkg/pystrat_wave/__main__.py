# MODULES
import sys

# CLI
from pystrat_wave._cli import main

sys.exit(main())
