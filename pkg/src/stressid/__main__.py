import sys

from stressid.cli import main

sys.exit(main())
