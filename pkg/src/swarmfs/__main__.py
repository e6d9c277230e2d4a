import sys

from swarmfs.cli import main

sys.exit(main())
