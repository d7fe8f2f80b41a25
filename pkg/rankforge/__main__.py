import sys

from rankforge.cli.main import main

sys.exit(main())
