import sys

from spdcwindow.cli import main

sys.exit(main())
