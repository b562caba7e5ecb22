import sys

from rewritetrainer.cli import main

sys.exit(main())
