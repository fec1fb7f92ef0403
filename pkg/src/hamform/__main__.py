import sys

from hamform.cli import main

sys.exit(main())
