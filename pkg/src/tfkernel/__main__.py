import sys

from tfkernel.cli import main

sys.exit(main())
