import sys

from fracwave.main import main

sys.exit(main())
