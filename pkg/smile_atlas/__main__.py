import sys

from smile_atlas.main import main

sys.exit(main())
