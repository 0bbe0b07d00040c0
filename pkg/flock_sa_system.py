import sys

from flock_sa.cli import main

if __name__ == '__main__':
    sys.exit(main())
