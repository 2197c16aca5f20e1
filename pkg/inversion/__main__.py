"""
Allows ``python -m inversion``.
"""
from inversion.cli import main

if __name__ == '__main__':
    main()
