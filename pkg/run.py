# ============================================================================
# run.py
# ============================================================================
"""
Main entry point: python run.py <pipeline> [flags]
"""
import sys

from cli import main

if __name__ == '__main__':
    sys.exit(main())
