"""
Wronski Count
Main entry point for the application

Usage:
    python main.py count --d 3 --m 1,1,1,1 --methods all
    python main.py solve --d 4 --m 2,2,1 --seed 7
    python main.py verify-sweep
    python main.py tables catalan --order 8
"""
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.cli import main as cli_main


def main():
    """Main entry point"""
    try:
        return cli_main()
    except KeyboardInterrupt:
        print("\n\nInterrupted by user.", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
