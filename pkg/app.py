#!/usr/bin/env python3
"""
affectlog - command-line launcher

Learns sentiment-bearing lexico-syntactic patterns from first-person
narratives and runs the resulting classifiers:
1. Pattern extraction and class-conditional statistics
2. Story-level bootstrapping from a small labeled seed
3. Threshold tuning, classifier cascades and evaluation
4. Possession-affect induction for learned patterns

Run `python app.py --help` for the subcommands.
"""

import sys

from affectlog.cli import run_command


def main():
    """Main entry point"""
    sys.exit(run_command(sys.argv[1:]))


if __name__ == '__main__':
    main()
