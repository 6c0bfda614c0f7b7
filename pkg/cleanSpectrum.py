#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Command-line wrapper for the cleanSpectrum package.

Usage examples:
  python3 cleanSpectrum.py gen --n 40 --t-min 40 --t-max 160 --count 50000 --seed 1 --out train.jsonl
  python3 cleanSpectrum.py train --data train.jsonl --epochs 50 --out-model model.txt
  python3 cleanSpectrum.py eval --model model.txt --data heldout.jsonl --t-grid 40:160:8 --out-csv report.csv
  python3 cleanSpectrum.py rie --spectrum-file sample.txt --n 40 --t 80

CLEANSPEC_* settings can be kept in a .env file next to this script.
"""

import sys
from dotenv import load_dotenv

from cleanSpectrum.__main__ import main

if __name__ == "__main__":
    # Load environment variables from .env file
    load_dotenv()

    sys.exit(main())
