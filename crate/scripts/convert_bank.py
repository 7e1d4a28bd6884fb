#!/usr/bin/env python3
"""Convert the Bank.xls workbook (sheet Data2) to the CSV read by chronofit.

Output columns: date,DEOM,AAA,Tto4,D3to4 with monthly YYYY-MM dates counted
from --start. Reading .xls needs pandas and xlrd (pip install xlrd).

    python3 scripts/convert_bank.py Bank.xls data/bank.csv --start 1988-01
"""

import argparse
import sys

import pandas as pd

COLUMNS = ["DEOM", "AAA", "Tto4", "D3to4"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("workbook")
    parser.add_argument("output")
    parser.add_argument("--sheet", default="Data2")
    parser.add_argument("--start", required=True, help="first month, YYYY-MM")
    args = parser.parse_args()

    frame = pd.read_excel(args.workbook, sheet_name=args.sheet)
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        print(f"sheet {args.sheet} lacks columns {missing}; found {list(frame.columns)}", file=sys.stderr)
        return 2
    frame = frame[COLUMNS].dropna(how="all")
    if frame.isna().any().any():
        print("sheet has missing values inside the data block", file=sys.stderr)
        return 2

    dates = pd.period_range(start=args.start, periods=len(frame), freq="M")
    frame.insert(0, "date", dates.strftime("%Y-%m"))
    frame.to_csv(args.output, index=False)
    print(f"wrote {len(frame)} rows to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
