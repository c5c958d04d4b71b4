"""Print spectral bounds for the built-in constraints and the exact nib-sym rates.

    python3 scripts/reproduce_table.py [--json out.json]
"""
import argparse
import json

from gridcode.cli import format_paper_table, paper_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", help="also write the table as JSON")
    args = ap.parse_args()
    t = paper_table()
    print(format_paper_table(t), end="")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(t, f, indent=2, sort_keys=True)
            f.write("\n")


if __name__ == "__main__":
    main()
