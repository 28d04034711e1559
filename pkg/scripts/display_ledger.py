"""Print every family display evaluated as printed and as corrected.

    python scripts/display_ledger.py
"""
from wepi_lab.displays import DOCUMENTED, all_checks


def main():
    print(f"{'display':20s} {'printed':>16s} {'corrected':>16s} {'quadrature':>16s}  verdict")
    for c in all_checks():
        corr = "" if c.corrected is None else f"{c.corrected:16.10g}"
        print(f"{c.name:20s} {c.printed:16.10g} {corr:>16s} {c.reference:16.10g}  {c.verdict}")
        if c.name in DOCUMENTED:
            print(f"{'':20s} note: {DOCUMENTED[c.name]}")


if __name__ == "__main__":
    main()
