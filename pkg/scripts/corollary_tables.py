"""Least primes in progressions mod 3^n and least Goldbach numbers mod small primes."""

import argparse
import csv
import sys

from lvlab._arith import primes_upto
from lvlab.arithmetic_apps import exponent_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-power", type=int, default=8)
    ap.add_argument("--max-prime", type=int, default=101)
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\r\n")
    out.writerow(["kind", "modulus", "max", "exponent", "target", "below_asymptotic_regime"])
    tables = {
        "ap": [3**n for n in range(1, args.max_power + 1)],
        "goldbach": [int(p) for p in primes_upto(args.max_prime) if p > 2],
    }
    for kind, moduli in tables.items():
        for r in exponent_table(kind, moduli):
            out.writerow([kind, r["modulus"], r["max"], f"{r['exponent']:.6f}", f"{r['target']:.6f}", r["below_asymptotic_regime"]])


if __name__ == "__main__":
    main()
