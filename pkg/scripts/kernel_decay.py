"""Decay of the bump transform h_t(xi) in xi and in t."""

import argparse
import csv
import sys

import numpy as np

from lvlab.dirichlet_poly import h_hat


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", default="0,10,100,500,1000")
    ap.add_argument("--kmax", type=int, default=10)
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\r\n")
    out.writerow(["t", "xi", "log10_abs"])
    for t in (float(x) for x in args.t.split(",")):
        for xi in [0.0] + [2.0**k * (1 + t) for k in range(args.kmax + 1)]:
            out.writerow([t, xi, f"{h_hat(t, xi).log_abs / np.log(10):.4f}"])


if __name__ == "__main__":
    main()
