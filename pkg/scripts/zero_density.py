"""Zero counts N(sigma, T, q) across moduli, against the density predictions."""

import argparse
import csv
import sys

from lvlab.lfunc import density_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--moduli", default="3,4,5,7,8,11,13")
    ap.add_argument("--T", type=float, default=100.0)
    ap.add_argument("--sigma", default="0.5,0.55,0.6,0.7,0.8")
    args = ap.parse_args()
    sigmas = [float(s) for s in args.sigma.split(",")]
    out = csv.writer(sys.stdout, lineterminator="\r\n")
    out.writerow(["q", "T", "sigma", "total", "prediction_theorem", "prediction_corollary"])
    for q in (int(x) for x in args.moduli.split(",")):
        d = density_scan(q, args.T, sigmas).as_dict()
        for row in zip(d["sigma"], d["totals"], d["prediction_theorem"], d["prediction_corollary"]):
            out.writerow([q, args.T, *row])


if __name__ == "__main__":
    main()
