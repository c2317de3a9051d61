"""Blindness figures of merit as the source visibility varies.

    python scripts/blindness_scan.py --csv out/matrices.csv
"""
import argparse

import numpy as np

from qline_vbqc import NoiseParams, noisy_source_state
from qline_vbqc.blindness import blindness_report, write_matrices_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--lam", type=float, default=0.493)
    ap.add_argument("--conditioned", type=int, choices=[0, 1], default=None)
    ap.add_argument("--csv", help="also dump the 64 padded states of the default source here")
    args = ap.parse_args()

    print(f"{'v':>6s} {'F_1q':>10s} {'F_2q':>10s} {'chi':>10s}")
    for v in np.linspace(0.5, 1.0, 6):
        src = noisy_source_state(NoiseParams(v=float(v), lam=args.lam))
        rep = blindness_report(src, conditioned=args.conditioned)
        print(f"{v:6.3f} {rep.F_1q:10.6f} {rep.F_2q:10.6f} {rep.chi:10.2e}")
    # an unentangled source for contrast: the pads on qubit 1 cannot hide qubit 2
    rep = blindness_report(np.diag([1, 0, 0, 0]).astype(complex), conditioned=args.conditioned)
    print(f"{'|00>':>6s} {rep.F_1q:10.6f} {rep.F_2q:10.6f} {rep.chi:10.2e}")
    if args.csv:
        write_matrices_csv(noisy_source_state(NoiseParams.lab_default()), args.csv)
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
