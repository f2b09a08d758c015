#!/usr/bin/env python3
"""Monte-Carlo check that the ML estimator reaches the Cramér-Rao floor.

Single-qubit model P(up|theta) = cos^2(theta/2) (F = 1 at every phase):
runs batches of trials at increasing m and compares the sample variance of
the estimates against 1/(m F).  At small m the variance may sit above the
floor; asymptotically the ratio settles at 1.

Usage: python scripts/mle_efficiency.py [--trials 1000] [--seed 7] [--out FILE]
"""

import argparse
import math

from spinmetro import (ProbabilityModel, SpinSpace, mle_monte_carlo,
                       povm_number_counting, spin_polarized)
from spinmetro.reporting import write_csv

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--theta", type=float, default=0.8)
parser.add_argument("--trials", type=int, default=1000)
parser.add_argument("--seed", type=int, default=7)
parser.add_argument("--out", type=str, default=None)
args = parser.parse_args()

space = SpinSpace(1)
model = ProbabilityModel(spin_polarized(space), "y", povm_number_counting(space))

rows = []
print(f"theta_true = {args.theta}, trials = {args.trials}, seed = {args.seed}")
print(f"{'m':>6} {'variance':>12} {'1/(mF)':>12} {'ratio':>8} {'bias':>10}")
for m in (10, 25, 50, 100, 200, 400, 800, 1600):
    report = mle_monte_carlo(model, args.theta, m=m, trials=args.trials,
                             seed=args.seed, domain=(0.0, math.pi))
    ratio = report.variance / report.crlb
    rows.append((m, report.variance, report.crlb, ratio, report.bias))
    print(f"{m:6d} {report.variance:12.4e} {report.crlb:12.4e} "
          f"{ratio:8.4f} {report.bias:+10.2e}")

if args.out:
    write_csv(args.out, ("m", "variance", "crlb", "ratio", "bias"), rows)
    print(f"wrote {args.out}")
