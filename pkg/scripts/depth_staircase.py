#!/usr/bin/env python3
"""Entanglement-depth staircase data and where the named probes sit on it.

Writes the k-producibility Fisher ceilings (s k^2 + r^2 for qubits) for
N particles, then classifies the coherent, twin-Fock, and NOON probes by
their QFI.

Usage: python scripts/depth_staircase.py [--n 100] [--out staircase.csv]
"""

import argparse

from spinmetro import (SpinSpace, entanglement_depth, noon, qfi_pure,
                       spin_polarized, twin_fock, write_staircase_csv)

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--n", type=int, default=100, help="even particle number")
parser.add_argument("--out", type=str, default="staircase.csv")
args = parser.parse_args()

space = SpinSpace(args.n)
probes = {
    "coherent": qfi_pure(spin_polarized(space), "y"),
    "twin_fock": qfi_pure(twin_fock(space), "y"),
    "noon": qfi_pure(noon(space), "z"),
}

report = entanglement_depth(probes["noon"], args.n)
write_staircase_csv(report, args.out)
print(f"wrote {args.out} ({args.n} staircase rows)")

for name, value in probes.items():
    depth = entanglement_depth(value, args.n).depth
    print(f"{name:>10}: F_Q = {value:10.2f} -> depth {depth}")
