#!/usr/bin/env python3
"""Residual of the truncated loop expansion against the exact partition
function as hbar -> 0, for the single-vertex quartic theory.  The fitted
log-log slope should sit at truncation order + 1."""

import argparse

import numpy as np

from graphqft import feynman as fy
from graphqft import nonpert as npq
from graphqft.graphs import Graph


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m2", type=float, default=1.0)
    ap.add_argument("--p4", type=float, default=1.0)
    ap.add_argument("--orders", default="0,1,2")
    args = ap.parse_args()

    g = Graph(["v"], [])
    pot = fy.Potential({4: args.p4})
    hbars = tuple(np.geomspace(1e-3, 1e-1, 7))
    for order in (int(x) for x in args.orders.split(",")):
        slope, residuals = npq.asymptotic_slope(g, args.m2, pot, order, hbars)
        print(f"order {order}: fitted slope {slope:.3f} (expected {order + 1})")
        for h in sorted(residuals):
            print(f"  hbar={h:.4g}  |Z - Z_pert| = {abs(residuals[h]):.6e}")


if __name__ == "__main__":
    main()
