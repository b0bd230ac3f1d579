"""Smallest architectures whose functional variety fills its ambient space.

Inputs are binary (d0 = 2), the output is a single polynomial and r = 2, so a
depth-h network outputs a binary form of degree 2**(h-1).  The search walks
the lattice of hidden widths, proves filling with a full-rank Jacobian, and
rules out smaller neighbours with closed-form bounds or rank-deficient trials.
"""

import time

from polynet import SearchSpec, check_unimodality, find_minimal_filling

for depth in range(2, 8):
    start = time.perf_counter()
    result = find_minimal_filling(SearchSpec(depth, d0=2, dh=1, degree=2))
    elapsed = time.perf_counter() - start
    print(f"depth {depth}: {len(result.architectures)} minimal vector(s), "
          f"{result.oracle_calls} oracle calls, {elapsed:.1f}s")
    for widths in result.architectures:
        print("   ", widths)
    for widths, valley in check_unimodality(result.architectures):
        print(f"    not unimodal: {widths} rises again after index {valley}")
