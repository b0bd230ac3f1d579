"""Shallow single-output networks are sums of powers of linear forms.

A network (d0, d1, 1) with activation x**r outputs
    sum_j a_j (w_j . x)**r,
so its functional variety is the set of forms of Waring rank at most d1.
Alexander and Hirschowitz determined its dimension; this script compares the
Jacobian-rank oracle with their formula, including the defective cases.
"""

import numpy as np

from polynet import QQ, Architecture, alexander_hirschowitz, dimension, forward, random_weights
from polynet.network import forward_cp_shallow

rng = np.random.default_rng(0)

# The layered forward pass and the direct sum of powers agree exactly.
arch = Architecture((3, 4, 1), 3)
w = random_weights(arch, QQ, rng, bound=5)
print("forward == sum of cubes:", forward(arch, w) == forward_cp_shallow(w.matrices[1], w.matrices[0], 3, QQ))

print()
print(f"{'d0':>3} {'d1':>3} {'r':>2} {'oracle':>7} {'expected':>9}  note")
for d0, d1, r in [(3, 2, 2), (4, 3, 2), (3, 2, 3), (3, 5, 4), (4, 9, 4), (5, 7, 3), (5, 14, 4), (5, 15, 4)]:
    dim = dimension(Architecture((d0, d1, 1), r)).dim
    ah = alexander_hirschowitz(d0, d1, r)
    note = f"defective (value {ah.corrected})" if ah.exceptional else ""
    print(f"{d0:>3} {d1:>3} {r:>2} {dim:>7} {ah.expected:>9}  {note}")

# Quadrics: d1 squares span a space of dimension d1*d0 - C(d1, 2), not d1*d0,
# because any orthogonal change of the d1 linear forms leaves the sum fixed.
