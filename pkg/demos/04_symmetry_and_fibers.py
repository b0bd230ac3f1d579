"""Why the dimension is at most the parameter count minus the hidden widths.

Scaling hidden neuron k by c and the next layer's column k by c**(-r) leaves
the network function unchanged; so does permuting hidden neurons.  Each hidden
neuron therefore contributes one direction along which the Jacobian vanishes.
"""

import numpy as np

from polynet import QQ, Architecture, dimension, forward, naive_bound, random_weights
from polynet.network import apply_action, random_action

rng = np.random.default_rng(1)
arch = Architecture((2, 3, 3, 1), 3)
w = random_weights(arch, QQ, rng, bound=20)
moved = apply_action(arch, w, random_action(arch, QQ, rng))

print("first layer before:", w.matrices[0].tolist())
print("first layer after: ", moved.matrices[0].tolist())
print("same function:", forward(arch, moved) == forward(arch, w))

print()
for widths, r in [((2, 3, 2), 6), ((2, 3, 3, 1), 3), ((2, 2, 2, 2, 1), 2)]:
    a = Architecture(widths, r)
    est = dimension(a)
    print(f"{widths} r={r}: params {a.n_params}, hidden {sum(a.internal_widths)}, "
          f"naive {naive_bound(a)}, ambient {a.ambient_dim}, dim {est.dim}")

# The last line shows the naive bound is not always attained.  Splitting after
# the first layer gives dim(2,2) + dim(2,2,2,1) - 2 = 4 + 5 - 2 = 7: the first
# layer only changes coordinates on the input, and what follows is already a
# filling network, so the two pieces share the 2 hidden scaling directions.
