"""Dimensions of a few deep architectures as the activation degree grows.

For large r the dimension settles at the naive bound: the parameter count
minus one scaling direction per hidden neuron.  Before that, small degrees
can make the variety strictly smaller.
"""

from polynet import Architecture, dimension_table, naive_bound

rows = [(3, 2, 1), (2, 3, 2), (2, 3, 2, 3), (2, 3, 2, 3, 4)]
degrees = range(2, 7)
table = dimension_table(rows, degrees, trials=3, seed=0)

print(f"{'widths':<16}" + "".join(f"r={r:<4}" for r in degrees) + "naive(r=6)")
for widths, dims in zip(table.rows, table.values()):
    print(f"{str(widths):<16}" + "".join(f"{d:<6}" for d in dims) + str(naive_bound(Architecture(widths, 6))))

print()
print(table.to_csv())
