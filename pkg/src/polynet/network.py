"""The polynomial network map ``theta -> p_theta`` and its tensor forms.

A network with widths ``(d_0, ..., d_h)`` and activation degree ``r``
computes ``W_h rho W_{h-1} rho ... rho W_1 x`` where ``rho`` raises every
coordinate to the ``r``-th power.  Its output is a vector of ``d_h``
homogeneous polynomials of degree ``r**(h-1)`` in ``d_0`` variables.

Besides the layer-by-layer :func:`forward`, this module provides two
independent routes to the same coefficients (the shallow CP sum and the
iterated Khatri-Rao row power) and the scale/permutation symmetry of the
weights, which leave the output unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .algebra import PrimeField, QQ
from .errors import BadPrime, NonInvertibleDiagonal, ShapeMismatch
from .poly import MonomialBasis, PolyVector, power_coeffs


@dataclass(frozen=True)
class Architecture:
    """Width vector ``(d_0, ..., d_h)`` plus activation degree ``r``."""

    widths: tuple
    degree: int

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "degree", int(self.degree))
        if len(widths) < 2:
            raise ValueError("an architecture needs at least d_0 and d_1")
        if min(widths) < 1:
            raise ValueError("all widths must be >= 1")
        if self.degree < 1:
            raise ValueError("activation degree must be >= 1")

    @classmethod
    def parse(cls, text: str, degree: int) -> "Architecture":
        """Build from a comma separated width string such as ``"2,3,2"``."""
        try:
            widths = tuple(int(tok) for tok in text.replace(" ", "").split(","))
        except ValueError as exc:
            raise ValueError(f"malformed architecture {text!r}") from exc
        return cls(widths, degree)

    def __str__(self):
        return f"({','.join(map(str, self.widths))}), r={self.degree}"

    @property
    def depth(self) -> int:
        return len(self.widths) - 1

    @property
    def d0(self) -> int:
        return self.widths[0]

    @property
    def dh(self) -> int:
        return self.widths[-1]

    @property
    def internal_widths(self) -> tuple:
        return self.widths[1:-1]

    @property
    def output_degree(self) -> int:
        return self.degree ** (self.depth - 1)

    @property
    def n_params(self) -> int:
        w = self.widths
        return sum(w[i] * w[i - 1] for i in range(1, len(w)))

    @property
    def basis_size(self) -> int:
        return comb(self.d0 + self.output_degree - 1, self.d0 - 1)

    @property
    def ambient_dim(self) -> int:
        return self.dh * self.basis_size

    def layer_shapes(self):
        w = self.widths
        return [(w[i], w[i - 1]) for i in range(1, len(w))]

    def prefix(self, k: int) -> "Architecture":
        return Architecture(self.widths[: k + 1], self.degree)

    def suffix(self, k: int) -> "Architecture":
        return Architecture(self.widths[k:], self.degree)


@dataclass(frozen=True, eq=False)
class Weights:
    """Weight matrices ``W_1 .. W_h`` (``W_i`` is ``d_i x d_{i-1}``) over one field."""

    matrices: tuple
    field: object

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.field.array(m) for m in self.matrices))

    def check(self, arch: Architecture):
        shapes = [m.shape for m in self.matrices]
        if shapes != arch.layer_shapes():
            raise ShapeMismatch(f"weight shapes {shapes} do not fit {arch}")

    def flat(self) -> np.ndarray:
        """All entries, layer-major and row-major within each layer."""
        return np.concatenate([m.ravel() for m in self.matrices])

    @classmethod
    def from_flat(cls, arch: Architecture, values, field) -> "Weights":
        values = field.array(values)
        mats, pos = [], 0
        for rows, cols in arch.layer_shapes():
            mats.append(values[pos:pos + rows * cols].reshape(rows, cols))
            pos += rows * cols
        return cls(tuple(mats), field)

    def to_field(self, field) -> "Weights":
        return Weights(tuple(field.array(np.asarray(m, dtype=object)) for m in self.matrices), field)

    def __eq__(self, other):
        return (
            isinstance(other, Weights)
            and self.field == other.field
            and len(self.matrices) == len(other.matrices)
            and all(
                a.shape == b.shape and bool(np.all(a == b))
                for a, b in zip(self.matrices, other.matrices)
            )
        )


def random_weights(arch: Architecture, field, rng: np.random.Generator, bound: int = 1000) -> Weights:
    """Uniform weights over F_p, or uniform integers in ``[-bound, bound]`` over QQ."""
    if isinstance(field, PrimeField):
        mats = [field.random(rng, shape) for shape in arch.layer_shapes()]
    else:
        mats = [field.random(rng, shape, bound=bound) for shape in arch.layer_shapes()]
    return Weights(tuple(mats), field)


def _check_degree(arch: Architecture, field):
    if isinstance(field, PrimeField) and arch.degree % field.p == 0:
        raise BadPrime(f"p={field.p} divides the activation degree {arch.degree}")


def forward_layers(arch: Architecture, weights: Weights):
    """Coefficient arrays of every pre-activation ``z_i`` (``i = 1..h``).

    ``z_i`` has shape ``(d_i, N(r**(i-1)))``; the last entry is the output.
    """
    weights.check(arch)
    field = weights.field
    n, r = arch.d0, arch.degree
    MonomialBasis(n, arch.output_degree)  # resource guard before any work
    # The linear forms W_1 x: coefficient of x_j is W_1[:, j] in lex order.
    z = weights.matrices[0]
    deg = 1
    layers = [z]
    for w in weights.matrices[1:]:
        a = power_coeffs(z, n, deg, r, field)
        deg *= r
        z = field.matmul(w, a)
        layers.append(z)
    return layers


def forward(arch: Architecture, weights: Weights) -> PolyVector:
    """Output polynomials ``p_theta`` of the network, one per output unit."""
    _check_degree(arch, weights.field)
    out = forward_layers(arch, weights)[-1]
    return PolyVector(MonomialBasis(arch.d0, arch.output_degree), out, weights.field)


def _multinomial(exps) -> int:
    out = factorial(sum(exps))
    for e in exps:
        out //= factorial(e)
    return out


def forward_cp_shallow(w2, w1, r: int, field) -> PolyVector:
    """``sum_i W_2[:, i] (W_1[i, :] . x)**r`` by direct multinomial expansion.

    Shares no code path with :func:`forward`: each power of a linear form is
    expanded as ``sum_alpha multinomial(r; alpha) prod_j l_j**alpha_j``.
    """
    w1 = field.array(w1)
    w2 = field.array(w2)
    if w1.ndim != 2 or w2.ndim != 2 or w2.shape[1] != w1.shape[0]:
        raise ShapeMismatch("W_2 must have as many columns as W_1 has rows")
    d1, d0 = w1.shape
    basis = MonomialBasis(d0, r)
    powers = field.zeros((d1, len(basis)))
    for j, alpha in enumerate(basis.exponents):
        term = field.ones(d1)
        for k, e in enumerate(alpha):
            term = field.mul(term, field.power(w1[:, k], int(e)))
        powers[:, j] = field.scale(term, _multinomial(alpha))
    return PolyVector(basis, field.matmul(w2, powers), field)


def khatri_rao_power(m, r: int, field=None) -> np.ndarray:
    """Row-wise Khatri-Rao power: row ``i`` becomes ``vec(M[i]^{(x) r})``.

    The vectorisation is row-major, so for ``M = [[1, 2]]`` and ``r = 2`` the
    result is ``[[1, 2, 2, 4]]``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    m = np.asarray(m) if field is None else field.array(m)
    a = m.shape[0]
    out = m
    for _ in range(r - 1):
        prod = out[:, :, None] * m[:, None, :]
        if field is not None:
            prod = field.array(prod) if prod.dtype == object else prod % field.p
        out = prod.reshape(a, -1)
    return out


def symmetrize_rows(t, nvars: int, degree: int, field) -> np.ndarray:
    """Map rows of ``(R^nvars)^{(x) degree}`` onto monomial coefficients.

    Every tensor entry is added to the bucket of its monomial, which is the
    coefficient of that monomial in ``T . x^{(x) degree}``.  Division free.
    """
    basis = MonomialBasis(nvars, degree)
    t = field.array(t)
    if t.shape[1] != nvars**degree:
        raise ShapeMismatch("row length must be nvars**degree")
    idx = np.indices((nvars,) * degree).reshape(degree, -1).T if degree else np.zeros((1, 0), int)
    counts = np.zeros((idx.shape[0], nvars), dtype=np.int64)
    for k in range(nvars):
        counts[:, k] = (idx == k).sum(axis=1)
    target = np.array([basis.index[tuple(int(c) for c in row)] for row in counts])
    out = field.zeros((t.shape[0], len(basis)))
    for j in range(len(basis)):
        cols = np.flatnonzero(target == j)
        acc = t[:, cols[0]]
        for c in cols[1:]:
            acc = field.add(acc, t[:, c])
        out[:, j] = acc
    return out


def forward_khatri_rao(arch: Architecture, weights: Weights) -> PolyVector:
    """``SymRow W_h (... (W_2 W_1^{.r})^{.r} ...)`` evaluated literally."""
    weights.check(arch)
    field = weights.field
    t = weights.matrices[0]
    for w in weights.matrices[1:]:
        t = field.matmul(w, khatri_rao_power(t, arch.degree, field))
    coeffs = symmetrize_rows(t, arch.d0, arch.output_degree, field)
    return PolyVector(MonomialBasis(arch.d0, arch.output_degree), coeffs, field)


@dataclass(frozen=True, eq=False)
class ScalePermAction:
    """Scalings ``D_i`` (as vectors) and permutations ``P_i`` for hidden layers.

    ``permutations[i]`` is an index array ``pi`` with ``(P v)[k] = v[pi[k]]``.
    """

    diagonals: tuple
    permutations: tuple

    @classmethod
    def identity(cls, arch: Architecture, field=QQ) -> "ScalePermAction":
        return cls(
            tuple(field.ones(d) for d in arch.internal_widths),
            tuple(np.arange(d) for d in arch.internal_widths),
        )


def random_action(arch: Architecture, field, rng: np.random.Generator, bound: int = 9) -> ScalePermAction:
    """Random nonzero scalings and uniform random permutations."""
    diags, perms = [], []
    for d in arch.internal_widths:
        if isinstance(field, PrimeField):
            diag = rng.integers(1, field.p, size=d)
        else:
            mags = rng.integers(1, bound + 1, size=d)
            diag = mags * rng.choice([-1, 1], size=d)
        diags.append(field.array(diag.astype(object)))
        perms.append(rng.permutation(d))
    return ScalePermAction(tuple(diags), tuple(perms))


def _perm_matrix(pi, field) -> np.ndarray:
    n = len(pi)
    out = field.zeros((n, n))
    out[np.arange(n), np.asarray(pi)] = 1
    return field.array(out)


def _diag(values, field) -> np.ndarray:
    n = len(values)
    out = field.zeros((n, n))
    for i, v in enumerate(values):
        out[i, i] = v
    return out


def apply_action(arch: Architecture, weights: Weights, action: ScalePermAction) -> Weights:
    """Replace ``W_i <- P_i D_i W_i D_{i-1}^{-r} P_{i-1}^T`` (boundary layers truncated)."""
    weights.check(arch)
    field = weights.field
    r, h = arch.degree, arch.depth
    if len(action.diagonals) != h - 1 or len(action.permutations) != h - 1:
        raise ShapeMismatch("action must act on every hidden layer")
    left, right = [], []
    for d, width, pi in zip(action.diagonals, arch.internal_widths, action.permutations):
        if len(d) != width or len(pi) != width:
            raise ShapeMismatch("action sizes do not match hidden widths")
        try:
            inv_r = [field.inv(field.power(field.array(np.array([v], dtype=object)), r)[0]) for v in d]
        except ZeroDivisionError as exc:
            raise NonInvertibleDiagonal("diagonal scaling has a zero entry") from exc
        p = _perm_matrix(pi, field)
        left.append(field.matmul(p, _diag(d, field)))
        right.append(field.matmul(_diag(inv_r, field), p.T.copy()))
    mats = []
    for i, w in enumerate(weights.matrices):
        if i < h - 1:
            w = field.matmul(left[i], w)
        if i > 0:
            w = field.matmul(w, right[i - 1])
        mats.append(w)
    return Weights(tuple(mats), field)


def three_quadrics_coefficients(weights: Weights) -> np.ndarray:
    """The 3x3 matrix of quadratic coefficients ``c_11, c_12, c_22`` per output.

    ``c_12`` is the coefficient of ``x_1 x_2`` itself (the monomial basis
    coefficient), matching the lex ordering of the basis.
    """
    arch = Architecture((2, 2, 3), 2)
    return forward(arch, weights).coeffs
