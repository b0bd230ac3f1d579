"""Dense homogeneous polynomials over an exact field.

A homogeneous polynomial of degree ``d`` in ``n`` variables is a coefficient
vector indexed by a :class:`MonomialBasis`, whose exponent vectors are listed
in graded-lexicographic order (for a single degree this is plain lex order:
``x1**d`` first, ``xn**d`` last).  Arithmetic works on raw coefficient arrays
with arbitrary leading batch axes so that whole layers of a network can be
processed at once; :class:`HomogPoly` and :class:`PolyVector` are thin typed
wrappers around those arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import DegreeOverflow, FieldMismatch, ShapeMismatch

MAX_BASIS_SIZE = 10**6


def basis_size(nvars: int, degree: int) -> int:
    """Number of monomials of degree ``degree`` in ``nvars`` variables."""
    return comb(nvars + degree - 1, degree)


def _exponents(nvars: int, degree: int):
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _exponents(nvars - 1, degree - first):
            yield (first,) + rest


class MonomialBasis:
    """Ordered exponent list for ``Sym_degree(R^nvars)``.

    Instances are cached, so two bases with the same ``(nvars, degree)`` are
    the same object.
    """

    def __new__(cls, nvars: int, degree: int):
        return _basis(int(nvars), int(degree))

    @classmethod
    def _build(cls, nvars, degree):
        if nvars < 1 or degree < 0:
            raise ValueError("need nvars >= 1 and degree >= 0")
        size = basis_size(nvars, degree)
        if size > MAX_BASIS_SIZE:
            raise DegreeOverflow(
                f"Sym_{degree}(R^{nvars}) has {size} monomials (limit {MAX_BASIS_SIZE})"
            )
        self = object.__new__(cls)
        self.nvars = nvars
        self.degree = degree
        self.exponents = np.array(list(_exponents(nvars, degree)), dtype=np.int64).reshape(
            size, nvars
        )
        self.index = {tuple(int(e) for e in row): i for i, row in enumerate(self.exponents)}
        return self

    def __len__(self):
        return len(self.exponents)

    def __repr__(self):
        return f"MonomialBasis(nvars={self.nvars}, degree={self.degree})"

    def __reduce__(self):
        return (MonomialBasis, (self.nvars, self.degree))


@lru_cache(maxsize=None)
def _basis(nvars, degree):
    return MonomialBasis._build(nvars, degree)


@lru_cache(maxsize=256)
def _product_table(nvars: int, da: int, db: int) -> np.ndarray:
    """``table[i, j]`` = index of (monomial i of degree da) * (monomial j of degree db)."""
    a = MonomialBasis(nvars, da)
    b = MonomialBasis(nvars, db)
    c = MonomialBasis(nvars, da + db)
    if nvars == 2:
        # x1^(da-i) x2^i * x1^(db-j) x2^j has x2-exponent i + j.
        return np.add.outer(np.arange(da + 1), np.arange(db + 1))
    sums = a.exponents[:, None, :] + b.exponents[None, :, :]
    flat = [c.index[tuple(int(e) for e in row)] for row in sums.reshape(-1, nvars)]
    return np.array(flat, dtype=np.int64).reshape(len(a), len(b))


def mul_coeffs(a, b, nvars: int, da: int, db: int, field) -> np.ndarray:
    """Multiply batches of coefficient vectors.

    ``a`` has shape ``(..., N(da))`` and ``b`` shape ``(..., N(db))``; leading
    axes broadcast.  Returns shape ``(..., N(da + db))``.
    """
    table = _product_table(nvars, da, db)
    nc = len(MonomialBasis(nvars, da + db))
    lead = np.broadcast_shapes(np.shape(a)[:-1], np.shape(b)[:-1])
    out = field.zeros(lead + (nc,))
    b = np.broadcast_to(b, lead + (np.shape(b)[-1],))
    for i in range(table.shape[0]):
        ai = np.broadcast_to(a[..., i:i + 1], lead + (1,))
        if not np.any(ai != 0):
            continue
        cols = table[i]
        out[..., cols] = field.add(out[..., cols], field.mul(ai, b))
    return out


def power_coeffs(a, nvars: int, degree: int, r: int, field) -> np.ndarray:
    """Raise each coefficient vector in the batch ``a`` to the ``r``-th power."""
    if r < 0:
        raise ValueError("negative power")
    result = None
    result_deg = 0
    base, base_deg = a, degree
    e = int(r)
    while e:
        if e & 1:
            if result is None:
                result, result_deg = base, base_deg
            else:
                result = mul_coeffs(result, base, nvars, result_deg, base_deg, field)
                result_deg += base_deg
        e >>= 1
        if e:
            base = mul_coeffs(base, base, nvars, base_deg, base_deg, field)
            base_deg *= 2
    if result is None:
        return field.ones(np.shape(a)[:-1] + (1,))
    return result


def monomial_powers(points, basis: MonomialBasis, field) -> np.ndarray:
    """``V[i, j]`` = value of monomial ``j`` of ``basis`` at ``points[i]``."""
    pts = field.array(points)
    if pts.ndim != 2 or pts.shape[1] != basis.nvars:
        raise ShapeMismatch(f"points must have shape (M, {basis.nvars})")
    m = pts.shape[0]
    d = basis.degree
    # table[k][e] holds x_k ** e for every point.
    out = field.ones((m, len(basis)))
    for k in range(basis.nvars):
        powers = field.zeros((d + 1, m))
        powers[0] = field.ones(m)
        for e in range(1, d + 1):
            powers[e] = field.mul(powers[e - 1], pts[:, k])
        out = field.mul(out, powers[basis.exponents[:, k]].T)
    return out


def monomial_eval_matrix(basis: MonomialBasis, points, field) -> np.ndarray:
    """Evaluation matrix turning coefficient vectors into point values.

    For coefficient vector ``c``, ``V @ c`` lists the polynomial's values at
    ``points``; with ``len(points) == len(basis)`` and ``V`` invertible,
    ``solve(V, values)`` recovers ``c``.
    """
    return monomial_powers(points, basis, field)


@dataclass(frozen=True, eq=False)
class HomogPoly:
    basis: MonomialBasis
    coeffs: np.ndarray
    field: object

    def __post_init__(self):
        if np.shape(self.coeffs) != (len(self.basis),):
            raise ShapeMismatch("coefficient vector does not match basis size")

    @classmethod
    def from_dict(cls, terms: dict, nvars: int, degree: int, field):
        basis = MonomialBasis(nvars, degree)
        coeffs = [0] * len(basis)
        for exps, c in terms.items():
            coeffs[basis.index[tuple(exps)]] = c
        return cls(basis, field.array(np.array(coeffs, dtype=object)), field)

    @classmethod
    def variable(cls, j: int, nvars: int, field):
        exps = [0] * nvars
        exps[j] = 1
        return cls.from_dict({tuple(exps): 1}, nvars, 1, field)

    @property
    def nvars(self):
        return self.basis.nvars

    @property
    def degree(self):
        return self.basis.degree

    def to_dict(self) -> dict:
        return {
            tuple(int(e) for e in exps): int(c) if isinstance(c, np.integer) else c
            for exps, c in zip(self.basis.exponents, self.coeffs)
            if c != 0
        }

    def __add__(self, other):
        _check_compatible(self, other)
        if other.degree != self.degree:
            raise ShapeMismatch("can only add polynomials of equal degree")
        return HomogPoly(self.basis, self.field.add(self.coeffs, other.coeffs), self.field)

    def __mul__(self, other):
        return multiply(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, HomogPoly)
            and self.basis is other.basis
            and self.field == other.field
            and bool(np.all(self.coeffs == other.coeffs))
        )


@dataclass(frozen=True, eq=False)
class PolyVector:
    """``k`` homogeneous polynomials sharing one basis; ``coeffs`` is ``(k, N)``."""

    basis: MonomialBasis
    coeffs: np.ndarray
    field: object

    def __post_init__(self):
        if np.ndim(self.coeffs) != 2 or np.shape(self.coeffs)[1] != len(self.basis):
            raise ShapeMismatch("coefficient matrix does not match basis size")

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, k) -> HomogPoly:
        return HomogPoly(self.basis, self.coeffs[k], self.field)

    @classmethod
    def from_polys(cls, polys):
        polys = list(polys)
        first = polys[0]
        for f in polys[1:]:
            _check_compatible(first, f)
            if f.basis is not first.basis:
                raise ShapeMismatch("components must share one basis")
        return cls(first.basis, np.stack([f.coeffs for f in polys]), first.field)

    @property
    def degree(self):
        return self.basis.degree

    def __eq__(self, other):
        return (
            isinstance(other, PolyVector)
            and self.basis is other.basis
            and self.field == other.field
            and self.coeffs.shape == other.coeffs.shape
            and bool(np.all(self.coeffs == other.coeffs))
        )


def _check_compatible(f, g):
    if f.field != g.field:
        raise FieldMismatch(f"{f.field!r} vs {g.field!r}")
    if f.nvars != g.nvars:
        raise ShapeMismatch("polynomials live in different numbers of variables")


def multiply(f: HomogPoly, g: HomogPoly) -> HomogPoly:
    _check_compatible(f, g)
    coeffs = mul_coeffs(f.coeffs, g.coeffs, f.nvars, f.degree, g.degree, f.field)
    return HomogPoly(MonomialBasis(f.nvars, f.degree + g.degree), coeffs, f.field)


def power(f: HomogPoly, r: int) -> HomogPoly:
    coeffs = power_coeffs(f.coeffs, f.nvars, f.degree, r, f.field)
    return HomogPoly(MonomialBasis(f.nvars, f.degree * r), coeffs, f.field)


def evaluate(f: HomogPoly, x):
    """Exact value of ``f`` at the point ``x``."""
    row = monomial_powers([list(x)], f.basis, f.field)[0]
    return f.field.matmul(row[None, :], f.coeffs[:, None])[0, 0]
