"""Exact coefficient fields and dense exact linear algebra.

Two fields are supported:

* :class:`PrimeField` -- integers modulo a prime ``p < 2**31`` stored in
  ``int64`` numpy arrays.  Products of two reduced entries fit in 62 bits, so
  elementwise arithmetic never overflows; matrix products split one operand
  into 16-bit halves to keep partial sums below ``2**63``.
* :class:`RationalField` (the module-level ``QQ``) -- arbitrary precision
  rationals stored in numpy ``object`` arrays of ``int``/``Fraction``.

There is no floating point anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

from .errors import BadPrime, FieldMismatch, SingularMatrix

PRIME_FLOOR = 2**20
PRIME_CEIL = 2**31

# Deterministic Miller-Rabin witnesses; sufficient for n < 3,215,031,751.
_MR_WITNESSES = (2, 3, 5, 7)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test, valid for ``n < 3.2e9``."""
    n = int(n)
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    if n >= 3_215_031_751:
        raise ValueError("witness set only certifies n < 3215031751")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """The field Z/pZ.  Any prime below ``2**31`` is accepted."""

    dtype = np.int64

    def __init__(self, p: int):
        p = int(p)
        if not (2 <= p < PRIME_CEIL) or not is_prime(p):
            raise BadPrime(f"{p} is not a prime below 2**31")
        self.p = p

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    @property
    def characteristic(self) -> int:
        return self.p

    def array(self, values) -> np.ndarray:
        """Reduce integer-valued (or rational) data into the field."""
        arr = np.asarray(values)
        if arr.dtype == object:
            flat = [self._reduce_scalar(v) for v in arr.ravel()]
            return np.array(flat, dtype=np.int64).reshape(arr.shape)
        return np.mod(arr.astype(np.int64), self.p)

    def _reduce_scalar(self, v) -> int:
        if isinstance(v, Fraction):
            return v.numerator % self.p * pow(v.denominator % self.p, -1, self.p) % self.p
        return int(v) % self.p

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)

    def ones(self, shape) -> np.ndarray:
        return np.ones(shape, dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def scale(self, a, c: int):
        return (a * (int(c) % self.p)) % self.p

    def matmul(self, a, b):
        """Exact ``a @ b`` mod p for reduced int64 operands."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if a.shape[-1] >= 1 << 16:
            raise ValueError("inner dimension too large for split matmul")
        lo = b & 0xFFFF
        hi = b >> 16
        out = (a @ lo) % self.p
        out = (out + ((a @ hi) % self.p) * 65536) % self.p
        return out

    def power(self, a, e: int):
        """Elementwise ``a**e`` by repeated squaring."""
        result = np.ones_like(a)
        base = a % self.p
        e = int(e)
        while e:
            if e & 1:
                result = result * base % self.p
            e >>= 1
            if e:
                base = base * base % self.p
        return result

    def inv(self, a: int) -> int:
        a = int(a) % self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a) -> bool:
        return not np.any(np.asarray(a) % self.p)

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.p, size=shape, dtype=np.int64)


class RationalField:
    """The rationals, stored as numpy object arrays of ``int``/``Fraction``."""

    dtype = object
    characteristic = 0

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def array(self, values) -> np.ndarray:
        arr = np.asarray(values, dtype=object)
        flat = [_normalize(v) for v in arr.ravel()]
        out = np.empty(len(flat), dtype=object)
        out[:] = flat
        return out.reshape(arr.shape)

    def zeros(self, shape) -> np.ndarray:
        out = np.empty(shape, dtype=object)
        out.fill(0)
        return out

    def ones(self, shape) -> np.ndarray:
        out = np.empty(shape, dtype=object)
        out.fill(1)
        return out

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = 1
        return out

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def scale(self, a, c):
        return a * c

    def matmul(self, a, b):
        a = np.asarray(a, dtype=object)
        b = np.asarray(b, dtype=object)
        if a.shape[-1] == 0:
            return self.zeros(a.shape[:-1] + b.shape[-1:])
        return a @ b

    def power(self, a, e: int):
        result = self.ones(np.shape(a))
        base = np.asarray(a, dtype=object)
        e = int(e)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return _normalize(Fraction(1) / Fraction(a))

    def is_zero(self, a) -> bool:
        return all(v == 0 for v in np.asarray(a, dtype=object).ravel())

    def random(self, rng: np.random.Generator, shape, bound: int = 1000) -> np.ndarray:
        """Uniform integers in ``[-bound, bound]``."""
        ints = rng.integers(-bound, bound + 1, size=shape)
        return self.array(ints.astype(object))


QQ = RationalField()


def _normalize(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else v
    if isinstance(v, (int, np.integer)):
        return int(v)
    return _normalize(Fraction(v))


def random_prime(seed: int, lower_bound: int = PRIME_FLOOR) -> PrimeField:
    """Uniformly sample a prime from ``[max(lower_bound, 2**20), 2**31)``.

    Rejection sampling over uniform integers, so every prime in range is
    equally likely.  Deterministic given ``seed``.
    """
    if lower_bound < PRIME_FLOOR:
        raise ValueError("lower_bound must be at least 2**20")
    lo = max(int(lower_bound), PRIME_FLOOR)
    if lo >= PRIME_CEIL:
        raise ValueError("lower_bound must be below 2**31")
    rng = np.random.default_rng(seed)
    while True:
        candidate = int(rng.integers(lo, PRIME_CEIL))
        if is_prime(candidate):
            return PrimeField(candidate)


def _check_field(field):
    if not isinstance(field, (PrimeField, RationalField)):
        raise FieldMismatch(f"unsupported field {field!r}")


def rank(m, field) -> int:
    """Exact rank of a dense matrix over ``field``.

    Ordinary elimination over F_p; fraction-free (Bareiss) elimination over
    the rationals after clearing row denominators.  Rational matrices far from
    square are first replaced by their Gram matrix: over an ordered field
    ``rank(A^T A) = rank(A)``, and the small square matrix is much cheaper to
    eliminate than the tall original.
    """
    _check_field(field)
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("rank expects a 2-d matrix")
    if m.size == 0:
        return 0
    if isinstance(field, PrimeField):
        return _rank_mod_p(field.array(m), field.p)
    a = _integer_rows(m)
    nrows, ncols = a.shape
    if nrows > 2 * ncols:
        a = a.T.dot(a)
    elif ncols > 2 * nrows:
        a = a.dot(a.T)
    return _rank_bareiss(a)


def _rank_mod_p(a: np.ndarray, p: int) -> int:
    a = a.copy()
    nrows, ncols = a.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r, c:] = a[r, c:] * pow(int(a[r, c]), p - 2, p) % p
        rows = np.flatnonzero(a[r + 1:, c]) + r + 1
        if rows.size:
            a[rows, c:] = (a[rows, c:] - a[rows, c, None] * a[r, c:]) % p
        r += 1
    return r


def _integer_rows(m: np.ndarray) -> np.ndarray:
    """Scale each row of a rational matrix by the lcm of its denominators."""
    out = np.empty(m.shape, dtype=object)
    for i, row in enumerate(m):
        fr = [Fraction(v) for v in row]
        den = 1
        for v in fr:
            den = den * v.denominator // gcd(den, v.denominator)
        out[i, :] = [v.numerator * (den // v.denominator) for v in fr]
    return out


def _rank_bareiss(a: np.ndarray) -> int:
    a = a.copy()
    nrows, ncols = a.shape
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i, c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        pv = a[r, c]
        if r + 1 < nrows and c + 1 < ncols:
            block = a[r + 1:, c + 1:] * pv - np.outer(a[r + 1:, c], a[r, c + 1:])
            a[r + 1:, c + 1:] = block // prev
        a[r + 1:, c] = 0
        prev = pv
        r += 1
    return r


def solve(m, b, field) -> np.ndarray:
    """Return ``X`` with ``m @ X == b`` exactly; ``m`` must be square.

    Raises :class:`SingularMatrix` when ``m`` is not invertible.
    """
    _check_field(field)
    m = field.array(m)
    b = field.array(b)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n or b.shape[0] != n:
        raise ValueError("solve expects square m and matching b")
    if isinstance(field, PrimeField):
        x = _solve_mod_p(m, b, field.p)
    else:
        x = _solve_rational(m, b)
    return x[:, 0] if vector else x


def _solve_mod_p(m, b, p):
    n = m.shape[0]
    aug = np.concatenate([m, b], axis=1)
    for c in range(n):
        nz = np.flatnonzero(aug[c:, c])
        if nz.size == 0:
            raise SingularMatrix(f"no pivot in column {c}")
        piv = c + int(nz[0])
        if piv != c:
            aug[[c, piv]] = aug[[piv, c]]
        aug[c] = aug[c] * pow(int(aug[c, c]), p - 2, p) % p
        rows = np.flatnonzero(aug[:, c])
        rows = rows[rows != c]
        if rows.size:
            aug[rows] = (aug[rows] - aug[rows, c, None] * aug[c]) % p
    return aug[:, n:]


def _solve_rational(m, b):
    n = m.shape[0]
    aug = np.empty((n, n + b.shape[1]), dtype=object)
    aug[:, :n] = m
    aug[:, n:] = b
    for i in range(n):
        for j in range(aug.shape[1]):
            aug[i, j] = Fraction(aug[i, j])
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i, c] != 0), None)
        if piv is None:
            raise SingularMatrix(f"no pivot in column {c}")
        if piv != c:
            aug[[c, piv]] = aug[[piv, c]]
        aug[c] = aug[c] / aug[c, c]
        for i in range(n):
            if i != c and aug[i, c] != 0:
                aug[i] = aug[i] - aug[i, c] * aug[c]
    return QQ.array(aug[:, n:])


def determinant(m, field):
    """Determinant by elimination (used by the hypersurface checks)."""
    _check_field(field)
    m = field.array(m)
    n = m.shape[0]
    if isinstance(field, PrimeField):
        p = field.p
        a = m.copy()
        det = 1
        for c in range(n):
            nz = np.flatnonzero(a[c:, c])
            if nz.size == 0:
                return 0
            piv = c + int(nz[0])
            if piv != c:
                a[[c, piv]] = a[[piv, c]]
                det = -det
            det = det * int(a[c, c]) % p
            inv = pow(int(a[c, c]), p - 2, p)
            rows = np.arange(c + 1, n)
            if rows.size:
                f = a[rows, c] * inv % p
                a[rows, c:] = (a[rows, c:] - f[:, None] * a[c, c:]) % p
        return det % p
    a = np.array([[Fraction(v) for v in row] for row in m], dtype=object)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i, c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            det = -det
        det *= a[c, c]
        for i in range(c + 1, n):
            if a[i, c] != 0:
                a[i, c:] = a[i, c:] - (a[i, c] / a[c, c]) * a[c, c:]
    return _normalize(det)
