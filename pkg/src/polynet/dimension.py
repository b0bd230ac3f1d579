"""Dimension of the functional variety from the rank of the network Jacobian.

For generic weights the rank of the Jacobian of ``theta -> p_theta`` equals
the dimension of the functional variety, and at any weights it is a lower
bound.  Three engines build that Jacobian:

``symbolic``
    Reverse-mode differentiation with polynomial-valued intermediates over
    the rationals (integer weights).  Produces the coefficient Jacobian
    directly.
``ff-stacked``
    Reverse-mode differentiation over F_p at ``N + 5`` random sample points.
    Rows are point gradients; the rank equals the coefficient-Jacobian rank
    whenever the sample points' monomial evaluation matrix has full column
    rank.
``ff-interp``
    As ``ff-stacked`` with exactly ``N`` points, followed by solving the
    Vandermonde-type system to recover the coefficient Jacobian mod p.

Rows are ordered (output unit, monomial or sample point); columns follow
:meth:`Weights.flat` (layer-major, row-major within a layer).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from . import algebra
from .algebra import QQ, PrimeField, random_prime
from .errors import (
    BadPrime,
    ConsistencyError,
    DegenerateSamples,
    InterpolationFailed,
    SingularMatrix,
)
from .network import Architecture, Weights, forward_layers, random_weights
from .poly import MonomialBasis, monomial_eval_matrix, mul_coeffs, power_coeffs

log = logging.getLogger(__name__)

METHODS = ("ff-stacked", "ff-interp", "symbolic")
OVERSAMPLE = 5
MAX_RESAMPLES = 10


class Verdict(str, Enum):
    PROVED = "proved"
    PROBABLY_NOT = "probably_not"


@dataclass(frozen=True, eq=False)
class JacobianMatrix:
    """Coefficient Jacobian, shape ``(d_h * N, d_theta)``."""

    arch: Architecture
    matrix: np.ndarray
    field: object

    def rank(self) -> int:
        return algebra.rank(self.matrix, self.field)

    def reduce(self, field: PrimeField) -> "JacobianMatrix":
        return JacobianMatrix(self.arch, field.array(self.matrix), field)


def _check_prime(arch: Architecture, field):
    if isinstance(field, PrimeField) and arch.degree % field.p == 0:
        raise BadPrime(f"p={field.p} divides the activation degree r={arch.degree}")


def jacobian_ring(arch: Architecture, weights: Weights) -> JacobianMatrix:
    """Backpropagation with polynomial intermediates over the weights' field."""
    _check_prime(arch, weights.field)
    fld = weights.field
    n, r, h = arch.d0, arch.degree, arch.depth
    d_out = arch.output_degree
    z = forward_layers(arch, weights)
    # deg[i] is the degree of z_i; a_{i-1} = z_{i-1}**r has degree deg[i].
    deg = [None] + [r ** (i - 1) for i in range(1, h + 1)]
    acts = [fld.eye(n)] + [power_coeffs(z[i - 1], n, deg[i], r, fld) for i in range(1, h)]
    delta = fld.eye(arch.dh)[:, :, None]
    blocks = []
    for i in range(h, 0, -1):
        grad = mul_coeffs(delta[:, :, None, :], acts[i - 1][None, None], n, d_out - deg[i], deg[i], fld)
        blocks.append(grad.reshape(arch.dh, -1, grad.shape[-1]))
        if i == 1:
            break
        w = weights.matrices[i - 1]
        back = fld.matmul(np.swapaxes(delta, 1, 2), w)  # (d_h, N_delta, d_{i-1})
        back = np.ascontiguousarray(np.swapaxes(back, 1, 2))
        slope = fld.scale(power_coeffs(z[i - 2], n, deg[i - 1], r - 1, fld), r)
        delta = mul_coeffs(back, slope[None], n, d_out - deg[i], deg[i - 1] * (r - 1), fld)
    jac = np.concatenate(blocks[::-1], axis=1)  # (d_h, d_theta, N)
    jac = np.swapaxes(jac, 1, 2).reshape(arch.dh * jac.shape[2], arch.n_params)
    return JacobianMatrix(arch, jac, fld)


def jacobian_symbolic(arch: Architecture, weights: Weights) -> JacobianMatrix:
    """Exact coefficient Jacobian over the rationals at (integer) weights."""
    if weights.field != QQ:
        weights = weights.to_field(QQ)
    return jacobian_ring(arch, weights)


def point_gradients(arch: Architecture, weights: Weights, points) -> np.ndarray:
    """Gradients of every output at every point, over F_p.

    Returns shape ``(d_h * M, d_theta)`` with rows ordered (output, point).
    """
    fld = weights.field
    if not isinstance(fld, PrimeField):
        raise TypeError("point gradients are computed over a prime field")
    _check_prime(arch, fld)
    weights.check(arch)
    p, r = fld.p, arch.degree
    x = fld.array(points)
    m = x.shape[0]
    zs, acts = [], [x]
    for i, w in enumerate(weights.matrices):
        zi = fld.matmul(acts[-1], np.ascontiguousarray(w.T))
        zs.append(zi)
        if i < arch.depth - 1:
            acts.append(fld.power(zi, r))
    delta = np.broadcast_to(np.eye(arch.dh, dtype=np.int64), (m, arch.dh, arch.dh))
    blocks = []
    for i in range(arch.depth, 0, -1):
        grad = delta[:, :, :, None] * acts[i - 1][:, None, None, :] % p
        blocks.append(grad.reshape(m, arch.dh, -1))
        if i == 1:
            break
        back = fld.matmul(delta, weights.matrices[i - 1])
        slope = fld.power(zs[i - 2], r - 1) * r % p
        delta = back * slope[:, None, :] % p
    g = np.concatenate(blocks[::-1], axis=2)  # (M, d_h, d_theta)
    return np.swapaxes(g, 0, 1).reshape(arch.dh * m, arch.n_params)


def sample_points(arch: Architecture, fld: PrimeField, rng: np.random.Generator, count: int):
    return fld.random(rng, (count, arch.d0))


def jacobian_ff_stacked(arch: Architecture, weights: Weights, points) -> np.ndarray:
    """Stacked point gradients (the rank-equivalent of the coefficient Jacobian)."""
    basis = MonomialBasis(arch.d0, arch.output_degree)
    if len(points) < len(basis):
        raise DegenerateSamples(f"need at least {len(basis)} points, got {len(points)}")
    return point_gradients(arch, weights, points)


def samples_are_degenerate(arch: Architecture, fld: PrimeField, points) -> bool:
    """True when the points' monomial evaluation matrix has rank below ``N``."""
    basis = MonomialBasis(arch.d0, arch.output_degree)
    pts = fld.array(points)
    if arch.d0 == 2:
        # Binary forms of degree D: evaluations at k pairwise non-proportional
        # nonzero points are independent for k <= D + 1 (Vandermonde).
        classes = set()
        for x1, x2 in pts.tolist():
            if x1:
                classes.add(x2 * fld.inv(x1) % fld.p)
            elif x2:
                classes.add(None)
        return len(classes) < len(basis)
    return algebra.rank(monomial_eval_matrix(basis, pts, fld), fld) < len(basis)


def jacobian_ff_interpolated(
    arch: Architecture, weights: Weights, rng: np.random.Generator, attempts: int = MAX_RESAMPLES
) -> JacobianMatrix:
    """Coefficient Jacobian mod p recovered from gradients at ``N`` points."""
    fld = weights.field
    _check_prime(arch, fld)
    basis = MonomialBasis(arch.d0, arch.output_degree)
    n = len(basis)
    for _ in range(attempts):
        pts = sample_points(arch, fld, rng, n)
        vand = monomial_eval_matrix(basis, pts, fld)
        grads = point_gradients(arch, weights, pts).reshape(arch.dh, n, arch.n_params)
        try:
            blocks = [algebra.solve(vand, grads[k], fld) for k in range(arch.dh)]
        except SingularMatrix:
            continue
        return JacobianMatrix(arch, np.concatenate(blocks, axis=0), fld)
    raise InterpolationFailed(f"evaluation matrix singular after {attempts} samplings")


@dataclass(frozen=True)
class Trial:
    index: int
    prime: int | None  # None for the rational engine
    rank: int


@dataclass
class DimensionEstimate:
    arch: Architecture
    dim: int
    ambient: int
    is_filling: Verdict
    method: str
    seed: int
    trials: list = dc_field(default_factory=list)

    @property
    def filling(self) -> bool:
        return self.is_filling is Verdict.PROVED

    def to_dict(self) -> dict:
        return {
            "widths": list(self.arch.widths),
            "degree": self.arch.degree,
            "dim": self.dim,
            "ambient": self.ambient,
            "is_filling": self.is_filling.value,
            "method": self.method,
            "seed": self.seed,
            "oversample": OVERSAMPLE if self.method == "ff-stacked" else 0,
            "trials": [
                {
                    "index": t.index,
                    "field": "QQ" if t.prime is None else str(t.prime),
                    "rank": t.rank,
                }
                for t in self.trials
            ],
        }


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible substream for trial ``index``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _trial_prime(arch: Architecture, rng, prime):
    if prime is not None:
        fld = prime if isinstance(prime, PrimeField) else PrimeField(prime)
        _check_prime(arch, fld)
        return fld
    while True:
        fld = random_prime(int(rng.integers(0, 2**63 - 1)))
        if arch.degree % fld.p:
            return fld


def trial_rank(arch: Architecture, method: str, rng: np.random.Generator, prime=None):
    """One random-weights rank evaluation; returns ``(prime_or_None, rank)``."""
    if method == "symbolic":
        weights = random_weights(arch, QQ, rng)
        return None, jacobian_symbolic(arch, weights).rank()
    fld = _trial_prime(arch, rng, prime)
    weights = random_weights(arch, fld, rng)
    if method == "ff-interp":
        return fld.p, jacobian_ff_interpolated(arch, weights, rng).rank()
    if method != "ff-stacked":
        raise ValueError(f"unknown method {method!r}")
    from .bounds import naive_bound

    basis_n = arch.basis_size
    for _ in range(MAX_RESAMPLES):
        pts = sample_points(arch, fld, rng, basis_n + OVERSAMPLE)
        rk = algebra.rank(jacobian_ff_stacked(arch, weights, pts), fld)
        if rk >= min(naive_bound(arch), arch.ambient_dim):
            return fld.p, rk
        if not samples_are_degenerate(arch, fld, pts):
            return fld.p, rk
        log.debug("degenerate samples for %s mod %d; resampling", arch, fld.p)
    raise DegenerateSamples(f"sample points degenerate {MAX_RESAMPLES} times in a row")


def dimension(
    arch: Architecture,
    method: str = "ff-stacked",
    trials: int = 3,
    seed: int = 0,
    prime=None,
    stop_on_filling: bool = False,
) -> DimensionEstimate:
    """Estimate ``dim V_{d,r}`` as the maximal Jacobian rank over random trials.

    A trial reaching the ambient dimension proves the variety is filling
    (a nonzero maximal minor mod p at integer weights is nonzero over QQ).
    Otherwise the verdict is only "probably not filling".  With
    ``stop_on_filling`` the remaining trials are skipped once a proof is found.
    """
    from .bounds import naive_bound

    if trials < 1:
        raise ValueError("need at least one trial")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    MonomialBasis(arch.d0, arch.output_degree)
    ambient = arch.ambient_dim
    naive = naive_bound(arch)
    records = []
    for t in range(trials):
        p, rk = trial_rank(arch, method, trial_rng(seed, t), prime)
        if rk > naive:
            raise ConsistencyError(f"rank {rk} exceeds the naive bound {naive} for {arch}")
        records.append(Trial(t, p, rk))
        if stop_on_filling and rk == ambient:
            break
    dim = max(tr.rank for tr in records)
    verdict = Verdict.PROVED if dim == ambient else Verdict.PROBABLY_NOT
    return DimensionEstimate(arch, dim, ambient, verdict, method, int(seed), records)
