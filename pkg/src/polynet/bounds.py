"""Closed-form dimension bounds and filling predicates.

Every function here is pure integer arithmetic on the architecture, except
:func:`recursive_bound`, which combines dimensions of sub-architectures
supplied by a caller-chosen oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Optional

from .network import Architecture
from .poly import MonomialBasis


def ambient_dim(arch: Architecture) -> int:
    """``d_h * binomial(d_0 + r**(h-1) - 1, r**(h-1))``; guarded like a basis."""
    MonomialBasis(arch.d0, arch.output_degree)
    return arch.ambient_dim


def parameter_bound(arch: Architecture) -> int:
    """Parameter count minus the scaling-fiber dimension (sum of hidden widths)."""
    w = arch.widths
    return w[-1] + sum((w[i - 1] - 1) * w[i] for i in range(1, len(w)))


def naive_bound(arch: Architecture) -> int:
    return min(parameter_bound(arch), arch.ambient_dim)


def exact_linear_dim(arch: Architecture) -> Optional[int]:
    """Dimension when it is known in closed form (depth one or ``r = 1``)."""
    if arch.depth == 1:
        return arch.d0 * arch.dh
    if arch.degree == 1:
        m = min(arch.widths)
        return m * (arch.d0 + arch.dh - m)
    return None


def recursive_splits(arch: Architecture, dim_oracle: Callable[[Architecture], int]) -> dict:
    """``{k: dim(d_0..d_k) + dim(d_k..d_h) - d_k}`` for every split ``1 <= k < h``."""
    if arch.depth < 2:
        raise ValueError("the recursive bound needs depth >= 2")
    return {
        k: dim_oracle(arch.prefix(k)) + dim_oracle(arch.suffix(k)) - arch.widths[k]
        for k in range(1, arch.depth)
    }


@lru_cache(maxsize=1 << 18)
def best_known_bound(arch: Architecture) -> int:
    """Upper bound on ``dim V`` from closed forms, applied recursively."""
    exact = exact_linear_dim(arch)
    if exact is not None:
        return exact
    best = naive_bound(arch)
    for value in recursive_splits(arch, best_known_bound).values():
        best = min(best, value)
    return best


def recursive_bound(arch: Architecture, dim_oracle: Optional[Callable] = None) -> int:
    """Minimum over split points of the recursive bound.

    ``dim_oracle`` maps a sub-architecture to its dimension (exact, e.g. from
    :func:`polynet.dimension.dimension`) or to an upper bound of it; by
    default the closed-form bounds are used recursively.
    """
    oracle = dim_oracle or best_known_bound
    return min(recursive_splits(arch, oracle).values())


@dataclass(frozen=True)
class AHResult:
    expected: int
    exceptional: bool
    corrected: Optional[int] = None


# Defective dimensions of the four sporadic exceptions, frozen from the
# Jacobian oracle (ff-stacked and symbolic agree); keyed by (r, d_0, d_1).
# The quartic five-variable case is defective at 14 summands: at 15 the
# oracle returns the expected value 70.
AH_SPORADIC = {
    (3, 5, 7): 34,
    (4, 3, 5): 14,
    (4, 4, 9): 34,
    (4, 5, 14): 69,
}


def ah_exceptional(d0: int, d1: int, r: int) -> bool:
    if r == 2:
        return 2 <= d1 <= d0 - 1
    return (r, d0, d1) in AH_SPORADIC


def alexander_hirschowitz(d0: int, d1: int, r: int) -> AHResult:
    """Dimension of ``(d_0, d_1, 1)`` networks: sums of ``d_1`` powers of linear forms."""
    expected = min(d0 * d1, comb(d0 + r - 1, r))
    if not ah_exceptional(d0, d1, r):
        return AHResult(expected, False)
    if r == 2:
        corrected = d1 * d0 - comb(d1, 2)
    else:
        corrected = AH_SPORADIC[(r, d0, d1)]
    return AHResult(expected, True, corrected)


def thm2_filling_guaranteed(arch: Architecture) -> bool:
    """Sufficient width condition for filling (requires ``r >= 2``).

    Layer ``h - i`` must have width at least
    ``min(d_h * r**(i * d_0), binomial(r**(h-i) + d_0 - 1, r**(h-i)))``.
    """
    return all(arch.widths[arch.depth - i] >= w for i, w in thm2_widths(arch).items())


def thm2_widths(arch: Architecture) -> dict:
    """``{i: required width of layer h - i}`` for ``i = 1..h-1``."""
    r, h, d0, dh = arch.degree, arch.depth, arch.d0, arch.dh
    if r < 2:
        raise ValueError("the filling-width bound needs r >= 2")
    out = {}
    for i in range(1, h):
        deg = r ** (h - i)
        # compare without building r**(i*d0) when it is astronomically large
        binom = comb(deg + d0 - 1, d0 - 1)
        power_bound = dh * r ** (i * d0) if i * d0 < 4096 else binom + 1
        out[i] = min(power_bound, binom)
    return out


def bottleneck_flags(arch: Architecture) -> list:
    """Hidden layers ``i`` with ``d_i <= 2 d_0 - 2`` (asymptotic bottlenecks).

    Informational: such a width makes the family non-filling once the depth is
    large enough, but it does not decide filling at this depth.
    """
    if arch.degree < 2 or arch.d0 < 2:
        return []
    limit = 2 * arch.d0 - 2
    return [i for i in range(1, arch.depth) if arch.widths[i] <= limit]


BOTTLENECK_NOTE = (
    "width 2*d_0 - 2 is always an asymptotic bottleneck; width 2*d_0 is not one "
    "only conditionally on an open conjecture, so no verdict is drawn from it"
)


@dataclass
class BoundReport:
    arch: Architecture
    ambient: int
    naive: int
    recursive_best: Optional[int]
    recursive_mode: str
    ah: Optional[AHResult]
    thm2_filling_guaranteed: Optional[bool]
    bottleneck_hits: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "widths": list(self.arch.widths),
            "degree": self.arch.degree,
            "ambient": self.ambient,
            "naive": self.naive,
            "recursive_best": self.recursive_best,
            "recursive_mode": self.recursive_mode,
            "ah": None
            if self.ah is None
            else {
                "expected": self.ah.expected,
                "exceptional": self.ah.exceptional,
                "corrected": self.ah.corrected,
            },
            "thm2_filling_guaranteed": self.thm2_filling_guaranteed,
            "bottleneck_hits": list(self.bottleneck_hits),
            "bottleneck_note": BOTTLENECK_NOTE if self.bottleneck_hits else None,
        }


def bound_report(arch: Architecture, dim_oracle: Optional[Callable] = None) -> BoundReport:
    ambient = ambient_dim(arch)
    rec = recursive_bound(arch, dim_oracle) if arch.depth >= 2 else None
    shallow_single = arch.depth == 2 and arch.dh == 1
    return BoundReport(
        arch=arch,
        ambient=ambient,
        naive=naive_bound(arch),
        recursive_best=rec,
        recursive_mode="bounded" if dim_oracle is None else "oracle",
        ah=alexander_hirschowitz(arch.d0, arch.widths[1], arch.degree) if shallow_single else None,
        thm2_filling_guaranteed=thm2_filling_guaranteed(arch) if arch.degree >= 2 else None,
        bottleneck_hits=bottleneck_flags(arch),
    )
