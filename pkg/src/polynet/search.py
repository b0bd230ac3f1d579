"""Search for minimal filling architectures, unimodality checks, dimension tables.

Filling is monotone in the widths: if ``d`` fills its ambient space then so
does every ``d' >= d`` (coordinatewise), since zero weights embed the smaller
network in the larger one.  The search keeps a dense state array over the box
of hidden widths ``1 <= d_i <= cap_i`` and resolves it with as few oracle calls
as it can:

* candidates with ``naive_bound < ambient`` are certified non-filling, and
  so is any probed point whose closed-form recursive bound is below the
  ambient dimension (no oracle call is spent on it);
* a filling point marks its whole up-set filling, a non-filling point its
  whole down-set non-filling;
* after a non-filling answer the point is grown greedily to a maximal
  non-filling point, so large down-sets are settled early;
* candidates are visited by increasing total width, so the first filling
  answer at an undominated point is a minimal filling architecture.

Two exact reductions skip points that cannot be minimal: a hidden width
above ``binomial(d_{i-1} + r - 1, r)`` (the dimension of degree-``r`` forms in
the previous layer's outputs) adds nothing, and for ``r = 2`` neither does a
width above ``d_{i-1} * d_{i+1}`` (every quadratic form is a sum of ``d_{i-1}``
signed squares).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .bounds import best_known_bound, naive_bound, thm2_widths
from .dimension import DimensionEstimate, dimension
from .errors import BudgetExceeded
from .network import Architecture

log = logging.getLogger(__name__)

UNKNOWN, NONFILL, FILL, PENDING, MINIMAL = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class SearchSpec:
    depth: int
    d0: int
    dh: int
    degree: int
    width_cap: Optional[tuple] = None  # per hidden layer; None -> filling-width bound
    budget: Optional[int] = None  # max oracle calls
    trials: int = 3
    seed: int = 0
    method: str = "ff-stacked"

    def caps(self) -> tuple:
        if self.width_cap is not None:
            caps = tuple(int(c) for c in self.width_cap)
            if len(caps) != self.depth - 1:
                raise ValueError("width_cap needs one entry per hidden layer")
            return caps
        probe = Architecture((self.d0,) + (1,) * (self.depth - 1) + (self.dh,), self.degree)
        required = thm2_widths(probe)
        return tuple(required[self.depth - j] for j in range(1, self.depth))

    def arch(self, hidden) -> Architecture:
        return Architecture((self.d0, *map(int, hidden), self.dh), self.degree)


@dataclass
class MinimalRecord:
    widths: tuple
    estimate: DimensionEstimate
    neighbors: list  # (widths, dim, evidence) per single-coordinate decrement

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "certification": self.estimate.is_filling.value,
            "dim": self.estimate.dim,
            "ambient": self.estimate.ambient,
            "trial_primes": [str(t.prime) for t in self.estimate.trials],
            "decrements": [
                {"widths": list(w), "dim": d, "evidence": ev} for w, d, ev in self.neighbors
            ],
        }


@dataclass
class MinimalFillingSet:
    spec: SearchSpec
    caps: tuple
    records: list = field(default_factory=list)
    complete: bool = True
    oracle_calls: int = 0
    box_size: int = 0
    pruned: int = 0
    bound_certified: int = 0

    @property
    def architectures(self) -> list:
        return [r.widths for r in self.records]

    def to_dict(self) -> dict:
        return {
            "depth": self.spec.depth,
            "d0": self.spec.d0,
            "dh": self.spec.dh,
            "degree": self.spec.degree,
            "caps": list(self.caps),
            "complete": self.complete,
            "oracle_calls": self.oracle_calls,
            "box_size": self.box_size,
            "pruned_by_naive_bound": self.pruned,
            "certified_by_recursive_bound": self.bound_certified,
            "minimal": [r.to_dict() for r in self.records],
        }


def bound_certifies_nonfilling(arch: Architecture) -> bool:
    """True when a proven upper bound on the dimension is below the ambient one."""
    return best_known_bound(arch) < arch.ambient_dim


class _Oracle:
    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self.calls = 0
        self.cache = {}
        self.bound_certified = 0

    def certified_nonfilling(self, hidden) -> bool:
        if bound_certifies_nonfilling(self.spec.arch(hidden)):
            self.bound_certified += 1
            return True
        return False

    def __call__(self, hidden) -> DimensionEstimate:
        key = tuple(int(v) for v in hidden)
        if key not in self.cache:
            if self.spec.budget is not None and self.calls >= self.spec.budget:
                raise BudgetExceeded(f"oracle budget of {self.spec.budget} calls exhausted")
            self.calls += 1
            self.cache[key] = dimension(
                self.spec.arch(key),
                method=self.spec.method,
                trials=self.spec.trials,
                seed=self.spec.seed,
                stop_on_filling=True,
            )
        return self.cache[key]


def _box_grids(caps):
    return list(np.meshgrid(*[np.arange(1, c + 1) for c in caps], indexing="ij"))


def _candidate_mask(spec: SearchSpec, caps) -> tuple:
    """(points that may be minimal, points certified non-filling by the naive bound)."""
    grids = _box_grids(caps)
    widths = [np.full(grids[0].shape, spec.d0)] + grids + [np.full(grids[0].shape, spec.dh)]
    r = spec.degree
    param = widths[-1].astype(np.int64)
    for i in range(1, len(widths)):
        param = param + (widths[i - 1] - 1) * widths[i]
    ambient = spec.arch([1] * (spec.depth - 1)).ambient_dim
    certified_non = param < ambient
    candidate = np.ones(grids[0].shape, dtype=bool)
    for i in range(1, len(widths) - 1):
        prev = widths[i - 1]
        room = np.vectorize(lambda d: comb(int(d) + r - 1, r))(prev) if r > 1 else prev
        candidate &= widths[i] <= room
        if r == 2:
            candidate &= widths[i] <= widths[i - 1] * widths[i + 1]
    return candidate, certified_non


def _upset(idx):
    return tuple(slice(i, None) for i in idx)


def _downset(idx):
    return tuple(slice(0, i + 1) for i in idx)


def find_minimal_filling(spec: SearchSpec, shuffle_seed: Optional[int] = None) -> MinimalFillingSet:
    """All coordinatewise-minimal filling hidden-width vectors inside the box.

    ``shuffle_seed`` randomises the traversal among equal-sum candidates and
    the growth order; the returned set does not depend on it.
    Raises :class:`BudgetExceeded` (with the partial set attached) when the
    oracle budget runs out.
    """
    if spec.depth < 2:
        raise ValueError("search needs at least one hidden layer")
    caps = spec.caps()
    oracle = _Oracle(spec)
    candidate, certified_non = _candidate_mask(spec, caps)
    state = np.zeros(candidate.shape, dtype=np.int8)
    state[certified_non] = NONFILL
    sums = sum(_box_grids(caps))
    result = MinimalFillingSet(spec, caps, box_size=int(state.size), pruned=int(certified_non.sum()))
    rng = np.random.default_rng(shuffle_seed) if shuffle_seed is not None else None

    flat = np.flatnonzero((candidate & ~certified_non).ravel())
    if rng is not None:
        flat = flat[rng.permutation(flat.size)]
    order = flat[np.argsort(sums.ravel()[flat], kind="stable")]
    coord_order = list(range(len(caps)))

    def mark_filling(idx):
        view = state[_upset(idx)]
        view[(view == UNKNOWN) | (view == PENDING)] = FILL
        if state[idx] == FILL:
            state[idx] = PENDING

    def mark_nonfilling(idx):
        view = state[_downset(idx)]
        view[view != NONFILL] = NONFILL

    def probe(idx) -> bool:
        s = state[idx]
        if s in (FILL, PENDING, MINIMAL):
            return True
        if s == NONFILL:
            return False
        hidden = tuple(int(i) + 1 for i in idx)
        filling = not oracle.certified_nonfilling(hidden) and oracle(hidden).filling
        (mark_filling if filling else mark_nonfilling)(idx)
        return filling

    def grow(idx):
        """Extend a non-filling point to a maximal non-filling one."""
        cur = list(idx)
        order_j = list(coord_order)
        if rng is not None:
            rng.shuffle(order_j)
        for j in order_j:
            lo, hi = cur[j], caps[j] - 1
            while lo < hi:
                mid = (lo + hi + 1) // 2
                trial = tuple(cur[:j] + [mid] + cur[j + 1:])
                if probe(trial):
                    hi = mid - 1
                else:
                    lo = mid
            cur[j] = lo
        return tuple(cur)

    try:
        for flat_idx in order:
            idx = np.unravel_index(flat_idx, state.shape)
            idx = tuple(int(i) for i in idx)
            s = state[idx]
            if s in (NONFILL, FILL, MINIMAL):
                continue
            if s == PENDING or probe(idx):
                state[idx] = MINIMAL
                view = state[_upset(idx)]
                view[(view == UNKNOWN) | (view == PENDING)] = FILL
                state[idx] = MINIMAL
                continue
            grow(idx)
    except BudgetExceeded as exc:
        result.complete = False
        result.oracle_calls = oracle.calls
        result.bound_certified = oracle.bound_certified
        result.records = _records(spec, state, oracle, verify=False)
        exc.partial = result
        raise

    result.records = _records(spec, state, oracle, verify=True)
    result.oracle_calls = oracle.calls
    result.bound_certified = oracle.bound_certified
    return result


def _records(spec, state, oracle, verify: bool) -> list:
    minimal = [tuple(int(v) + 1 for v in idx) for idx in zip(*np.nonzero(state == MINIMAL))]
    minimal.sort(key=lambda w: (sum(w), w))
    records = []
    for hidden in minimal:
        est = oracle.cache.get(hidden)
        if est is None:
            est = dimension(spec.arch(hidden), method=spec.method, trials=spec.trials, seed=spec.seed, stop_on_filling=True)
        neighbors = _decrement_evidence(spec, hidden) if verify else []
        records.append(MinimalRecord(spec.arch(hidden).widths, est, neighbors))
    return records


def _decrement_evidence(spec: SearchSpec, hidden) -> list:
    """Check that every single-coordinate decrement is non-filling."""
    out = []
    for j, v in enumerate(hidden):
        if v <= 1:
            continue
        lower = list(hidden)
        lower[j] -= 1
        arch = spec.arch(lower)
        if naive_bound(arch) < arch.ambient_dim:
            out.append((arch.widths, naive_bound(arch), "naive-bound"))
            continue
        if bound_certifies_nonfilling(arch):
            out.append((arch.widths, best_known_bound(arch), "recursive-bound"))
            continue
        est = dimension(arch, method=spec.method, trials=spec.trials, seed=spec.seed)
        if est.filling:
            raise AssertionError(f"decrement {arch} of a minimal point is filling")
        out.append((arch.widths, est.dim, f"rank-deficient in {len(est.trials)} trials"))
    return out


def is_unimodal(widths) -> bool:
    return _valley(widths) is None


def _valley(widths) -> Optional[int]:
    w = list(widths)
    descending = False
    for i in range(1, len(w)):
        if w[i] < w[i - 1]:
            descending = True
        elif w[i] > w[i - 1] and descending:
            return i - 1
    return None


def check_unimodality(architectures) -> list:
    """Width vectors that are not weakly increasing then weakly decreasing.

    Returns ``(widths, valley_index)`` pairs; the valley index is the first
    position after a descent from which the widths rise again.
    """
    out = []
    for widths in architectures:
        widths = getattr(widths, "widths", widths)
        v = _valley(widths)
        if v is not None:
            out.append((tuple(widths), v))
    return out


@dataclass
class DimensionTable:
    rows: list  # width tuples
    degrees: list
    cells: dict  # (widths, r) -> DimensionEstimate

    def values(self) -> list:
        return [[self.cells[(w, r)].dim for r in self.degrees] for w in self.rows]

    def to_dict(self) -> dict:
        return {
            "degrees": list(self.degrees),
            "rows": [
                {
                    "widths": list(w),
                    "dims": [self.cells[(w, r)].dim for r in self.degrees],
                    "cells": [self.cells[(w, r)].to_dict() for r in self.degrees],
                }
                for w in self.rows
            ],
        }

    def to_csv(self) -> str:
        lines = ["widths," + ",".join(f"r={r}" for r in self.degrees)]
        for w, vals in zip(self.rows, self.values()):
            lines.append('"' + ",".join(map(str, w)) + '",' + ",".join(map(str, vals)))
        return "\n".join(lines) + "\n"


def dimension_table(archs, degrees, method: str = "ff-stacked", trials: int = 3, seed: int = 0) -> DimensionTable:
    rows = [tuple(a) for a in archs]
    cells = {}
    for w in rows:
        for r in degrees:
            cells[(w, r)] = dimension(Architecture(w, r), method=method, trials=trials, seed=seed)
    return DimensionTable(rows, list(degrees), cells)
