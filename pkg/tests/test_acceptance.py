"""Acceptance criteria 1-9.

Each criterion is a function returning ``(passed, detail)``; the pytest
wrappers print one ``CRITERION n: PASS|FAIL`` line each and then assert.
Run the whole suite directly with ``python3 tests/test_acceptance.py``.

The extended depths of criterion 2 (8 and 9) take about seven minutes; set
``POLYNET_EXTENDED=0`` to skip them, which is then stated in the criterion
line.
"""

import io
import json
import os
import sys
import time
from math import comb

import numpy as np
import pytest

from polynet import algebra, cli
from polynet.algebra import QQ, random_prime
from polynet.bounds import (
    alexander_hirschowitz,
    naive_bound,
    recursive_splits,
    thm2_filling_guaranteed,
    thm2_widths,
)
from polynet.dimension import (
    dimension,
    jacobian_ff_interpolated,
    jacobian_ff_stacked,
    jacobian_symbolic,
    sample_points,
)
from polynet.network import (
    Architecture,
    apply_action,
    forward,
    forward_cp_shallow,
    forward_khatri_rao,
    random_action,
    random_weights,
    three_quadrics_coefficients,
)

EXTENDED = os.environ.get("POLYNET_EXTENDED", "1") != "0"

# Exception list exactly as published: r=2 family plus four sporadic cases.
PUBLISHED_SPORADIC = {(3, 5, 7), (4, 3, 5), (4, 4, 9), (4, 5, 15)}


def _cli(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), stdout=out)
    return code, json.loads(out.getvalue())


def _report(n, passed, detail):
    print(f"CRITERION {n}: {'PASS' if passed else 'FAIL'} - {detail}")


def criterion_1():
    start = time.perf_counter()
    code, env = _cli("reproduce", "--table", "2", "--format", "json")
    elapsed = time.perf_counter() - start
    p = env["payload"]
    bad = [(r["widths"], r["computed"], r["expected"]) for r in p["rows"] if not all(r["match"])]
    ok = code == 0 and p["cells_matched"] == 20 and elapsed < 60
    return ok, f"dimension table {p['cells_matched']}/20 cells in {elapsed:.1f}s (limit 60s){' mismatches ' + str(bad) if bad else ''}"


def criterion_2():
    start = time.perf_counter()
    code, env = _cli("reproduce", "--table", "1", "--format", "json", *(["--extended"] if EXTENDED else []))
    elapsed = time.perf_counter() - start
    parts, ok = [], True
    for row in env["payload"]["rows"]:
        ok &= row["match"]
        extra = len(row["found"]) - len(row["expected"]) if row["rule"] == "equals" else None
        note = "ok" if row["match"] else f"MISMATCH ({len(row['found'])} minimal vectors found, {extra:+d} vs listed)"
        parts.append(f"h={row['depth']} {note}")
    if EXTENDED:
        ok &= elapsed < 600
        parts.append(f"extended run {elapsed:.0f}s (limit 600s)")
    else:
        parts.append("h=8,9 skipped (POLYNET_EXTENDED=0)")
    return ok, "; ".join(parts)


def criterion_3():
    violations, checked = [], 0
    for r in (2, 3, 4):
        for d0 in range(1, 6):
            for d1 in range(1, 16):
                arch = Architecture((d0, d1, 1), r)
                dim = dimension(arch, trials=3, seed=0).dim
                expected = min(d0 * d1, comb(d0 + r - 1, r))
                listed = (r == 2 and 2 <= d1 <= d0 - 1) or (r, d0, d1) in PUBLISHED_SPORADIC
                checked += 1
                assert alexander_hirschowitz(d0, d1, r).expected == expected
                if not listed and dim != expected:
                    violations.append(f"(d0={d0},d1={d1},r={r}) dim {dim} != expected {expected}")
                if listed and not dim < expected:
                    violations.append(f"(d0={d0},d1={d1},r={r}) listed exception but dim {dim} = expected")
                if listed and r == 2 and dim != d1 * d0 - comb(d1, 2):
                    violations.append(f"(d0={d0},d1={d1},r=2) dim {dim} != d1*d0-C(d1,2)")
    detail = f"{checked} cases, {len(violations)} violations"
    if violations:
        detail += ": " + "; ".join(violations)
    return not violations, detail


def regression_corpus():
    archs = [Architecture(w, r) for w in cli.TABLE2 for r in cli.TABLE2_DEGREES]
    archs += [Architecture(w, 2) for h, rows in cli.TABLE1.items() if h <= 5 for w in rows]
    archs += [
        Architecture((2, 2, 1), 2),
        Architecture((2, 2, 3), 2),
        Architecture((2, 2, 2, 2, 1), 2),
        Architecture((2, 3, 4, 1), 2),
        Architecture((3, 2, 1), 1),
        Architecture((3, 5, 1), 4),
        Architecture((3, 4, 2), 3),
        Architecture((2, 3), 5),
    ]
    return [a for a in archs if a.n_params <= 40]


def criterion_4():
    rng = np.random.default_rng(404)
    primes = [random_prime(seed) for seed in (101, 202, 303)]
    failures, count = [], 0
    for arch in regression_corpus():
        count += 1
        w = random_weights(arch, QQ, rng, bound=9)
        sym = jacobian_symbolic(arch, w)
        sym_rank = sym.rank()
        for fld in primes:
            wp = w.to_field(fld)
            pts = sample_points(arch, fld, rng, arch.basis_size + 5)
            stacked = algebra.rank(jacobian_ff_stacked(arch, wp, pts), fld)
            interp = jacobian_ff_interpolated(arch, wp, rng)
            if not (stacked == interp.rank() == sym_rank):
                failures.append(f"{arch} mod {fld.p}: sym {sym_rank} stacked {stacked} interp {interp.rank()}")
            if not (interp.matrix == sym.reduce(fld).matrix).all():
                failures.append(f"{arch} mod {fld.p}: interpolated Jacobian differs entrywise")
    detail = f"{count} architectures x 3 primes"
    return not failures, detail + ("" if not failures else ": " + "; ".join(failures))


def random_architectures(count=50, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        h = int(rng.integers(1, 6))
        widths = tuple(int(v) for v in rng.integers(1, 7, size=h + 1))
        arch = Architecture(widths, int(rng.integers(1, 5)))
        if arch.ambient_dim <= 500:
            out.append(arch)
    return out


def criterion_5():
    cache = {}

    def dim_of(arch):
        if arch not in cache:
            cache[arch] = dimension(arch, trials=3, seed=5).dim
        return cache[arch]

    violations = []
    archs = random_architectures()
    for arch in archs:
        d = dim_of(arch)
        fiber = arch.n_params - sum(arch.internal_widths)
        if d > naive_bound(arch) or d > arch.ambient_dim or d > fiber:
            violations.append(f"{arch}: dim {d} naive {naive_bound(arch)} fiber {fiber}")
        if arch.depth >= 2:
            for k, bound in recursive_splits(arch, dim_of).items():
                if d > bound:
                    violations.append(f"{arch}: dim {d} > recursive bound {bound} at k={k}")
    depths = sorted({a.depth for a in archs})
    detail = f"{len(archs)} random architectures (depths {depths}), {len(violations)} violations"
    return not violations, detail + ("" if not violations else ": " + "; ".join(violations))


def thm2_family():
    """Threshold points of the width bound and their single-step increments."""
    out = []
    for r in (2, 3, 4):
        for d0 in (1, 2, 3):
            for dh in (1, 2, 3):
                for h in (2, 3, 4):
                    probe = Architecture((d0,) + (1,) * (h - 1) + (dh,), r)
                    if probe.ambient_dim > 300:
                        continue
                    req = thm2_widths(probe)
                    hidden = [req[h - j] for j in range(1, h)]
                    base = Architecture((d0, *hidden, dh), r)
                    out.append(base)
                    for j in range(len(hidden)):
                        bumped = list(hidden)
                        bumped[j] += 1
                        out.append(Architecture((d0, *bumped, dh), r))
    out.append(Architecture((2, 3, 4, 1), 2))
    return out


def criterion_6():
    failures, count = [], 0
    for arch in thm2_family():
        assert thm2_filling_guaranteed(arch), arch
        count += 1
        est = dimension(arch, trials=3, seed=6, stop_on_filling=True)
        if not est.filling:
            failures.append(f"{arch}: dim {est.dim} < ambient {est.ambient}")
    detail = f"{count} guaranteed architectures with ambient <= 300"
    return not failures, detail + ("" if not failures else ": " + "; ".join(failures))


def criterion_7():
    ok, parts = True, []
    for h, naive_expected, ambient_expected in ((4, 8, 9), (5, 10, 17), (6, 12, 33)):
        arch = Architecture((2,) + (2,) * (h - 1) + (1,), 2)
        est = dimension(arch, trials=3, seed=7)
        primes = {t.prime for t in est.trials}
        nonfilling = len(primes) == 3 and all(t.rank < est.ambient for t in est.trials)
        at_naive = est.dim == naive_bound(arch) == naive_expected and est.ambient == ambient_expected
        ok &= nonfilling and at_naive
        parts.append(
            f"h={h} non-filling across 3 primes: {nonfilling}; dim {est.dim} vs naive {naive_bound(arch)} "
            f"(ambient {est.ambient}){'' if at_naive else ' MISMATCH'}"
        )
    return ok, "; ".join(parts)


def criterion_8():
    rng = np.random.default_rng(808)
    failures = []
    for _ in range(20):
        d0, d1, d2, r = (int(v) for v in rng.integers(1, 5, size=4))
        arch = Architecture((d0, d1, d2), r)
        w = random_weights(arch, QQ, rng)
        if forward_cp_shallow(w.matrices[1], w.matrices[0], r, QQ) != forward(arch, w):
            failures.append(f"CP form differs on {arch}")
    arch = Architecture((2, 2, 2), 2)
    for _ in range(20):
        w = random_weights(arch, QQ, rng)
        if forward_khatri_rao(arch, w) != forward(arch, w):
            failures.append("Khatri-Rao form differs on (2,2,2)")
    for i in range(100):
        arch = Architecture((2, 3, 2), 2) if i % 2 == 0 else Architecture((2, 3, 3, 1), 3)
        w = random_weights(arch, QQ, rng)
        if forward(arch, apply_action(arch, w, random_action(arch, QQ, rng))) != forward(arch, w):
            failures.append(f"action changed the output on {arch}")
    ex2 = Architecture((2, 2, 3), 2)
    for _ in range(100):
        if algebra.determinant(three_quadrics_coefficients(random_weights(ex2, QQ, rng)), QQ) != 0:
            failures.append("three-quadrics determinant nonzero")
    detail = "20 CP, 20 Khatri-Rao, 100 actions, 100 determinants"
    return not failures, detail + ("" if not failures else ": " + "; ".join(sorted(set(failures))))


def criterion_9():
    _, a = _cli("reproduce", "--table", "2", "--seed", "0", "--format", "json")
    _, b = _cli("reproduce", "--table", "2", "--seed", "0", "--format", "json")
    ok = a["canonical_hash"] == b["canonical_hash"]
    return ok, f"hashes {a['canonical_hash'][:16]}.. and {b['canonical_hash'][:16]}.."


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    passed, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print()
        _report(n, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    failed = 0
    for n, crit in enumerate(CRITERIA, start=1):
        passed, detail = crit()
        _report(n, passed, detail)
        failed += not passed
    sys.exit(1 if failed else 0)
