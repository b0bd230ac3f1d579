"""Jacobian engines and the rank-based dimension oracle."""

import json
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polynet import algebra
from polynet.algebra import QQ, PrimeField, random_prime
from polynet.bounds import naive_bound
from polynet.dimension import (
    Verdict,
    dimension,
    jacobian_ff_interpolated,
    jacobian_ff_stacked,
    jacobian_ring,
    jacobian_symbolic,
    point_gradients,
    sample_points,
    samples_are_degenerate,
)
from polynet.errors import BadPrime, ConsistencyError, DegenerateSamples
from polynet.network import Architecture, Weights, forward, random_weights
from polynet.poly import MonomialBasis, monomial_eval_matrix

F = PrimeField(1_000_003)

SMALL_ARCHS = [
    Architecture((2, 2, 3), 2),
    Architecture((3, 2, 1), 2),
    Architecture((2, 3, 2), 3),
    Architecture((2, 2, 2, 1), 2),
    Architecture((2, 3, 2, 3), 2),
    Architecture((3, 2, 2), 3),
]


def lagrange_jacobian(arch, weights):
    """Reference Jacobian over QQ from exact interpolation in each weight.

    ``t -> forward(theta + t e_j)`` is a polynomial of degree at most
    ``r**(h-1)`` in ``t``; its derivative at 0 comes from Lagrange weights.
    """
    flat = weights.flat()
    ts = list(range(arch.degree ** (arch.depth - 1) + 1))
    # l_i'(0) for the Lagrange basis on the nodes ts
    dweights = []
    for ti in ts:
        others = [tk for tk in ts if tk != ti]
        denom = np.prod([ti - tk for tk in others], dtype=object)
        num = sum(np.prod([-tk for tk in others if tk != m], dtype=object) for m in others)
        dweights.append(Fraction(int(num), int(denom)))
    cols = []
    for j in range(len(flat)):
        col = 0
        for t, lw in zip(ts, dweights):
            v = flat.copy()
            v[j] = v[j] + t
            col = col + lw * forward(arch, Weights.from_flat(arch, v, QQ)).coeffs.ravel()
        cols.append(col)
    return np.stack(cols, axis=1)


class TestSymbolic:
    def test_depth_one_is_constant_embedding(self, rng):
        a = Architecture((3, 2), 5)
        jac = jacobian_symbolic(a, random_weights(a, QQ, rng))
        assert jac.matrix.shape == (6, 6)
        assert (jac.matrix == np.eye(6, dtype=int)).all()
        assert jac.rank() == 6

    def test_matches_interpolated_derivative(self, rng):
        a = Architecture((2, 2, 2), 2)
        w = random_weights(a, QQ, rng, bound=5)
        ref = lagrange_jacobian(a, w)
        assert (jacobian_symbolic(a, w).matrix == ref).all()

    def test_table_values(self, rng):
        a = Architecture((3, 2, 1), 2)
        assert jacobian_symbolic(a, random_weights(a, QQ, rng)).rank() == 5
        a = Architecture((2, 3, 2), 3)
        assert jacobian_symbolic(a, random_weights(a, QQ, rng)).rank() == 8

    def test_zero_weights(self):
        a = Architecture((2, 2, 1), 2)
        w = Weights((QQ.zeros((2, 2)), QQ.zeros((1, 2))), QQ)
        assert jacobian_symbolic(a, w).rank() == 0


class TestStacked:
    def test_zero_weights(self, rng):
        a = Architecture((2, 3, 1), 2)
        w = Weights((F.zeros((3, 2)), F.zeros((1, 3))), F)
        pts = sample_points(a, F, rng, a.basis_size + 5)
        assert not jacobian_ff_stacked(a, w, pts).any()

    def test_rank_value(self, rng):
        a = Architecture((2, 3, 2, 3), 2)
        fld = random_prime(7)
        w = random_weights(a, fld, rng)
        pts = sample_points(a, fld, rng, a.basis_size + 5)
        assert algebra.rank(jacobian_ff_stacked(a, w, pts), fld) == 10

    def test_too_few_points(self, rng):
        a = Architecture((2, 3, 1), 2)
        w = random_weights(a, F, rng)
        with pytest.raises(DegenerateSamples):
            jacobian_ff_stacked(a, w, sample_points(a, F, rng, 2))

    def test_bad_prime(self, rng):
        a = Architecture((2, 3, 1), 2)
        f = PrimeField(2)
        with pytest.raises(BadPrime):
            point_gradients(a, random_weights(a, f, rng), f.random(rng, (4, 2)))

    def test_gradients_are_jacobian_times_monomials(self, rng):
        a = Architecture((2, 3, 2), 2)
        w = random_weights(a, F, rng)
        pts = sample_points(a, F, rng, 4)
        v = monomial_eval_matrix(MonomialBasis(2, 2), pts, F)
        jac = jacobian_ring(a, w).matrix.reshape(2, 3, -1)
        g = point_gradients(a, w, pts).reshape(2, 4, -1)
        for k in range(2):
            assert (F.matmul(v, jac[k]) == g[k]).all()

    @pytest.mark.parametrize("arch", SMALL_ARCHS, ids=str)
    def test_rank_matches_symbolic_mod_p(self, rng, arch):
        w = random_weights(arch, QQ, rng)
        sym = jacobian_symbolic(arch, w)
        for seed in range(3):
            fld = random_prime(seed)
            pts = sample_points(arch, fld, rng, arch.basis_size + 5)
            stacked = jacobian_ff_stacked(arch, w.to_field(fld), pts)
            assert algebra.rank(stacked, fld) == sym.reduce(fld).rank()


class TestDegeneracy:
    def test_duplicate_points(self, rng):
        a = Architecture((2, 2, 1), 2)
        pts = F.random(rng, (3, 2))
        assert not samples_are_degenerate(a, F, pts)
        pts[1] = pts[0] * 5 % F.p
        assert samples_are_degenerate(a, F, pts)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.sampled_from([2, 3]))
    def test_binary_shortcut_matches_rank(self, seed, m, degree):
        rng = np.random.default_rng(seed)
        f = PrimeField(7)
        a = Architecture((2, 2, 1), degree)
        pts = f.random(rng, (m, 2))
        basis = MonomialBasis(2, a.output_degree)
        deficient = algebra.rank(monomial_eval_matrix(basis, pts, f), f) < len(basis)
        assert samples_are_degenerate(a, f, pts) == deficient

    def test_three_variables_use_rank(self, rng):
        a = Architecture((3, 2, 1), 2)
        pts = F.random(rng, (6, 3))
        assert not samples_are_degenerate(a, F, pts)
        pts[:, 2] = 0
        assert samples_are_degenerate(a, F, pts)


class TestInterpolated:
    def test_entrywise_equals_symbolic(self, rng):
        a = Architecture((2, 2, 3), 2)
        w = random_weights(a, QQ, rng)
        sym = jacobian_symbolic(a, w)
        for seed in range(3):
            fld = random_prime(seed)
            interp = jacobian_ff_interpolated(a, w.to_field(fld), rng)
            assert (interp.matrix == sym.reduce(fld).matrix).all()

    def test_depth_one(self, rng):
        a = Architecture((2, 3), 4)
        interp = jacobian_ff_interpolated(a, random_weights(a, F, rng), rng)
        assert (interp.matrix == np.eye(6, dtype=np.int64)).all()

    def test_rank_value(self, rng):
        a = Architecture((2, 3, 2, 3, 4), 6)
        fld = random_prime(11)
        assert jacobian_ff_interpolated(a, random_weights(a, fld, rng), rng).rank() == 22


class TestDimension:
    def test_filling_example(self):
        est = dimension(Architecture((2, 2, 2, 1), 2))
        assert est.dim == est.ambient == 5
        assert est.is_filling is Verdict.PROVED and est.filling

    def test_not_filling_example(self):
        a = Architecture((2, 2, 2, 2, 1), 2)
        est = dimension(a, trials=3)
        assert est.dim <= naive_bound(a) == 8 < est.ambient == 9
        assert est.is_filling is Verdict.PROBABLY_NOT

    def test_table_value(self):
        assert dimension(Architecture((3, 2, 1), 4)).dim == 6

    @pytest.mark.parametrize("method", ["ff-stacked", "ff-interp", "symbolic"])
    def test_engines_agree(self, method):
        assert dimension(Architecture((2, 3, 2), 3), method=method).dim == 8

    def test_dim_is_max_of_trials(self):
        est = dimension(Architecture((2, 3, 2, 3), 3), trials=4, seed=5)
        assert est.dim == max(t.rank for t in est.trials)
        assert len({t.prime for t in est.trials}) == 4

    def test_reproducible(self):
        a = Architecture((2, 3, 2), 2)
        one = dimension(a, seed=9).to_dict()
        assert one == dimension(a, seed=9).to_dict()
        assert json.loads(json.dumps(one)) == one
        assert all(isinstance(t["field"], str) for t in one["trials"])

    def test_explicit_prime(self):
        est = dimension(Architecture((2, 2, 1), 3), prime=1_000_003)
        assert {t.prime for t in est.trials} == {1_000_003}
        with pytest.raises(BadPrime):
            dimension(Architecture((2, 2, 1), 3), prime=3)

    def test_stop_on_filling(self):
        est = dimension(Architecture((2, 2, 2, 1), 2), trials=5, stop_on_filling=True)
        assert len(est.trials) == 1

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            dimension(Architecture((2, 2, 1), 2), trials=0)
        with pytest.raises(ValueError):
            dimension(Architecture((2, 2, 1), 2), method="numeric")

    def test_rank_above_naive_bound_is_an_error(self, monkeypatch):
        dim_mod = sys.modules["polynet.dimension"]
        monkeypatch.setattr(dim_mod, "trial_rank", lambda *a, **k: (7, 10**6))
        with pytest.raises(ConsistencyError):
            dimension(Architecture((2, 2, 1), 2))

    @settings(max_examples=15, deadline=None)
    @given(
        st.lists(st.integers(1, 3), min_size=3, max_size=4),
        st.integers(2, 3),
        st.integers(0, 1000),
    )
    def test_trust_monotone_in_trials(self, widths, r, seed):
        a = Architecture(tuple(widths), r)
        ranks = [dimension(a, trials=t, seed=seed).dim for t in (1, 2, 3)]
        assert ranks == sorted(ranks)
        assert ranks[-1] <= min(naive_bound(a), a.n_params - sum(a.internal_widths) if a.depth > 1 else a.n_params)

    def test_degree_stabilization(self):
        dims = [dimension(Architecture((2, 3, 2), r)).dim for r in range(2, 7)]
        assert dims == [6, 8, 9, 9, 9]
