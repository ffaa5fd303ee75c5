import numpy as np
import pytest

from sthawkes import (
    HawkesParams,
    chain_softplus,
    finite_diff,
    grad_all,
    grad_raw,
    nll,
    sample_basis,
)
from sthawkes.cli import gradcheck_instance
from sthawkes.gradients import BLOCK_NAMES, nll_and_grad
from sthawkes.reparam import params_to_raw, raw_to_params, softplus_deriv
from tests.conftest import random_params, random_sequence

S = 0.01


def block_errors(analytic, numeric):
    out = {}
    for name in BLOCK_NAMES:
        a = np.atleast_1d(getattr(analytic, name))
        f = np.atleast_1d(getattr(numeric, name))
        out[name] = np.abs(a - f).max() / max(np.abs(f).max(), 1e-12)
    return out


class TestGradAll:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences(self, seed):
        seq, raw = gradcheck_instance(seed)
        basis = sample_basis(10, seed)
        _, analytic = grad_raw(seq, seq, raw, basis, S)
        numeric = finite_diff(seq, seq, raw, basis, S, h=1e-5)
        errs = block_errors(analytic, numeric)
        assert max(errs.values()) <= 1e-5, errs

    def test_value_matches_nll(self):
        seq, raw = gradcheck_instance(1)
        basis = sample_basis(10, 1)
        params = raw_to_params(raw, S)
        value, _ = nll_and_grad(seq, seq, params, basis)
        assert value == pytest.approx(nll(seq, seq, params, basis=basis), rel=1e-12)

    def test_compensator_excitation_block(self):
        # Background compensator derivative counts source-type events,
        # repeated down each target column.
        seq = random_sequence(30, n=5, u_count=2)
        seq = type(seq)(times=seq.times, locations=seq.locations,
                        types=np.zeros(5, dtype=np.int64), num_types=2,
                        duration=seq.duration, domain=seq.domain)
        params = random_params(30)
        basis = sample_basis(6, 0)
        g = grad_all(seq, seq, params, basis)
        # isolate the compensator part of d_k_mu
        bm_term = g.d_k_mu
        from sthawkes.intensity import intensity_matrix

        bm = intensity_matrix(seq, seq, params, basis)
        r = np.zeros((5, 2))
        r[np.arange(5), seq.types] = 1.0 / bm.a_sel
        comp = bm_term + bm.q_mu.T @ r
        assert np.allclose(comp[0], 5.0)
        assert np.allclose(comp[1], 0.0)

    def test_zero_triggering_decay_block(self):
        seq = random_sequence(31, n=40)
        p = random_params(31)
        params0 = HawkesParams(
            k_mu=p.k_mu, k_gamma=np.zeros_like(p.k_gamma), w=p.w,
            cov_mu=p.cov_mu, cov_gamma=p.cov_gamma)
        basis = sample_basis(8, 2)
        g = grad_all(seq, seq, params0, basis)
        assert np.allclose(g.d_w, 0.0)
        assert np.allclose(g.d_v_gamma, 0.0)
        assert np.allclose(g.d_l_gamma, 0.0)
        assert not np.allclose(g.d_k_gamma, 0.0)

    def test_batch_sum_consistency(self):
        # Log terms add over a partition; compensators telescope; the
        # background-normalization term is shared. Gradients therefore add.
        seq = random_sequence(32, n=40)
        params = random_params(32)
        basis = sample_basis(8, 3)
        whole = grad_all(seq.slice_window(0, 40), seq, params, basis)
        part1 = grad_all(seq.slice_window(0, 17), seq, params, basis)
        part2 = grad_all(seq.slice_window(17, 40), seq, params, basis)
        for name in BLOCK_NAMES:
            lhs = getattr(part1, name) + getattr(part2, name)
            rhs = getattr(whole, name)
            assert np.allclose(lhs, rhs, rtol=1e-8, atol=1e-10), name

    def test_descent_property(self):
        from sthawkes import NumericalError

        fails = 0
        valid = 0
        trial = 0
        while valid < 100:
            trial += 1
            seq = random_sequence(trial + 100, n=30)
            raw = params_to_raw(random_params(trial + 100), S)
            basis = sample_basis(8, trial)
            try:
                v0, g = grad_raw(seq, seq, raw, basis, S)
            except NumericalError:
                continue  # feature noise made the instance unscoreable
            valid += 1
            eta = 1e-6
            stepped = raw.replace(
                raw_k_mu=raw.raw_k_mu - eta * g.d_k_mu,
                raw_k_gamma=raw.raw_k_gamma - eta * g.d_k_gamma,
                raw_w=raw.raw_w - eta * g.d_w,
                v_mu=raw.v_mu - eta * g.d_v_mu,
                v_gamma=raw.v_gamma - eta * g.d_v_gamma,
                raw_l_mu=raw.raw_l_mu - eta * g.d_l_mu,
                raw_l_gamma=raw.raw_l_gamma - eta * g.d_l_gamma,
            )
            v1, _ = grad_raw(seq, seq, stepped, basis, S, barrier=1e-9)
            if v1 > v0:
                fails += 1
        assert fails == 0


class TestFiniteDiff:
    def test_quadratic_exactness(self):
        # Central differences are exact for quadratics up to round-off.
        h = 1e-4
        f = lambda x: 3.0 * x * x + 2.0 * x + 1.0
        grad = (f(0.7 + h) - f(0.7 - h)) / (2 * h)
        assert grad == pytest.approx(6.0 * 0.7 + 2.0, abs=1e-8)

    def test_halving_h_shrinks_disagreement(self):
        seq, raw = gradcheck_instance(2)
        basis = sample_basis(10, 2)
        _, analytic = grad_raw(seq, seq, raw, basis, S)

        def disagreement(h):
            numeric = finite_diff(seq, seq, raw, basis, S, h=h)
            return max(block_errors(analytic, numeric).values())

        d_coarse = disagreement(2e-3)
        d_fine = disagreement(1e-3)
        # Second-order convergence: ratio near 4 while above round-off.
        assert d_fine < d_coarse
        assert d_coarse / d_fine == pytest.approx(4.0, rel=0.5)

    def test_rejects_bad_step(self):
        seq, raw = gradcheck_instance(0)
        with pytest.raises(ValueError):
            finite_diff(seq, seq, raw, sample_basis(4, 0), S, h=0.0)


class TestChainSoftplus:
    def test_identity_region(self):
        assert chain_softplus(np.array([2.0]), np.array([1e7]), 0.01)[0] == \
            pytest.approx(2.0)

    def test_half_at_zero(self):
        assert chain_softplus(np.array([3.0]), np.array([0.0]), 0.3)[0] == \
            pytest.approx(1.5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            chain_softplus(np.zeros((2, 2)), np.zeros(3), 0.01)

    def test_composite_matches_raw_finite_differences(self):
        seq, raw = gradcheck_instance(3)
        basis = sample_basis(10, 3)
        params = raw_to_params(raw, S)
        constrained = grad_all(seq, seq, params, basis)
        chained = chain_softplus(constrained.d_k_mu, raw.raw_k_mu, S)
        numeric = finite_diff(seq, seq, raw, basis, S, h=1e-5)
        assert np.allclose(chained, numeric.d_k_mu, rtol=1e-5, atol=1e-8)

    def test_derivative_values(self):
        assert softplus_deriv(0.0, 1.0) == pytest.approx(0.5)
        assert softplus_deriv(50.0, 1.0) == pytest.approx(1.0)
        assert softplus_deriv(-1e4, 0.01) == pytest.approx(0.0, abs=1e-10)


class TestBarrierMode:
    def test_censored_events_drop_out(self):
        seq, raw = gradcheck_instance(4)
        basis = sample_basis(10, 4)
        params = raw_to_params(raw, S)
        v_strict, g_strict = nll_and_grad(seq, seq, params, basis)
        # With a barrier below every intensity, nothing changes.
        v_b, g_b = nll_and_grad(seq, seq, params, basis, barrier=1e-9)
        assert v_b == pytest.approx(v_strict)
        for name in BLOCK_NAMES:
            assert np.allclose(getattr(g_b, name), getattr(g_strict, name))

    def test_barrier_keeps_value_finite(self):
        seq = random_sequence(40, n=40)
        params = random_params(40, l_mu=(0.002, 0.002), l_gamma=(0.002, 0.002))
        basis = sample_basis(5, 0)
        v, g = nll_and_grad(seq, seq, params, basis, barrier=1e-2)
        assert np.isfinite(v)
        g.assert_finite()
