import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaydoppler import model
from delaydoppler.model import (DelayDoppler, ModelError, ProbingLaw, ProblemConfig, SupportSet, add_noise,
                                atom, continuous_oracle, dirichlet, draw_inputs, gabor_matrix, synthesize)

# 5-term direct complex sum for t=0.1, N=2, computed independently and frozen
DIRICHLET_0P1_N2 = 0.647213595499958


def brute_dirichlet(t, N):
    L = 2 * N + 1
    return sum(complex(math.cos(2 * math.pi * t * k), math.sin(2 * math.pi * t * k)) for k in range(-N, N + 1)) / L


def brute_inverse_dft(N, r):
    """Double sum for [F^H f]_(k,l) with f_(m,n) = exp(-i 2 pi (m nu + n tau))."""
    L = 2 * N + 1
    tau, nu = r
    idx = range(-N, N + 1)
    out = []
    for k in idx:
        for l in idx:
            acc = 0j
            for m in idx:
                for n in idx:
                    acc += np.exp(2j * np.pi * (m * k + n * l) / L) * np.exp(-2j * np.pi * (m * nu + n * tau))
            out.append(acc / L**2)
    return np.array(out)


class TestDirichlet:
    def test_origin_is_one(self):
        for N in (1, 3, 8):
            assert dirichlet(0.0, N) == pytest.approx(1.0, abs=1e-14)

    def test_zero_at_grid_point(self):
        assert abs(dirichlet(1 / 3, 1)) < 1e-14

    def test_frozen_value(self):
        assert brute_dirichlet(0.1, 2).real == pytest.approx(DIRICHLET_0P1_N2, abs=1e-13)
        assert dirichlet(0.1, 2) == pytest.approx(DIRICHLET_0P1_N2, abs=1e-6)

    def test_order_too_high(self):
        with pytest.raises(ModelError):
            dirichlet(0.2, 3, order=4)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivatives_match_finite_difference(self, order):
        h = 1e-5
        t = np.array([0.03, 0.17, 0.41, 0.77])
        fd = (dirichlet(t + h, 4, order - 1) - dirichlet(t - h, 4, order - 1)) / (2 * h)
        np.testing.assert_allclose(dirichlet(t, 4, order), fd, rtol=1e-4, atol=1e-6 * 10**order)

    @given(st.floats(-3, 3), st.integers(1, 6))
    def test_periodic(self, t, N):
        assert dirichlet(t, N) == pytest.approx(dirichlet(t + 1.0, N), abs=1e-10)


class TestAtom:
    def test_origin_indicator(self):
        a = atom((0.0, 0.0), 3)
        e = np.zeros(49)
        e[24] = 1
        np.testing.assert_allclose(a, e, atol=1e-13)

    def test_grid_shift_indicator(self):
        N, L = 3, 7
        k0, l0 = 2, -1
        a = atom((l0 / L % 1, k0 / L % 1), N)
        idx = (k0 + N) * L + (l0 + N)
        e = np.zeros(L * L)
        e[idx] = 1
        np.testing.assert_allclose(a, e, atol=1e-12)

    def test_matches_brute_force_inverse_dft(self, rng):
        for N in (2, 3):
            r = tuple(rng.random(2))
            np.testing.assert_allclose(atom(r, N), brute_inverse_dft(N, r), atol=1e-10)

    def test_dft_factorization_many(self, rng):
        for N in (2, 3, 4):
            FH = model.dft2_matrix(N).conj().T
            for _ in range(100 // 3 + 1):
                r = rng.random(2)
                assert np.linalg.norm(atom(r, N) - FH @ model.steering(r, N)) <= 1e-9

    @given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
    @settings(max_examples=30)
    def test_periodicity(self, tau, nu):
        a = atom((tau, nu), 2)
        np.testing.assert_allclose(a, atom((tau + 1, nu), 2), atol=1e-10)
        np.testing.assert_allclose(a, atom((tau, nu + 1), 2), atol=1e-10)


class TestGabor:
    def test_impulse(self):
        N, L = 2, 5
        x = np.zeros(L, complex)
        x[N] = 1  # x_0
        G = gabor_matrix(x)
        for p in range(-N, N + 1):
            row = G[p + N].reshape(L, L)  # (k, l)
            for k in range(-N, N + 1):
                for l in range(-N, N + 1):
                    want = np.exp(2j * np.pi * k * p / L) if l == p else 0
                    assert row[k + N, l + N] == pytest.approx(want, abs=1e-13)

    def test_all_ones_unit_modulus(self):
        G = gabor_matrix(np.ones(7))
        np.testing.assert_allclose(np.abs(G), 1.0, atol=1e-13)

    def test_even_length_rejected(self):
        with pytest.raises(ModelError):
            gabor_matrix(np.ones(4))

    def test_shift_modulate_oracle(self, rng):
        N, L = 3, 7
        x = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        k0, l0 = -2, 1
        y = gabor_matrix(x) @ atom((l0 / L % 1, k0 / L % 1), N)
        for p in range(-N, N + 1):
            q = (p - l0 + N) % L - N  # periodic reduction
            assert y[p + N] == pytest.approx(x[q + N] * np.exp(2j * np.pi * k0 * p / L), abs=1e-11)


class TestSynthesis:
    def test_empty_support(self):
        cfg = ProblemConfig(N=2, R=3, s=0)
        ens = synthesize(cfg, SupportSet.from_pairs([]), np.zeros((0, 3)), np.ones(5))
        assert not ens.X.any() and not ens.Y.any()

    def test_single_on_grid_source(self, rng):
        N, L = 2, 5
        cfg = ProblemConfig(N=N, R=2, s=1)
        x = rng.standard_normal(L) + 0j
        ens = synthesize(cfg, SupportSet.from_pairs([(1 / L, 2 / L)]), np.array([[1.0, 0.0]]), x)
        expect = gabor_matrix(x) @ atom((1 / L, 2 / L), N)
        np.testing.assert_allclose(ens.Y[:, 0], expect, atol=1e-12)
        np.testing.assert_allclose(ens.Y[:, 1], 0, atol=1e-14)

    def test_zero_row_rejected(self):
        cfg = ProblemConfig(N=2, R=2, s=1)
        with pytest.raises(ModelError):
            synthesize(cfg, SupportSet.from_pairs([(0.1, 0.2)]), np.zeros((1, 2)), np.ones(5))

    def test_invariants(self, rng):
        cfg = ProblemConfig(N=3, R=4, s=3)
        sup = SupportSet.from_pairs(rng.random((3, 2)))
        x, Phi = draw_inputs(cfg, rng)
        B = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        ens = synthesize(cfg, sup, B, x)
        np.testing.assert_allclose(np.linalg.norm(ens.Phi, axis=1), 1, atol=1e-12)
        np.testing.assert_allclose(ens.c, np.linalg.norm(B, axis=1))
        X = sum(ens.c[j] * np.outer(atom(sup.pairs[j], 3), ens.Phi[j].conj()) for j in range(3))
        np.testing.assert_allclose(ens.X, X, atol=1e-12)
        np.testing.assert_allclose(ens.Y, gabor_matrix(x) @ ens.X, atol=1e-12)
        assert np.linalg.matrix_rank(ens.X, tol=1e-8 * np.linalg.norm(ens.X)) == 3

    def test_continuous_oracle_trivial(self):
        x = np.arange(1, 6) + 0j
        sup = SupportSet.from_pairs([(0.0, 0.0)])
        for p in range(-2, 3):
            assert continuous_oracle(sup, np.array([[1.0]]), x, p, 1) == pytest.approx(x[p + 2], abs=1e-12)
        assert continuous_oracle(SupportSet.from_pairs([]), np.zeros((0, 1)), x, 0, 1) == 0

    def test_sampling_equivalence(self, rng):
        for _ in range(5):
            s, R = int(rng.integers(1, 4)), int(rng.integers(1, 5))
            cfg = ProblemConfig(N=4, R=R, s=s)
            sup = SupportSet.from_pairs(rng.random((s, 2)))
            x, _ = draw_inputs(cfg, rng)
            B = rng.standard_normal((s, R)) + 1j * rng.standard_normal((s, R))
            ens = synthesize(cfg, sup, B, x)
            Yc = np.array([[continuous_oracle(sup, B, x, p, m) for m in range(1, R + 1)] for p in range(-4, 5)])
            assert np.linalg.norm(ens.Y - Yc) <= 1e-9 * np.linalg.norm(Yc)


class TestInputsAndNoise:
    def test_unit_rows_and_determinism(self):
        cfg = ProblemConfig(N=3, R=5, s=4, seed=7)
        a = draw_inputs(cfg, np.random.default_rng(7))
        b = draw_inputs(cfg, np.random.default_rng(7))
        np.testing.assert_allclose(np.linalg.norm(a[1], axis=1), 1, atol=1e-12)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_unit_modulus_law(self, rng):
        x, _ = draw_inputs(ProblemConfig(N=5), rng)
        np.testing.assert_allclose(np.abs(x), 1, atol=1e-12)

    def test_gaussian_variance(self, rng):
        cfg = ProblemConfig(N=50, probing_law=ProbingLaw.GAUSSIAN)
        xs = np.concatenate([draw_inputs(cfg, rng)[0] for _ in range(100)])
        assert abs(np.var(xs.real) * cfg.L - 1) < 0.2
        assert np.all(xs.imag == 0)

    def test_snr_exact(self, rng):
        Y = rng.standard_normal((9, 3)) + 1j * rng.standard_normal((9, 3))
        nr = add_noise(Y, 10.0, rng)
        assert np.linalg.norm(Y) ** 2 / nr.noise_norm**2 == pytest.approx(10.0, rel=1e-12)
        assert nr.eta / nr.noise_norm == pytest.approx(8 / 3, rel=1e-12)
        assert nr.eta >= nr.noise_norm

    def test_infinite_snr(self, rng):
        nr = add_noise(np.ones((3, 1)), math.inf, rng)
        assert not nr.W.any() and nr.eta == 0

    def test_zero_signal_rejected(self, rng):
        with pytest.raises(ModelError):
            add_noise(np.zeros((3, 1)), 10.0, rng)

    def test_eta_override(self, rng):
        assert add_noise(np.ones((3, 2)), 5.0, rng, eta=0.8).eta == 0.8


class TestSupport:
    def test_wraps_into_unit_square(self):
        r = DelayDoppler(1.25, -0.25)
        assert (r.tau, r.nu) == (0.25, 0.75)

    def test_separation_report(self):
        sup = SupportSet.from_pairs([(0.2, 0.8), (0.5, 0.5)])
        rep = sup.separation_report(4)
        assert rep["torus"] == pytest.approx(0.3)
        assert rep["required"] == pytest.approx(2.38 / 4)
        assert not rep["satisfied"]

    def test_torus_vs_plain(self):
        sup = SupportSet.from_pairs([(0.05, 0.05), (0.95, 0.95)])
        assert sup.min_separation(wrap=True) == pytest.approx(0.1)
        assert sup.min_separation(wrap=False) == pytest.approx(0.9)

    def test_duplicates_rejected(self):
        with pytest.raises(ModelError):
            SupportSet.from_pairs([(0.1, 0.1), (0.1, 0.1)])

    def test_config_validation(self):
        with pytest.raises(ModelError):
            ProblemConfig(N=0)
        with pytest.raises(ModelError):
            ProblemConfig(N=2, R=0)
        assert ProblemConfig(N=4).L == 9
