import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from delaydoppler import model, recover
from delaydoppler.model import DelayDoppler, ProblemConfig, SupportSet
from delaydoppler.recover import (EstimateSet, detect_support, dual_polynomial, evaluate_dual_field,
                                  localization_error, local_maxima, match_estimates, refine_peak, top_peaks)


def random_lambda(rng, L, R):
    return rng.standard_normal((L, R)) + 1j * rng.standard_normal((L, R))


class TestField:
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_fft_matches_direct(self, rng, N):
        cfg = ProblemConfig(N=N, R=2)
        x, _ = model.draw_inputs(cfg, rng)
        G = model.gabor_matrix(x)
        Lam = random_lambda(rng, cfg.L, 2)
        fld = evaluate_dual_field(Lam, G, cfg, 4)
        M = fld.size
        for i in range(0, M, 3):
            for j in range(0, M, 5):
                direct = np.linalg.norm(dual_polynomial(Lam, G, (i / M, j / M), N))
                assert fld.values[i, j] == pytest.approx(direct, abs=1e-9)

    def test_zero_lambda(self, rng):
        cfg = ProblemConfig(N=2, R=3)
        G = model.gabor_matrix(model.draw_inputs(cfg, rng)[0])
        assert not evaluate_dual_field(np.zeros((5, 3)), G, cfg, 4).values.any()

    def test_small_grid_factor_rejected(self, rng):
        cfg = ProblemConfig(N=2)
        with pytest.raises(ValueError):
            evaluate_dual_field(np.zeros((5, 1)), np.zeros((5, 25)), cfg, 3)

    def test_unit_modulus_scaling_invariant(self, rng):
        cfg = ProblemConfig(N=2, R=2)
        G = model.gabor_matrix(model.draw_inputs(cfg, rng)[0])
        Lam = random_lambda(rng, 5, 2)
        a = evaluate_dual_field(Lam, G, cfg, 4).values
        b = evaluate_dual_field(np.exp(0.7j) * Lam, G, cfg, 4).values
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_csv(self, rng, tmp_path):
        cfg = ProblemConfig(N=1, R=1)
        G = model.gabor_matrix(np.ones(3))
        fld = evaluate_dual_field(random_lambda(rng, 3, 1), G, cfg, 4)
        fld.to_csv(tmp_path / "f.csv")
        rows = list(csv.reader(open(tmp_path / "f.csv")))
        assert rows[0] == ["tau", "nu", "qnorm"]
        assert len(rows) == 1 + 12 * 12
        assert float(rows[2][1]) == pytest.approx(1 / 12)  # nu varies fastest
        assert float(rows[5][2]) == pytest.approx(fld.values[0, 4])


class TestDetection:
    def test_zero_field(self):
        fld = recover.DualField(grid_factor=4, values=np.zeros((12, 12)), coefficients=None, N=1)
        assert len(detect_support(fld, 0.99)) == 0

    def test_threshold_domain(self):
        fld = recover.DualField(grid_factor=4, values=np.zeros((12, 12)), coefficients=None, N=1)
        with pytest.raises(ValueError):
            detect_support(fld, 0.0)
        with pytest.raises(ValueError):
            detect_support(fld, 1.5)

    def test_plateau_tie_break(self):
        v = np.zeros((8, 8))
        v[2, 3] = v[2, 4] = v[3, 3] = 0.99
        assert local_maxima(v, 0.99) == [(2, 3)]

    def test_torus_neighbourhood(self):
        v = np.zeros((8, 8))
        v[0, 0] = 1.0
        v[7, 7] = 0.995
        assert local_maxima(v, 0.99) == [(0, 0)]

    def test_max_peaks_keeps_largest(self):
        v = np.zeros((16, 16))
        v[2, 2], v[8, 8], v[12, 3] = 0.995, 1.0, 0.992
        fld = recover.DualField(grid_factor=4, values=v, coefficients=None, N=1)
        est = detect_support(fld, 0.99, max_peaks=2)
        assert est.as_array().tolist() == [[2 / 16, 2 / 16], [8 / 16, 8 / 16]]
        assert all(p >= 0.99 for p in est.peak_values)

    @given(arrays(np.float64, (10, 10), elements=st.floats(0, 1)), st.floats(0.01, 1), st.floats(0.01, 1))
    @settings(max_examples=50)
    def test_threshold_monotone(self, v, t1, t2):
        lo, hi = sorted((t1, t2))
        assert len(local_maxima(v, hi)) <= len(local_maxima(v, lo))

    def test_refine_recovers_quadratic_vertex(self):
        ii, jj = np.meshgrid(np.arange(20), np.arange(20), indexing="ij")
        v = 1 - 0.01 * ((ii - 7.3) ** 2 + 0.5 * (jj - 11.6) ** 2)
        di, dj = refine_peak(v, 7, 12)
        assert 7 + di == pytest.approx(7.3, abs=1e-9)
        assert 12 + dj == pytest.approx(11.6, abs=1e-9)

    def test_top_peaks_count(self, rng):
        v = rng.random((20, 20))
        assert len(top_peaks(v, 3)) == 3

    def test_sorted_lexicographically(self):
        v = np.zeros((16, 16))
        v[9, 1], v[2, 14], v[2, 3] = 1.0, 1.0, 1.0
        fld = recover.DualField(grid_factor=4, values=v, coefficients=None, N=1)
        arr = detect_support(fld, 0.99).as_array()
        assert arr.tolist() == sorted(arr.tolist())


class TestError:
    def test_exact(self):
        sup = SupportSet.from_pairs([(0.1, 0.2), (0.7, 0.4)])
        est = EstimateSet([DelayDoppler(0.1, 0.2), DelayDoppler(0.7, 0.4)], np.ones(2))
        assert localization_error(sup, est, 9) == pytest.approx(0.0, abs=1e-12)

    def test_offset(self):
        sup = SupportSet.from_pairs([(0.1, 0.2)])
        est = EstimateSet([DelayDoppler(0.13, 0.2)], np.ones(1))
        assert localization_error(sup, est, 9) == pytest.approx(9 * 0.03)

    def test_permutation_invariant(self):
        sup = SupportSet.from_pairs([(0.1, 0.2), (0.7, 0.4)])
        a = EstimateSet([DelayDoppler(0.11, 0.2), DelayDoppler(0.7, 0.42)], np.ones(2))
        b = EstimateSet(list(reversed(a.pairs)), np.ones(2))
        assert localization_error(sup, a, 9) == pytest.approx(localization_error(sup, b, 9))

    def test_wraps(self):
        sup = SupportSet.from_pairs([(0.99, 0.0)])
        est = EstimateSet([DelayDoppler(0.01, 0.0)], np.ones(1))
        assert localization_error(sup, est, 5) == pytest.approx(5 * 0.02)

    def test_missing_estimates_penalized(self):
        sup = SupportSet.from_pairs([(0.1, 0.2), (0.7, 0.4)])
        est = EstimateSet([DelayDoppler(0.1, 0.2)], np.ones(1))
        m = match_estimates(sup, est, 9)
        assert m.unmatched_truth == 1 and m.unequal_cardinality
        assert m.error == pytest.approx(9 * np.sqrt(2) / 2 / 2)

    def test_empty_truth(self):
        assert localization_error(SupportSet.from_pairs([]), EstimateSet(), 9) == 0.0

    def test_estimates_csv(self, tmp_path):
        est = EstimateSet([DelayDoppler(0.25, 0.5)], np.array([0.999]))
        est.to_csv(tmp_path / "e.csv")
        rows = list(csv.reader(open(tmp_path / "e.csv")))
        assert rows == [["tau", "nu", "peak"], ["0.25", "0.5", "0.999"]]


class TestAmplitudeSelection:
    def test_picks_sources_over_spurious_candidates(self, rng):
        cfg = ProblemConfig(N=4, R=3, s=2)
        truth = SupportSet.from_pairs([(0.2, 0.8), (0.55, 0.35)])
        x, Phi = model.draw_inputs(cfg, rng)
        ens = model.synthesize(cfg, truth, np.conj(Phi), x)
        cands = EstimateSet(pairs=[DelayDoppler(0.9, 0.1), DelayDoppler(0.55, 0.35), DelayDoppler(0.4, 0.6),
                                   DelayDoppler(0.2, 0.8)], peak_values=np.ones(4))
        est = recover.select_by_amplitude(cands, ens.Y, ens.G, cfg.N, 2)
        assert sorted(p.tau for p in est.pairs) == [0.2, 0.55]

    def test_few_candidates_returned_unchanged(self):
        cands = EstimateSet(pairs=[DelayDoppler(0.1, 0.1)], peak_values=np.ones(1))
        assert recover.select_by_amplitude(cands, np.ones((9, 1)), np.eye(9, 81), 4, 2) is cands
