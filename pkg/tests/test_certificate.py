import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaydoppler.certificate import (CertificateError, build_interp_system, evaluate_qbar, fejer_closed_form,
                                      fejer_coeffs, fejer_eval, report_json, verify_certificate)
from delaydoppler.model import SupportSet, unit_sphere_rows


def separated_support(rng, s, N, factor=2.38):
    pts = []
    while len(pts) < s:
        c = rng.random(2)
        if all(np.abs(((c - p) + 0.5) % 1 - 0.5).max() >= factor / N for p in pts):
            pts.append(c)
    return SupportSet.from_pairs(pts)


class TestKernel:
    @pytest.mark.parametrize("N", [2, 4, 8, 64])
    def test_unit_at_origin(self, N):
        fs = fejer_coeffs(N)
        assert fs.g.sum() / fs.M == pytest.approx(1.0, abs=1e-12)
        assert fejer_eval(fs, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert abs(fejer_eval(fs, 0.0, 1)) < 1e-9

    def test_coefficients_symmetric_nonnegative(self):
        g = fejer_coeffs(10).g
        np.testing.assert_array_equal(g, g[::-1])
        assert np.all(g >= 0)
        assert g.size == 21

    def test_closed_form_n4(self):
        fs = fejer_coeffs(4)
        assert fs.M == 3
        want = (math.sin(3 * math.pi * 0.17) / (3 * math.sin(math.pi * 0.17))) ** 4
        assert fejer_eval(fs, 0.17) == pytest.approx(want, abs=1e-10)

    def test_second_derivative_is_minus_kappa_sq(self):
        fs = fejer_coeffs(16)
        assert fejer_eval(fs, 0.0, 2) == pytest.approx(-fs.kappa**2, rel=1e-12)

    def test_kappa_matches_analytic_curvature(self):
        # for the squared Fejer kernel of degree N, |K''(0)| = pi^2 (N^2 + 4N) / 3
        for N in (4, 8, 64):
            fs = fejer_coeffs(N)
            assert fs.kappa**2 == pytest.approx(math.pi**2 * (N**2 + 4 * N) / 3, rel=1e-12)

    def test_fd_first_derivative_at_0p3(self):
        fs = fejer_coeffs(4)
        h = 1e-6
        fd = (fejer_eval(fs, 0.3 + h) - fejer_eval(fs, 0.3 - h)) / (2 * h)
        assert fejer_eval(fs, 0.3, 1) == pytest.approx(fd, rel=1e-4)

    def test_odd_rejected(self):
        with pytest.raises(CertificateError):
            fejer_coeffs(5)

    def test_order_rejected(self):
        with pytest.raises(CertificateError):
            fejer_eval(fejer_coeffs(4), 0.1, 4)

    @given(st.floats(-2, 2), st.sampled_from([4, 8, 12]))
    @settings(max_examples=40)
    def test_symmetry(self, t, N):
        fs = fejer_coeffs(N)
        for m in range(4):
            assert fejer_eval(fs, -t, m) == pytest.approx((-1) ** m * fejer_eval(fs, t, m),
                                                          abs=1e-10 * fs.kappa ** m)

    def test_closed_form_random_points(self, rng):
        for N in (4, 8, 64):
            fs = fejer_coeffs(N)
            t = rng.random(1000)
            np.testing.assert_allclose(fejer_eval(fs, t), fejer_closed_form(t, fs.M), atol=1e-10)


class TestSystem:
    def test_single_source_identity(self, rng):
        sup = SupportSet.from_pairs([(0.4, 0.7)])
        phi = unit_sphere_rows(rng, 1, 3)
        sysm = build_interp_system(sup, phi, 16)
        np.testing.assert_allclose(sysm.Dbar, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(sysm.alpha_bar, phi, atol=1e-12)
        assert np.abs(sysm.beta_bar).max() < 1e-12 and np.abs(sysm.gamma_bar).max() < 1e-12

    def test_single_source_qbar_is_kernel_product(self):
        sup = SupportSet.from_pairs([(0.4, 0.7)])
        sysm = build_interp_system(sup, np.array([[1.0, 0.0]]), 8)
        r = np.array([0.43, 0.66])
        want = fejer_eval(sysm.fejer, r[0] - 0.4) * fejer_eval(sysm.fejer, r[1] - 0.7)
        np.testing.assert_allclose(evaluate_qbar(sysm, r), [want, 0.0], atol=1e-13)

    def test_symmetry_and_residual(self, rng):
        N = 64
        sysm = build_interp_system(separated_support(rng, 3, N), unit_sphere_rows(rng, 3, 2), N)
        np.testing.assert_allclose(sysm.Dbar, sysm.Dbar.T, atol=1e-13)
        for key in [(0, 0), (1, 1), (2, 0), (0, 2)]:
            np.testing.assert_allclose(sysm.blocks[key], sysm.blocks[key].T, atol=1e-13)
        for key in [(1, 0), (0, 1)]:
            np.testing.assert_allclose(sysm.blocks[key], -sysm.blocks[key].T, atol=1e-13)
        assert sysm.residual < 1e-10

    def test_interpolation_conditions(self, rng):
        N = 64
        sup = separated_support(rng, 2, N)
        phi = unit_sphere_rows(rng, 2, 3)
        sysm = build_interp_system(sup, phi, N)
        pts = sup.as_array()
        np.testing.assert_allclose(evaluate_qbar(sysm, pts), phi, atol=1e-8)
        assert np.abs(evaluate_qbar(sysm, pts, 1, 0)).max() < 1e-8
        assert np.abs(evaluate_qbar(sysm, pts, 0, 1)).max() < 1e-8

    def test_ill_conditioned_rejected(self):
        sup = SupportSet.from_pairs([(0.3, 0.3), (0.3 + 1e-7, 0.3)])
        with pytest.raises(CertificateError, match="condition number"):
            build_interp_system(sup, np.ones((2, 1)), 16)

    def test_derivative_order_rejected(self):
        sysm = build_interp_system(SupportSet.from_pairs([(0.1, 0.1)]), np.ones((1, 1)), 4)
        with pytest.raises(CertificateError):
            evaluate_qbar(sysm, (0.2, 0.2), 2, 1)

    def test_derivatives_match_finite_differences(self, rng):
        N = 16
        sysm = build_interp_system(separated_support(rng, 2, N), unit_sphere_rows(rng, 2, 2), N)
        kap = sysm.kappa
        h = 1e-6
        for _ in range(5):
            r = rng.random(2)
            e1, e2 = np.array([h, 0]), np.array([0, h])
            for (m, n), e in [((0, 0), e1), ((0, 0), e2), ((1, 0), e1), ((0, 1), e2), ((1, 0), e2)]:
                fd = (evaluate_qbar(sysm, r + e, m, n) - evaluate_qbar(sysm, r - e, m, n)) / (2 * h) / kap
                dm, dn = (m + 1, n) if e is e1 else (m, n + 1)
                exact = evaluate_qbar(sysm, r, dm, dn)
                scale = max(np.abs(exact).max(), 1e-3)
                assert np.abs(fd - exact).max() <= 1e-4 * scale


class TestVerification:
    def test_single_source_report(self, rng):
        sysm = build_interp_system(SupportSet.from_pairs([(0.25, 0.6)]), unit_sphere_rows(rng, 1, 2), 8)
        rep = verify_certificate(sysm)
        assert rep["off_support_max"] < 1
        assert rep["interpolation_residual"] < 1e-10
        assert rep["derivative_residual_tau"] < 1e-10
        assert rep["hessian_negative_definite"]
        json.loads(report_json(rep))

    def test_n64_two_sources(self, rng):
        N = 64
        sysm = build_interp_system(separated_support(rng, 2, N), unit_sphere_rows(rng, 2, 3), N)
        rep = verify_certificate(sysm)
        assert rep["dbar_deviation"]["value"] <= 0.19808 + 1e-2
        assert rep["far_region_max"]["pass"]
        assert rep["kappa_sq_over_pi2_3_N2_4N"] == pytest.approx(1.0)
