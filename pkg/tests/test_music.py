import numpy as np
import pytest

from delaydoppler import model
from delaydoppler.model import ProblemConfig, SupportSet
from delaydoppler.music import SubspaceError, music_estimate, steering_field
from delaydoppler.recover import localization_error


def instance(N, R, pairs, seed=0):
    cfg = ProblemConfig(N=N, R=R, s=len(pairs))
    rng = np.random.default_rng(seed)
    x, Phi = model.draw_inputs(cfg, rng)
    return cfg, model.synthesize(cfg, SupportSet.from_pairs(pairs), np.conj(Phi), x)


def test_steering_field_matches_direct(rng):
    cfg, ens = instance(2, 1, [(0.3, 0.3)])
    steer = steering_field(ens.G, 2, 4)
    M = steer.shape[0]
    for i, j in [(0, 0), (3, 7), (11, 19)]:
        np.testing.assert_allclose(steer[i, j], ens.G @ model.atom((i / M, j / M), 2), atol=1e-10)


def test_single_source_noiseless():
    cfg, ens = instance(4, 1, [(0.37, 0.61)])
    res = music_estimate(ens.Y, ens.G, cfg, 1)
    M = res.spectrum.shape[0]
    est = res.estimates.as_array()[0]
    assert np.abs(model.torus_diff(est, [0.37, 0.61])).max() <= 1.0 / M


def test_true_locations_are_global_maxima():
    cfg, ens = instance(5, 3, [(0.2, 0.3), (0.6, 0.75)])
    res = music_estimate(ens.Y, ens.G, cfg, 2)
    assert len(res.estimates) == 2
    assert localization_error(ens.support, res.estimates, cfg.L) <= cfg.L / res.spectrum.shape[0]
    assert np.all(res.spectrum >= 0)


def test_column_phase_invariance():
    cfg, ens = instance(3, 3, [(0.2, 0.3), (0.6, 0.75)])
    rng = np.random.default_rng(1)
    Y = ens.Y + 0.05 * (rng.standard_normal(ens.Y.shape) + 1j * rng.standard_normal(ens.Y.shape))
    phases = np.exp(2j * np.pi * rng.random(3))
    a = music_estimate(Y, ens.G, cfg, 2).spectrum
    b = music_estimate(Y * phases, ens.G, cfg, 2).spectrum
    np.testing.assert_allclose(a, b, rtol=1e-8)


def test_errors():
    cfg, ens = instance(3, 1, [(0.2, 0.3), (0.6, 0.75)])
    with pytest.raises(SubspaceError):
        music_estimate(ens.Y, ens.G, cfg, 2)
    with pytest.raises(SubspaceError):
        music_estimate(np.zeros_like(ens.Y), ens.G, cfg, 1)


def test_degenerate_eigengap_flag():
    cfg, ens = instance(3, 1, [(0.2, 0.3)])
    # rank one covariance: asking for two sources leaves lambda_2 == lambda_3 == 0
    res = music_estimate(np.hstack([ens.Y, ens.Y]), ens.G, ProblemConfig(N=3, R=2), 2)
    assert res.degenerate_eigengap
    assert res.metadata["steering"].startswith("G a(r)")


def test_spectrum_csv(tmp_path):
    cfg, ens = instance(1, 1, [(0.2, 0.3)])
    res = music_estimate(ens.Y, ens.G, cfg, 1, grid_factor=4)
    res.to_csv(tmp_path / "m.csv")
    assert open(tmp_path / "m.csv").readline().strip() == "tau,nu,pmusic"
