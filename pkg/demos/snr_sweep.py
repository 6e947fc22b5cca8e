"""Atomic norm denoising vs MUSIC as the noise level grows.

R = 3 antennas, L = 11 samples, two random sources.  MUSIC needs a clean
noise subspace; with three snapshots and low SNR it rarely gets one.

    python demos/snr_sweep.py [trials]
"""
import sys

from delaydoppler.experiments import ExperimentSpec, RandomSupport, run
from delaydoppler.model import ProblemConfig

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 2
spec = ExperimentSpec(
    kind="snr_sweep",
    config=ProblemConfig(N=5, R=3, s=2, seed=1),
    support=RandomSupport(2, 2.38 / 5),
    snr_db=[-10.0, -5.0, 0.0, 10.0, 20.0],
    trials=trials,
)
result = run(spec)
print(" SNR    atomic norm   MUSIC")
for row in result.summary["by_snr"]:
    print(f"{row['snr_db']:5.0f}   {row['anm']['mean_error']:10.4f}   {row['music']['mean_error']:7.4f}")
