"""Off-grid delay-Doppler estimation from multiple measurement vectors.

Atomic norm minimization solved through its dual SDP, support detection
from the dual polynomial, a Fejer-kernel certificate checker and a MUSIC
baseline.
"""
from .model import (DelayDoppler, MeasurementEnsemble, ModelError, ProbingLaw, ProblemConfig,
                    SupportSet, add_noise, atom, dirichlet, draw_inputs, gabor_matrix, synthesize)
from .sdp import ConicProblem, SolverSettings, Status, solve
from .anm import build_noiseless_dual, build_noisy_dual, solve_dual
from .recover import detect_support, evaluate_dual_field, localization_error
from .certificate import build_interp_system, fejer_coeffs, verify_certificate
from .music import music_estimate
from .experiments import ExperimentSpec, figure, run

__version__ = "0.1.0"

__all__ = [
    "DelayDoppler", "MeasurementEnsemble", "ModelError", "ProbingLaw", "ProblemConfig", "SupportSet",
    "add_noise", "atom", "dirichlet", "draw_inputs", "gabor_matrix", "synthesize",
    "ConicProblem", "SolverSettings", "Status", "solve",
    "build_noiseless_dual", "build_noisy_dual", "solve_dual",
    "detect_support", "evaluate_dual_field", "localization_error",
    "build_interp_system", "fejer_coeffs", "verify_certificate",
    "music_estimate", "ExperimentSpec", "figure", "run",
]
