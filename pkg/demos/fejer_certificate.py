"""Build the squared-Fejer certificate for a separated support and check it.

The certificate interpolates the sign pattern phi_j at each r_j with zero
gradient, and stays strictly below one elsewhere.  The checker reports how
much slack each numerical bound has at this N.

    python demos/fejer_certificate.py [N] [s]
"""
import sys

import numpy as np

from delaydoppler.certificate import build_interp_system, report_json, verify_certificate
from delaydoppler.experiments import RandomSupport
from delaydoppler.model import SEPARATION_CONSTANT, unit_sphere_rows

N = int(sys.argv[1]) if len(sys.argv) > 1 else 64
s = int(sys.argv[2]) if len(sys.argv) > 2 else 3
rng = np.random.default_rng(7)

support = RandomSupport(s, SEPARATION_CONSTANT / N).draw(rng)
phi = unit_sphere_rows(rng, s, 2)
system = build_interp_system(support, phi, N)
print(f"kappa = {system.kappa:.4f}, cond(Dbar) = {system.condition_number:.4f}")

report = verify_certificate(system)
for key in ("dbar_deviation", "far_region_max", "alpha_max", "beta_max"):
    item = report[key]
    print(f"{key:16s} {item['value']:.6g} (bound {item['bound']:.6g}, slack {item['slack']:.3g})")
print("Hessian negative definite near support:", report["hessian_negative_definite"])

if "--json" in sys.argv:
    print(report_json(report))
