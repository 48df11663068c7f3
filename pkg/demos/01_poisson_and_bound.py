"""Poisson relaxation and the step-size bound.

Run with ``python demos/01_poisson_and_bound.py``.

We start with the plain Poisson problem ``-lap(w) = 1`` on a 16 x 16 grid,
solve it by explicit relaxation, and check the answer against a dense
direct solve. Then we ask how large the relaxation step may be before the
contraction guarantee is lost, and watch what happens when the nonlocal
term is switched on.
"""

import warnings

import numpy as np

from elliptica.nonlocal_op import make_gaussian_kernel
from elliptica.solver import (
    SolverConfig,
    direct_solve_oracle,
    euler_step_limit,
    solve_pde,
    solve_poisson,
    StabilityWarning,
    stable_step_bound,
)

# Both solves below deliberately step outside the certified range.
warnings.simplefilter("ignore", StabilityWarning)

n = 16
f = np.ones((n, n))

# A tau of 0.1 is well inside the explicit-Euler limit 2/||lap|| ~ 0.25.
w, report = solve_poisson(f, SolverConfig(tau=0.1, max_iter=50_000, tol=1e-10))
reference = direct_solve_oracle(f, 0.0, make_gaussian_kernel(1.0))
print(f"Poisson: {report.iterations} iterations, "
      f"relative error vs dense solve {np.linalg.norm(w - reference) / np.linalg.norm(reference):.2e}")
print(f"peak value {w.max():.4f} at the grid centre")

# The sufficient contraction condition asks lambda * L_G < lambda_min.
for lam in (0.0, 0.02, 0.5):
    b = stable_step_bound(n, n, lam)
    if b.feasible:
        print(f"lambda={lam:<5} contraction guaranteed for tau < {b.tau_max:.3e}")
    else:
        print(f"lambda={lam:<5} no guaranteed step (lambda_min = {b.lambda_min:.4f})")

# The guarantee is only sufficient. With lambda = 0.5 there is no certified
# step, yet relaxation below the explicit-Euler limit converges anyway.
lam = 0.5
tau = 0.9 * euler_step_limit(n, n, lam)
u, rep = solve_pde(f, SolverConfig(lam=lam, tau=tau, sigma=1.0, max_iter=50_000, tol=1e-10))
ref = direct_solve_oracle(f, lam, make_gaussian_kernel(1.0))
print(f"lambda=0.5, tau={tau:.3f}: converged={rep.converged} in {rep.iterations} iterations, "
      f"error {np.linalg.norm(u - ref) / np.linalg.norm(ref):.2e}")
