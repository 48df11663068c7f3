"""The synthetic bump experiment.

Run with ``python demos/02_synthetic_bump.py [out_dir]``.

A Gaussian bump source on a 50 x 50 grid is solved twice: once with the
nonlocal term (lambda = 5) and once as plain Poisson. The Poisson solution
``w`` bounds the nonlocal one ``u`` from above, and ``u`` stays
nonnegative. Both surfaces are written as CSV for plotting.
"""

import sys
import warnings
from pathlib import Path

import numpy as np

from elliptica.experiments import PART_A, bump_source
from elliptica.io import write_field_csv
from elliptica.solver import SolverConfig, StabilityWarning, solve_pde, solve_poisson

warnings.simplefilter("ignore", StabilityWarning)  # the bound is infeasible here, by design

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/bump")
out.mkdir(parents=True, exist_ok=True)

f = bump_source(PART_A.grid_size)
cfg = PART_A.config
u, rep_u = solve_pde(f, cfg)
print(f"u: converged={rep_u.converged} after {rep_u.iterations} iterations")

# 300 iterations are not enough for the Poisson problem on this grid; it
# converges slowly because its smallest eigenvalue is ~8e-3.
w_short, rep_short = solve_poisson(f, cfg)
w, rep_w = solve_poisson(f, SolverConfig(tau=cfg.tau, max_iter=60_000, tol=cfg.tol))
print(f"w: {rep_short.iterations} iterations leave residual {rep_short.final_residual:.2e}; "
      f"converged after {rep_w.iterations}")

inner = (slice(1, -1), slice(1, -1))
print(f"min u = {u[inner].min():.4f}, max u = {u.max():.4f}, max w = {w.max():.2f}")
print(f"0 <= u <= w holds: {bool(u.min() >= 0 and np.all(u <= w))}")

write_field_csv(u, out / "u.csv")
write_field_csv(w, out / "w.csv")
print(f"surfaces written to {out}")
