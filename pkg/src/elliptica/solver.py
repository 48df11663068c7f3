"""Relaxation solver for ``-laplacian(u) + lam * G(u) = f`` with zero boundary.

The iteration is ``u <- u + tau * (f + laplacian(u) - lam * G(u))``
followed by zeroing the boundary ring, started from ``u = f`` with its
boundary zeroed. ``G`` is the Gaussian operator of
:mod:`elliptica.nonlocal_op`.

The residual whose norm drives the stopping rule lives on interior sites
only; its boundary entries are identically zero because boundary values are
pinned, not solved for.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from . import _kernels
from .errors import (
    DivergenceError,
    InvalidDimensionError,
    InvalidParameterError,
    SingularSystemError,
    SystemTooLargeError,
)
from .grid import (
    as_field,
    dirichlet_laplacian_eigenvalues,
    dirichlet_laplacian_matrix,
    enforce_dirichlet,
    laplacian,
)
from .nonlocal_op import gaussian_convolve, impulse_responses, make_gaussian_kernel

MAX_DENSE_UNKNOWNS = 4096


class StabilityWarning(UserWarning):
    """The step size is outside the sufficient contraction condition."""


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the relaxation.

    Attributes
    ----------
    lam : float
        Weight of the nonlocal term, ``>= 0``.
    tau : float
        Relaxation step, ``> 0``.
    max_iter : int
        Iteration cap, ``>= 1``.
    tol : float
        Stop once the residual norm drops below this value.
    sigma : float
        Standard deviation of the Gaussian kernel in grid units.
    """

    lam: float = 5.0
    tau: float = 0.1
    max_iter: int = 300
    tol: float = 1e-4
    sigma: float = 0.5

    def __post_init__(self):
        checks = [
            (self.lam >= 0 and math.isfinite(self.lam), "lam must be >= 0"),
            (self.tau > 0 and math.isfinite(self.tau), "tau must be > 0"),
            (self.tol > 0, "tol must be > 0"),
            (int(self.max_iter) == self.max_iter and self.max_iter >= 1, "max_iter must be an integer >= 1"),
            (self.sigma > 0 and math.isfinite(self.sigma), "sigma must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidParameterError(msg)
        object.__setattr__(self, "max_iter", int(self.max_iter))

    @property
    def kernel(self):
        return make_gaussian_kernel(self.sigma)


@dataclass
class SolveReport:
    iterations: int
    residual_history: np.ndarray
    converged: bool
    final_residual: float


@dataclass(frozen=True)
class StepBound:
    """Discrete constants of the contraction condition for one grid.

    ``lambda_min`` plays the role of ``1/C_P^2`` and ``lambda_max`` that of the
    Laplacian norm. ``tau_max`` is None when ``lam * lipschitz >= lambda_min``.
    """

    rows: int
    cols: int
    lam: float
    lipschitz: float
    lambda_min: float
    lambda_max: float
    tau_max: float | None

    @property
    def feasible(self):
        return self.tau_max is not None

    @property
    def lipschitz_total(self):
        return self.lambda_max + self.lam * self.lipschitz

    def amplification(self, tau):
        """Squared per-step error factor ``1 - 2 tau (lambda_min - lam L_G) + tau^2 L^2``."""
        return (
            1.0
            - 2.0 * tau * self.lambda_min
            + 2.0 * tau * self.lam * self.lipschitz
            + tau * tau * self.lipschitz_total**2
        )


def stable_step_bound(rows, cols, lam, lipschitz=1.0):
    """Largest step for which the relaxation is guaranteed to contract.

    The guarantee is ``0 < tau < 2 (lambda_min - lam L_G) / (lambda_max + lam L_G)^2``
    and needs ``lambda_min > lam L_G``; otherwise the returned bound is
    infeasible. The condition is sufficient only.
    """
    lam_min, lam_max = dirichlet_laplacian_eigenvalues(rows, cols)
    margin = lam_min - lam * lipschitz
    tau_max = None
    if margin > 0:
        tau_max = 2.0 * margin / (lam_max + lam * lipschitz) ** 2
    return StepBound(rows, cols, float(lam), float(lipschitz), lam_min, lam_max, tau_max)


def euler_step_limit(rows, cols, lam, lipschitz=1.0):
    """Classical explicit-Euler limit ``2 / (lambda_max + lam L_G)``.

    Every step below the limit converges as long as ``-laplacian + lam G`` is
    positive definite on the interior, which holds for Gaussian taps unless
    ``lam`` is enormous (the operator is positive semidefinite up to
    truncation effects of order 1e-5). Unlike :func:`stable_step_bound` it
    never becomes infeasible.
    """
    _, lam_max = dirichlet_laplacian_eigenvalues(rows, cols)
    return 2.0 / (lam_max + lam * lipschitz)


def _warn_if_unstable(shape, lam, tau):
    bound = stable_step_bound(shape[0], shape[1], lam)
    if not bound.feasible:
        warnings.warn(
            f"lam * L_G = {lam * bound.lipschitz:.4g} >= lambda_min = {bound.lambda_min:.4g}: "
            "contraction is not guaranteed",
            StabilityWarning,
            stacklevel=3,
        )
    elif tau >= bound.tau_max:
        warnings.warn(
            f"tau = {tau:.4g} exceeds the guaranteed-contraction bound {bound.tau_max:.4g}",
            StabilityWarning,
            stacklevel=3,
        )


def _run(f, u0, lam, tau, taps, max_iter, tol):
    u = enforce_dirichlet(f if u0 is None else as_field(u0, "u0"))
    if u.shape != f.shape:
        raise InvalidDimensionError(f"u0 shape {u.shape} does not match f shape {f.shape}")
    history = np.empty(max_iter)
    n, status = _kernels.relax(u, f, float(lam), float(tau), taps, max_iter, float(tol), history)
    if status < 0:
        raise DivergenceError(n)
    history = history[:n].copy()
    report = SolveReport(n, history, status == 1, float(history[-1]))
    return u, report


def solve_pde(f, config, u0=None, kernel=None):
    """Solve ``-laplacian(u) + lam * G(u) = f`` by relaxation.

    Parameters
    ----------
    f : array_like, shape (rows, cols)
        Right-hand side; its boundary ring is ignored.
    config : SolverConfig
    u0 : array_like, optional
        Starting field; defaults to ``f``. The boundary is zeroed first.
    kernel : KernelSpec, optional
        Overrides the Gaussian built from ``config.sigma``.

    Returns
    -------
    u : ndarray
        Last iterate, zero on the boundary.
    report : SolveReport

    Raises
    ------
    DivergenceError
        If the residual becomes non-finite.
    """
    f = as_field(f, "f")
    kernel = config.kernel if kernel is None else kernel
    _warn_if_unstable(f.shape, config.lam * kernel.gain, config.tau)
    return _run(f, u0, config.lam * kernel.gain, config.tau, kernel.taps, config.max_iter, config.tol)


def solve_poisson(f, config, u0=None):
    """Same relaxation with ``lam = 0``; returns the supersolution ``w``."""
    f = as_field(f, "f")
    _warn_if_unstable(f.shape, 0.0, config.tau)
    return _run(f, u0, 0.0, config.tau, np.ones(1), config.max_iter, config.tol)


def iterate(f, config, u0=None, kernel=None):
    """Yield ``(u_n, residual_norm_of_previous)`` for ``n = 1, 2, ...`` indefinitely.

    Uses the same compiled step as :func:`solve_pde`, so the sequence is
    identical to the solver's internal iterates.
    """
    f = as_field(f, "f")
    kernel = config.kernel if kernel is None else kernel
    u = enforce_dirichlet(f if u0 is None else as_field(u0, "u0"))
    history = np.empty(1)
    lam = config.lam * kernel.gain
    while True:
        n, status = _kernels.relax(u, f, lam, config.tau, kernel.taps, 1, 0.0, history)
        if status < 0:
            raise DivergenceError(n)
        yield u.copy(), float(history[0])


def residual(u, f, lam, kernel):
    """Interior residual ``f + laplacian(u) - lam * G(u)``; zero on the boundary."""
    u = as_field(u)
    f = as_field(f, "f")
    r = f + laplacian(u) - lam * gaussian_convolve(u, kernel)
    return enforce_dirichlet(r)


def relaxation_step(u, f, lam, tau, kernel):
    """One relaxation step composed from the public grid operators."""
    u = as_field(u)
    f = as_field(f, "f")
    return enforce_dirichlet(u + tau * (f + laplacian(u) - lam * gaussian_convolve(u, kernel)))


def assemble_operator(shape, lam, kernel):
    """Dense ``-laplacian + lam * G`` on interior unknowns (row-major)."""
    rows, cols = shape
    m, n = rows - 2, cols - 2
    if m < 1 or n < 1:
        raise InvalidDimensionError(f"grid must be at least 3x3, got {rows}x{cols}")
    if m * n > MAX_DENSE_UNKNOWNS:
        raise SystemTooLargeError(
            f"{m * n} interior unknowns exceed the dense limit of {MAX_DENSE_UNKNOWNS}"
        )
    A = dirichlet_laplacian_matrix(rows, cols)
    if lam != 0:
        sites = np.flatnonzero(np.pad(np.ones((m, n), dtype=bool), 1))
        resp = impulse_responses(shape, kernel, sites)
        A = A + lam * resp[:, sites].T
    return A


def direct_solve_oracle(f, lam, kernel):
    """Solve the discrete system directly with a dense factorization.

    Boundary values are pinned to zero; the interior of ``f`` is the
    right-hand side. Limited to 4096 interior unknowns.

    Raises
    ------
    SystemTooLargeError
        Above the size guard.
    SingularSystemError
        If the dense solve fails.
    """
    f = as_field(f, "f")
    A = assemble_operator(f.shape, lam, kernel)
    try:
        x = np.linalg.solve(A, f[1:-1, 1:-1].ravel())
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("dense solve returned non-finite values")
    u = np.zeros_like(f)
    u[1:-1, 1:-1] = x.reshape(f.shape[0] - 2, f.shape[1] - 2)
    return u


def energy(u, f, lam, kernel):
    """Discrete energy ``1/2 |grad u|^2 + lam/2 <u, G u> - <f, u>``.

    The gradient uses forward differences over every edge of the grid, and
    ``1/2 <u, G u>`` is the potential whose first variation is ``G u`` for the
    symmetric Gaussian operator.
    """
    u = np.asarray(u, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if u.shape != f.shape:
        raise InvalidDimensionError(f"shape mismatch: u {u.shape} vs f {f.shape}")
    u = as_field(u)
    dr = np.diff(u, axis=0)
    dc = np.diff(u, axis=1)
    smooth = 0.5 * (np.sum(dr * dr) + np.sum(dc * dc))
    nonlocal_term = 0.5 * lam * np.vdot(u, gaussian_convolve(u, kernel))
    return float(smooth + nonlocal_term - np.vdot(f, u))
