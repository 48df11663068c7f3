"""Grid functions on a uniform lattice with unit spacing.

A field is a 2-D float64 array indexed ``(row, col)``. Every field has at
least 3 rows and 3 columns so the five-point stencil has an interior.
"""

import numpy as np

from .errors import InvalidDimensionError

MIN_SIZE = 3


def as_field(u, name="u"):
    """Validate ``u`` as a field and return it as a float64 array.

    Raises
    ------
    InvalidDimensionError
        If ``u`` is not 2-D or either axis is shorter than 3.
    ValueError
        If ``u`` contains NaN or infinity.
    """
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidDimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < MIN_SIZE or arr.shape[1] < MIN_SIZE:
        raise InvalidDimensionError(
            f"{name} must be at least {MIN_SIZE}x{MIN_SIZE}, got {arr.shape[0]}x{arr.shape[1]}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def laplacian(u):
    """Five-point Laplacian with unit spacing.

    Interior sites get ``u[i+1,j] + u[i-1,j] + u[i,j+1] + u[i,j-1] - 4 u[i,j]``;
    boundary sites of the result are zero, so the output has the input's shape.
    """
    u = as_field(u)
    lap = np.zeros_like(u)
    lap[1:-1, 1:-1] = (
        u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]
    )
    return lap


def enforce_dirichlet(u):
    """Return a copy of ``u`` with the outer ring of sites set to zero."""
    out = as_field(u).copy()
    out[0, :] = 0.0
    out[-1, :] = 0.0
    out[:, 0] = 0.0
    out[:, -1] = 0.0
    return out


def norm_l2(u):
    """Euclidean norm of all entries (Frobenius norm for 2-D arrays)."""
    arr = np.asarray(u, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))


def interior_mask(shape):
    """Boolean array that is True exactly on interior sites."""
    rows, cols = shape
    mask = np.zeros((rows, cols), dtype=bool)
    mask[1:-1, 1:-1] = True
    return mask


def dirichlet_laplacian_eigenvalues(rows, cols):
    """Smallest and largest eigenvalue of ``-laplacian`` on the interior.

    With boundary pinned to zero the interior of an ``rows x cols`` grid has
    ``m = rows - 2`` by ``n = cols - 2`` unknowns, and the eigenvalues are
    ``4 sin^2(p pi / 2(m+1)) + 4 sin^2(q pi / 2(n+1))`` for ``1 <= p <= m``,
    ``1 <= q <= n``.
    """
    if rows < MIN_SIZE or cols < MIN_SIZE:
        raise InvalidDimensionError(f"grid must be at least 3x3, got {rows}x{cols}")
    m, n = rows - 2, cols - 2
    s = lambda k, size: np.sin(k * np.pi / (2.0 * (size + 1))) ** 2  # noqa: E731
    lam_min = 4.0 * (s(1, m) + s(1, n))
    lam_max = 4.0 * (s(m, m) + s(n, n))
    return float(lam_min), float(lam_max)


def dirichlet_laplacian_matrix(rows, cols):
    """Dense matrix of ``-laplacian`` acting on interior unknowns (row-major)."""
    m, n = rows - 2, cols - 2
    if m < 1 or n < 1:
        raise InvalidDimensionError(f"grid must be at least 3x3, got {rows}x{cols}")

    def second_difference(size):
        return 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)

    return np.kron(second_difference(m), np.eye(n)) + np.kron(np.eye(m), second_difference(n))
