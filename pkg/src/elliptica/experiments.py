"""Built-in experiment presets and the synthetic source term."""

from dataclasses import dataclass, field

import numpy as np

from .pipeline import NLMeansParams
from .solver import SolverConfig


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    config: SolverConfig
    grid_size: int | None = None
    noise_levels: tuple = ()
    nlm: NLMeansParams = field(default_factory=NLMeansParams)
    median_k: int = 3
    seed: int = 0


PART_A = ExperimentPreset(
    name="part-a",
    config=SolverConfig(lam=5.0, tau=0.1, max_iter=300, tol=1e-4, sigma=0.5),
    grid_size=50,
)

PART_B = ExperimentPreset(
    name="part-b",
    config=SolverConfig(lam=1.0, tau=1e-4, max_iter=300, tol=1e-3, sigma=3.0),
    noise_levels=(0.05, 0.09, 0.15, 0.18),
    nlm=NLMeansParams(template_radius=3, search_radius=10, h=15.0 / 255.0, color_space="lab"),
    median_k=3,
    seed=0,
)

PRESETS = {p.name: p for p in (PART_A, PART_B)}


def bump_source(n):
    """``1 + 0.5 exp(-((x - 1/2)^2 + (y - 1/2)^2) / 0.02)`` sampled on an n x n grid over [0, 1]^2."""
    x = np.linspace(0.0, 1.0, n)
    X, Y = np.meshgrid(x, x)
    return 1.0 + 0.5 * np.exp(-((X - 0.5) ** 2 + (Y - 0.5) ** 2) / 0.02)
