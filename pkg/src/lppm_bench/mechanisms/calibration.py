"""Monte-Carlo mapping between epsilon and the amount of noise it adds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .planar_laplace import check_epsilon, inverse_cdf_radius
from .seeding import derive_seed

# Ten values between strong and weak privacy used for epsilon sweeps (1/m).
SWEEP_EPSILONS = (0.00139, 0.00200, 0.00262, 0.00323, 0.00385, 0.00447, 0.00508, 0.00570, 0.00632, 0.00693)
# Strong, medium and weak privacy (1/m).
PRIVACY_LEVELS = {"strong": 0.00139, "medium": 0.00358, "weak": 0.00693}


@dataclass(frozen=True)
class NoiseRow:
    epsilon: float
    avg_noise: float
    max_noise: float


def epsilon_noise_table(eps_list: Iterable[float], n_samples: int = 200_000, seed: int = 0) -> list[NoiseRow]:
    """Average and maximum planar Laplace radius over ``n_samples`` draws per epsilon.

    Each row uses its own generator derived from ``seed`` and the epsilon
    value, so a row does not change when other rows are added or removed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rows = []
    for eps in eps_list:
        eps = check_epsilon(eps)
        rng = np.random.default_rng(derive_seed(seed, repr(eps), "epsilon-table", 0))
        r = inverse_cdf_radius(rng.random(n_samples), eps)
        rows.append(NoiseRow(eps, float(r.mean()), float(r.max())))
    return rows
