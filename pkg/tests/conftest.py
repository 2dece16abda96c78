import numpy as np
import pytest

from ewaldpot.core import ParticleSystem


def random_neutral_system(n: int, box, seed: int, spread: float = 0.5) -> ParticleSystem:
    """Seeded random system with exactly zero net charge.

    Charges come in +/- pairs of magnitudes in [0.5, 1.5]; positions are
    uniform in a centered sub-box of relative half-width `spread`.
    """
    if n % 2 != 0:
        raise ValueError("need an even particle count for paired neutrality")
    rng = np.random.default_rng(seed)
    box = np.asarray(box, dtype=float)
    pos = (rng.uniform(-spread, spread, size=(n, 3))) * box[None, :]
    mags = rng.uniform(0.5, 1.5, size=n // 2)
    q = np.concatenate([mags, -mags])
    rng.shuffle(q)
    return ParticleSystem(pos, q, box)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
