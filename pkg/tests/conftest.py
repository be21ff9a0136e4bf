import numpy as np
import pytest

from cogmimo.model import ArrayGeometry, Scenario, SourceDescriptor


@pytest.fixture
def geom4():
    return ArrayGeometry(num_antennas=4, spacing_wavelengths=0.5)


@pytest.fixture
def geom6():
    return ArrayGeometry(num_antennas=6, spacing_wavelengths=0.5)


@pytest.fixture
def geom18():
    return ArrayGeometry(num_antennas=18, spacing_wavelengths=0.5)


@pytest.fixture
def basic_scene():
    """Target plus one interferer of each kind, unit noise floor."""
    return Scenario(
        sources=(
            SourceDescriptor("target", 65.0, 20.0),
            SourceDescriptor("deceptive", 50.0, 15.0),
            SourceDescriptor("coexisting", 110.0, 15.0),
        ),
        rng_seed=99,
    )


def random_scene(rng: np.random.Generator, *, kinds=("deceptive", "coexisting")):
    """Target at a random angle with 1-3 random interferers (SNR 20, INR 15)."""
    target_angle = rng.uniform(15.0, 165.0)
    sources = [SourceDescriptor("target", float(target_angle), 20.0)]
    for _ in range(int(rng.integers(1, 4))):
        kind = kinds[int(rng.integers(0, len(kinds)))]
        angle = float(rng.uniform(10.0, 170.0))
        sources.append(SourceDescriptor(kind, angle, 15.0))
    return Scenario(sources=tuple(sources), rng_seed=int(rng.integers(0, 2**32)))
