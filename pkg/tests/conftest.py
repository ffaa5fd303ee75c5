import numpy as np
import pytest

from sthawkes import (
    CovarianceParams,
    EventSequence,
    HawkesParams,
    Rectangle,
)

UNIT_DOMAIN = Rectangle(-1.0, 1.0, -1.0, 1.0)


def random_sequence(seed: int, n: int = 50, u_count: int = 2,
                    domain: Rectangle = UNIT_DOMAIN,
                    mean_gap: float = 1.0) -> EventSequence:
    """Uniform random sequence with roughly unit mean inter-event gap."""
    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0.0, n * mean_gap, n))
    return EventSequence(
        times=times,
        locations=np.column_stack([
            rng.uniform(domain.x_min, domain.x_max, n),
            rng.uniform(domain.y_min, domain.y_max, n),
        ]),
        types=rng.integers(0, u_count, n),
        num_types=u_count,
        duration=float(times[-1]),
        domain=domain,
    )


def random_params(seed: int, u_count: int = 2,
                  l_mu=(2.5, 4.0), l_gamma=(3.0, 2.0)) -> HawkesParams:
    """Generic positive parameter set with rotated eigenvector blocks.

    Kernel scales default to the domain scale so low-dimensional randomized
    intensities stay positive at every event.
    """
    rng = np.random.default_rng(seed)

    def rot(a):
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])

    angles = rng.uniform(0.0, 2.0 * np.pi, 2)
    return HawkesParams(
        k_mu=rng.uniform(0.3, 1.0, (u_count, u_count)),
        k_gamma=rng.uniform(0.3, 1.0, (u_count, u_count)),
        w=rng.uniform(0.5, 2.0, (u_count, u_count)),
        cov_mu=CovarianceParams(eigvecs=rot(angles[0]), eigvals=np.asarray(l_mu, dtype=float)),
        cov_gamma=CovarianceParams(eigvecs=rot(angles[1]), eigvals=np.asarray(l_gamma, dtype=float)),
    )


@pytest.fixture
def small_seq() -> EventSequence:
    return random_sequence(0, n=50)


@pytest.fixture
def small_params() -> HawkesParams:
    return random_params(0)
