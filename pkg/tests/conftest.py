import numpy as np
import pytest

from crnf.series import MixedSeries
from crnf.hypersurfaces import Hypersurface, model_D


def random_real_perturbation(n, trunc, rng, nterms=25, amp=0.05, min_deg=4):
    """Random real series supported in weighted degrees [min_deg, trunc]."""
    pert = MixedSeries.zero(n, trunc)
    for _ in range(nterms):
        a = tuple(int(x) for x in rng.integers(0, 3, n))
        b = tuple(int(x) for x in rng.integers(0, 3, n))
        m = int(rng.integers(0, 3))
        if not (min_deg <= sum(a) + sum(b) + 2 * m <= trunc):
            continue
        c = amp * (rng.normal() + 1j * rng.normal())
        pert = pert + MixedSeries.monomial(n, trunc, a, b, m, c)
    return pert.realified()


def perturbed_model(n, trunc, lam, seed, amp=0.05):
    rng = np.random.default_rng(seed)
    M0 = model_D(n, trunc, lam)
    return Hypersurface(M0.phi + random_real_perturbation(n, trunc, rng, amp=amp))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
