import math
import sys

import numpy as np
import pytest

from stablebip.posterior_core import ForwardModel, NoiseModel, gaussian_potential
from stablebip.quasi_banach import BasisSpec
from stablebip.series_prior import ExpansionSpec, PowerLaw


def scalar_gaussian(prior_var=2.0, g=1.0, noise_var=2.0):
    """Scalar linear-Gaussian problem: (spec, potential, G, noise).

    The alpha = 2 coefficient law has variance 2 gamma^2, so gamma is
    sqrt(prior_var / 2).
    """
    spec = ExpansionSpec(alpha=2.0, betas=0.0, gammas=[math.sqrt(prior_var / 2.0)],
                         deltas=[0.0], basis=BasisSpec("canonical", 1), truncation=1)
    G = np.array([[g]])
    noise = NoiseModel(np.array([[noise_var]]))
    return spec, gaussian_potential(ForwardModel(G), noise), G, noise


def cauchy_spec(n=16, basis="canonical", scale=1.0):
    return ExpansionSpec(alpha=1.0, betas=0.0, gammas=PowerLaw(scale, 2.0), deltas=0.0,
                         basis=BasisSpec(basis, n), truncation=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split()[0])):
            terminalreporter.write_line(line)
