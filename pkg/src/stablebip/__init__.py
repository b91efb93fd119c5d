"""Stable-law series priors for Bayesian inverse problems.

Sampling of alpha-stable laws, random series priors in quasi-Banach sequence
spaces, importance-weighted posteriors, Hellinger/TV distances between them,
MAP and MCMC estimation, and well-posedness / mesh-refinement studies.
"""

__version__ = "0.1.0"

from .errors import StableBIPError  # noqa: E402
from .stable_dist import StableParams, sample_stable  # noqa: E402
from .quasi_banach import BasisSpec, QuasinormSpace, lp_quasinorm, synthesis  # noqa: E402
from .series_prior import (ExpansionSpec, ExponentialLaw, PowerLaw, sample_prior,  # noqa: E402
                           validate_theorem1)
from .posterior_core import (ForwardModel, NoiseModel, Potential, build_posterior,  # noqa: E402
                             gaussian_potential)
from .prob_metrics import hellinger, total_variation  # noqa: E402
from .inference import ChainConfig, Regulariser, map_estimate, mh_sample  # noqa: E402
from .wellposedness import (conjugate_posterior_oracle, discretisation_invariance_study,  # noqa: E402
                            hellinger_lipschitz_scan)
from .deconvolution import make_deconvolution_family  # noqa: E402

__all__ = [
    "__version__",
    "StableBIPError",
    "StableParams",
    "sample_stable",
    "BasisSpec",
    "QuasinormSpace",
    "lp_quasinorm",
    "synthesis",
    "ExpansionSpec",
    "PowerLaw",
    "ExponentialLaw",
    "sample_prior",
    "validate_theorem1",
    "ForwardModel",
    "NoiseModel",
    "Potential",
    "build_posterior",
    "gaussian_potential",
    "hellinger",
    "total_variation",
    "ChainConfig",
    "Regulariser",
    "map_estimate",
    "mh_sample",
    "conjugate_posterior_oracle",
    "discretisation_invariance_study",
    "hellinger_lipschitz_scan",
    "make_deconvolution_family",
]
