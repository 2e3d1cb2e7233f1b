"""Learning simplex-constrained linear utilities from pairwise comparisons."""

from .active import ActiveRunReport, active_noise_free, active_noisy, query_budget
from .core import Dataset, Embedding, LabeledExample, QueryPair, WeightVector, embed, invert, make_pair
from .errors import (
    DomainError,
    LearnerAbort,
    NoPreimageError,
    NumericalError,
    PreflearnError,
    UnsupportedNoiseError,
    UsageError,
)
from .geometry import SimplexFrame, VersionSpace, build_query, initial_version_space, project_to_simplex
from .metrics import CovarianceMatrix, covariance_seminorm, e2_distance, estimate_e1, min_eigenvalue
from .noise import NoiseModel, check_inverse_poly_bound, sample_flip, strong_convexity_gamma
from .oracle import Oracle
from .passive import MleSettings, fit_erm_noise_free, fit_mle, loss_and_gradient

__version__ = "0.1.0"
