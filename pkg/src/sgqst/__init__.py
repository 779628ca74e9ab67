"""Self-guided tomography of mixed qudit states by SPSA eigenvector extraction."""

from .core import (
    DensityReport, DimensionError, InvalidStateError, Spectrum, density_report,
    expectation, hermitian_eig, inner_product, normalized, psd_sqrt, validate_density,
)
from .harness import ExperimentConfig, ExperimentReport, emit_report, figure_preset, run_experiment
from .learner import LearnerConfig, TomographyResult, gains, learn_state
from .measurement import MeasurementDevice, NoiseModel, budget, depolarize, stochastic_matrix
from .metrics import infidelity, median, quantiles
from .mub import BasisSet, build_initializer_bases, select_initial_vector
from .randgen import ginibre_mixed_state, haar_random_pure, make_rng

__version__ = "0.1.0"
