"""
Exact posterior state occupancy for partially observed continuous-time
Markov chains, with a discrete-time reference algorithm, an exact
simulator and closed-form special cases.
"""
__version__ = "0.1.0"

from .markov import (
    RateModel,
    SpectralData,
    TruncatedSubmatrix,
    eigendecompose,
    matrix_exponential,
    stationary_distribution,
    truncate,
    validate_generator,
)
from .simulate import (
    ObservationTrace,
    SampledObservations,
    Trajectory,
    gillespie,
    observe,
    sample,
)
from .discrete import DiscretePosterior, discrete_transition_matrix, forward_backward
from .continuous import (
    PosteriorFunction,
    SegmentSolution,
    Sojourn,
    backward_pass,
    forward_pass,
    posterior,
    query,
    query_dense,
    query_many,
    segment,
)
from .analytic import (
    ClosedFormPosterior,
    SecondOrderCheck,
    loop_posterior,
    normalization_drift,
    second_order_residual,
    symmetric_chain_posterior,
)
from .models import cftr, chain3, load_model, loop3
