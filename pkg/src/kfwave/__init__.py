"""Krein-Feller wave: spectra of fractal string operators and the
stochastic wave equations they drive."""

__version__ = "0.1.0"

from .measure import (  # noqa: F401
    Boundary,
    DeltaApproximant,
    DiscreteMeasure,
    ExponentSet,
    IfsSpec,
    PartitionLambdaN,
    cantor_spec,
    compute_exponents,
    discrete_measure,
    inner_product_with_approximant,
    lebesgue_spec,
    natural_weights,
    neighborhood,
    partition,
    solve_dimension,
    solve_spectral_exponent,
    validate_ifs,
    word_interval,
    word_measure,
)
from .spectral import (  # noqa: F401
    EigenSystem,
    PropagatorEvaluator,
    assemble_string,
    delta_error_decay,
    eigendecompose,
    eigenfunction_eval,
    propagator_eval,
    propagator_row_norm,
    resolvent_density,
    resolvent_matrix,
    solve_eigensystem,
    supnorm_growth_check,
)
from .spde import (  # noqa: F401
    DriftSpec,
    InitialData,
    NoisePlan,
    PathEnsemble,
    deterministic_part,
    moment_estimator,
    picard_solve,
    project_initial_data,
    simulate_paths,
    stochastic_convolution_variance,
)
from .regularity import (  # noqa: F401
    HoelderReport,
    LyapunovReport,
    estimate_spatial_hoelder,
    estimate_temporal_hoelder,
    exponent_inequality_check,
    lyapunov_estimate,
    predicted_exponents,
    spatial_pairs,
    summation_bound_check,
    temporal_exponent_base,
)
