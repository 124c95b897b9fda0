"""Geometric quantum speed limits under contractive Riemannian metrics.

A library and CLI for computing evolution path lengths, geodesic lower
bounds, tightness indicators, and bound times for qubit dynamics, with
closed-form oracles for three canonical noise channels.
"""

from .channels import (
    AmplitudeDamping,
    AnalyticSpectrum,
    ParallelDephasing,
    TransversalDephasing,
    UnitaryChannel,
    ad_analytic_fq,
    ad_spectrum,
    evolve,
    pd_analytic_fq,
    pd_spectrum,
    state_derivative,
    td_plus_fq,
    td_smatrix,
    unitary_generator,
)
from .engine import (
    BoundResult,
    QSLReport,
    QuadratureConfig,
    best_metric,
    geodesic_length,
    mt_bound,
    path_length,
    skew_information,
    symmetrized_covariance,
    tightness,
    variance,
    wy_bound,
)
from .errors import (
    DegenerateEndpointError,
    DimensionError,
    DomainError,
    GeodesicUnknownError,
    MetricDivergenceError,
    QslError,
    QuadratureError,
    SingularPointError,
    ValidationError,
)
from .mcmetric import (
    MINIMAL,
    QUANTUM_FISHER,
    WIGNER_YANASE,
    MCFunction,
    MetricSplit,
    MetricTensor,
    c_kernel,
    custom_mc_function,
    ds2_from_drho,
    eval_f,
    metric_by_kind,
    metric_tensor,
    unitary_metric,
)
from .qstate import (
    BlochVector,
    DensityOperator,
    SpectralDecomposition,
    affinity,
    fidelity,
    from_bloch,
    qubit_affinity,
    qubit_fidelity,
    spectral_decompose,
    to_bloch,
)

__version__ = "0.1.0"
