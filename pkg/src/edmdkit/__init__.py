"""Finite-dimensional Koopman operator approximation.

Sampled and sampling-free (analytic) EDMD, spectral comparison, finite-horizon
prediction, and single-trajectory eigenmeasure extraction, with a CLI harness
for reproducible convergence studies.
"""

__version__ = "0.1.0"

from .analytic import default_quad_order, fit_analytic, transfer_matrix
from .data import (
    EmpiricalMeasure,
    SnapshotPair,
    empirical_project,
    generate_iid,
    generate_trajectory,
    read_snapshots_csv,
    write_snapshots_csv,
)
from .dictionary import (
    Dictionary,
    derivative,
    derivative_batch,
    evaluate,
    evaluate_batch,
    gram,
    parse_dictionary,
)
from .edmd import (
    KoopmanMatrix,
    apply_operator,
    fit_edmd,
    read_koopman_csv,
    residual_scale,
    theorem1_residual,
    write_koopman_csv,
)
from .errors import (
    ConfigError,
    DomainEscapeError,
    DomainEscapeWarning,
    EdmdkitError,
    EigensolverError,
    QuadratureSaturationWarning,
    RankDeficiencyError,
)
from .predict import (
    MonteCarloEval,
    PredictionResult,
    QuadratureEval,
    SweepRow,
    convergence_sweep,
    l2_error,
    observable_matrix,
    parse_eval_spec,
    predict,
)
from .spectral import (
    Eigenmeasure,
    PFResidual,
    SpectralDecomp,
    eig,
    eigenfunction_values,
    eigenmeasure_extract,
    evaluate_eigenfunction,
    hausdorff,
    oscillation_seminorm,
    pf_check,
    read_spectrum_csv,
    write_eigenmeasure_csv,
    write_spectrum_csv,
)
from .systems import (
    Domain,
    DynamicalSystem,
    Measure,
    QuadratureRule,
    apply,
    apply_batch,
    box,
    circle,
    gauss_rule,
    gaussian,
    iterate,
    parse_measure,
    parse_system,
    sample,
    uniform,
)
