"""Graph propagation engine: lazy smoothing / inverse-sharpening convolutions
for semi-supervised node classification and unsupervised embeddings, with a
supervised embedding-correction driver, diagnostics, and a small CLI.

The hot kernels (sparse matmul, negative-pair sampling, dense symmetric
eigensolver, PCG block generation) have a compiled extension and a pure
NumPy/SciPy fallback selected at import time; set GRAPHPROP_BACKEND to
``compiled``, ``fallback`` or ``auto`` (default) before import to choose.
"""

from .classify import (
    AdamState,
    LabelData,
    LinearModel,
    evaluate_accuracy,
    gradient_step_w,
    supervised_loss,
    supervised_residual,
    train_logreg,
)
from .evaluate import (
    KarateReport,
    ReconstructionReport,
    SpectralReport,
    depth_study,
    graph_reconstruction,
    karate_verification,
    verify_igc_filter,
)
from .graph import (
    CsrMatrix,
    DataFormatError,
    Dataset,
    NegativeGraph,
    PropagationOperator,
    SamplingError,
    SparseGraph,
    build_propagation_operator,
    load_dataset,
    negative_graph_from_edges,
    resolve_dataset_path,
    sample_negative_graph,
    spmm,
)
from .kernels import BACKEND
from .methods import (
    METHOD_NAMES,
    IterationTrace,
    IterRecord,
    MethodConfig,
    NumericalDivergenceError,
    propagate_chain,
    run_ggc,
    run_ggcm,
    run_method,
    run_ogc,
    run_s2gc,
    run_sgc,
)
from .numerics import (
    EigenReport,
    matmul,
    power_iteration_radius,
    row_softmax,
    symmetric_eigen,
)
from .operators import (
    LgcConfig,
    LossBreakdown,
    compute_losses,
    igc_step,
    lgc_step,
    oversmoothing_indicator,
    seb_step,
)
from .rng import Pcg32, splitmix64

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "BACKEND",
    "CsrMatrix",
    "DataFormatError",
    "Dataset",
    "EigenReport",
    "IterRecord",
    "IterationTrace",
    "KarateReport",
    "LabelData",
    "LgcConfig",
    "LinearModel",
    "LossBreakdown",
    "METHOD_NAMES",
    "MethodConfig",
    "NegativeGraph",
    "NumericalDivergenceError",
    "Pcg32",
    "PropagationOperator",
    "ReconstructionReport",
    "SamplingError",
    "SparseGraph",
    "SpectralReport",
    "build_propagation_operator",
    "compute_losses",
    "depth_study",
    "evaluate_accuracy",
    "gradient_step_w",
    "graph_reconstruction",
    "igc_step",
    "karate_verification",
    "lgc_step",
    "load_dataset",
    "matmul",
    "negative_graph_from_edges",
    "oversmoothing_indicator",
    "power_iteration_radius",
    "propagate_chain",
    "resolve_dataset_path",
    "row_softmax",
    "run_ggc",
    "run_ggcm",
    "run_method",
    "run_ogc",
    "run_s2gc",
    "run_sgc",
    "sample_negative_graph",
    "seb_step",
    "spmm",
    "splitmix64",
    "supervised_loss",
    "supervised_residual",
    "symmetric_eigen",
    "train_logreg",
    "verify_igc_filter",
]
