"""Discriminative clustering by maximising generalised mutual information.

Shallow models (categorical table, logistic regression, MLP) are trained
to maximise a statistical distance between cluster-conditional data
distributions, either against the pooled data (one-vs-all) or against
each other (one-vs-one).  The distance is an f-divergence (KL, total
variation, squared Hellinger, alpha family) or a geometry-aware metric
(kernel MMD, exact Wasserstein-1 over a ground distance).
"""

from ._accel import HAVE_NUMBA, NUMBA_ENV_FLAG, USE_NUMBA, active_impl
from .core import (
    MASS_EPS,
    ROW_SUM_TOL,
    as_data_matrix,
    as_label_vector,
    as_soft_assignment,
    cluster_weights,
    hard_labels,
    marginal,
    nonempty_clusters,
)
from .errors import (
    ConfigError,
    Degenerate,
    DimensionMismatch,
    DomainError,
    EmptyCluster,
    GeminiError,
    LengthMismatch,
    NotADistance,
    NotAKernel,
    UnsupportedAlpha,
)
from .eval import (
    BoundaryDemoResult,
    ConsensusMatrix,
    ari,
    binary_entropy,
    boundary_demo,
    boundary_demo_mc,
    consensus_matrix,
    estimator_bias,
    mixture_beta,
    pac_score,
    renyi_entropy,
)
from .fdiv import (
    KL,
    OVA,
    OVO,
    SQUARED_HELLINGER,
    TOTAL_VARIATION,
    FDivKind,
    alpha_gemini_ova,
    alpha_gemini_ova_grad,
    alpha_kind,
    fdiv_gemini,
    fdiv_gemini_grad,
    fdiv_kind,
    fdiv_ovo_generic,
)
from .geometry import (
    GeometryMatrix,
    GeometrySpec,
    build_distance,
    build_kernel,
    load_geometry_csv,
    shortest_path_distance,
)
from .ipm import (
    PairSamplePlan,
    mmd_gemini,
    mmd_gemini_grad,
    mmd_mean_embedding_oracle,
    wasserstein_gemini,
    wasserstein_gemini_grad,
    wasserstein_ovo_sampled,
)
from .models import (
    ModelParams,
    ModelSpec,
    backward,
    forward,
    init_model,
    load_checkpoint,
    save_checkpoint,
)
from .train import (
    AdamHyper,
    HistoryRow,
    TrainConfig,
    TrainHistory,
    adam_update,
    parse_objective,
    train,
)
from .transport import (
    TransportProblem,
    TransportSolution,
    exact_emd,
    solve_emd,
    wasserstein_1d_oracle,
)

__version__ = "0.1.0"
