"""Gene-selection toolkit: binary horse-herd search with transfer
functions, an MRMR prefilter, built-in cross-validated classifiers, and
nonparametric rank statistics for comparing optimizers.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BadM,
    BadShape,
    ClassTooSmall,
    DimensionMismatch,
    EmptyFile,
    EmptyMask,
    EmptySet,
    HerdSelectError,
    InconsistentRanks,
    LengthMismatch,
    MalformedRow,
    NonFiniteVelocity,
    NonNumericCell,
    SingleClass,
    TooShort,
)
from .dataset import (  # noqa: F401
    Dataset,
    DiscretizedDataset,
    FoldPlan,
    GeneMask,
    discretize,
    load_csv,
    make_synthetic,
    stratified_k_fold,
    subset,
    write_csv,
)
from .classifiers import (  # noqa: F401
    ClassifierSpec,
    ConfusionMatrix,
    MetricReport,
    confusion,
    cross_validate,
    fit_predict,
    metrics,
)
from .filters import (  # noqa: F401
    MrmrRanking,
    entropy,
    mrmr_select,
    mutual_information,
    redundancy,
    relevance,
)
from .hoa import (  # noqa: F401
    AgeClass,
    BehaviorCoeffs,
    HerdState,
    HoaConfig,
    age_class_counts,
    assign_age_classes,
    defense_term,
    grazing_term,
    group_means,
    hierarchy_term,
    horse_velocity,
    imitation_term,
    optimize,
    rastrigin,
    roaming_term,
    sociability_term,
    sphere,
    velocity_update,
)
from .binarize import (  # noqa: F401
    S_FAMILY,
    TF_TAGS,
    V_FAMILY,
    BitUpdateOutcome,
    binarize_s,
    binarize_v,
    single_point_crossover,
    tf_value,
    x_shaped_update,
)
from .select import (  # noqa: F401
    RepeatResult,
    SelectionResult,
    SelectorConfig,
    export_result,
    fitness,
    load_result,
    objective_value,
    result_from_dict,
    result_to_dict,
    run_selection,
)
from .stats import (  # noqa: F401
    RankMatrix,
    average_ranks,
    chi2_sf,
    friedman_statistic,
    normal_two_sided_p,
    posthoc_z,
    regularized_gamma_upper,
)
from .report import (  # noqa: F401
    plot_convergence,
    plot_tf_comparison,
)
