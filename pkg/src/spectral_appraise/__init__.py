"""Data subset appraisal and selection via matrix-spectral set objectives.

The library keeps the Gram matrix of the selected rows in factored form and
answers marginal-gain queries through rank-1 eigenvalue updates, so greedy
selection over spectral diversity objectives (entropy, log-determinant,
concave power families) runs orders of magnitude faster than re-solving a
dense eigenvalue problem per candidate.  Facility location over sparse
similarities and size-based value laws round out the objective zoo.
"""

from .classic import (
    ClusterSizeLaw,
    EpochAwareLaw,
    FacilityLocation,
    PowerSizeLaw,
    SparseSimilarity,
    build_similarity,
    scaling_law_value,
)
from .eigen import (
    SpectralState,
    commit_rank_one,
    deflate,
    dense_eigen_oracle,
    eigenvalues_after_rank_one,
    householder_toward_axis,
    loewner_weights,
    secular_roots,
    SecularProblem,
)
from .errors import (
    DataFormatError,
    InvalidArgumentError,
    NumericalError,
    PsdViolationError,
    UnsupportedPhiError,
)
from .objectives import (
    ModularObjective,
    OracleSpectralObjective,
    SpectralObjective,
    density_normalize,
    vendi_score,
)
from .optimize import (
    Cardinality,
    PartitionMatroid,
    SelectionResult,
    brute_force_opt,
    greedy_max,
    heuristic_greedy_min,
    stochastic_greedy,
    stratified_random,
)
from .phi import (
    PhiSpec,
    loewner_matrix,
    make_phi,
    matrix_antitone_counterexample,
    min_eigenvalue,
    neg_derivative_loewner,
    weak_dr_bound,
)

__version__ = "0.1.0"

__all__ = [
    "Cardinality",
    "ClusterSizeLaw",
    "DataFormatError",
    "EpochAwareLaw",
    "FacilityLocation",
    "InvalidArgumentError",
    "ModularObjective",
    "NumericalError",
    "OracleSpectralObjective",
    "PartitionMatroid",
    "PhiSpec",
    "PowerSizeLaw",
    "PsdViolationError",
    "SecularProblem",
    "SelectionResult",
    "SparseSimilarity",
    "SpectralObjective",
    "SpectralState",
    "UnsupportedPhiError",
    "brute_force_opt",
    "build_similarity",
    "commit_rank_one",
    "deflate",
    "dense_eigen_oracle",
    "density_normalize",
    "eigenvalues_after_rank_one",
    "greedy_max",
    "heuristic_greedy_min",
    "householder_toward_axis",
    "loewner_matrix",
    "loewner_weights",
    "make_phi",
    "matrix_antitone_counterexample",
    "min_eigenvalue",
    "neg_derivative_loewner",
    "scaling_law_value",
    "secular_roots",
    "stochastic_greedy",
    "stratified_random",
    "vendi_score",
    "weak_dr_bound",
]
