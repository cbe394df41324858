"""Link prediction in bipartite networks with odd spectral transformations."""

__version__ = "0.1.0"

from .bipartivity import BipartivityReport, assess
from .errors import ConvergenceError, DomainError, FitError, ParseError
from .evaluation import EvalConfig, EvalReport, average_precision, evaluate_method, run_experiment
from .graph import (
    BipartiteGraph,
    UnipartiteGraph,
    biadjacency,
    block_adjacency,
    degree,
    parse_bipartite,
    parse_unipartite,
    read_bipartite,
    read_unipartite,
    split_edges,
)
from .kernels import (
    Exp,
    NonnegOddPolynomial,
    OddNeumann,
    OddPolynomial,
    RankReduction,
    Sinh,
    common_neighbors,
    eval_transform,
    preferential_attachment,
    score,
    taylor_weights,
    top_n,
)
from .learning import FitReport, FitTargets, build_targets, fit, fit_all
from .sparse import EigenModel, SparseMatrix, SvdModel, extremal_eigs, spmv, truncated_svd
