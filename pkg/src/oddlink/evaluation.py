"""Holdout evaluation by mean average precision.

Protocol: withhold a fraction of the edges (the newest ones when the
data is timestamped), split the remaining training edges again to learn
each transformation by curve fitting, then score every method on the
full training set and rank, for each user with test edges, all items the
user is not yet connected to.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import BipartiteGraph, biadjacency, read_bipartite, split_edges
from .kernels import FAMILIES, rank_candidates, score_row
from .learning import DEFAULT_DEGREE, build_targets, fit_all
from .sparse import SparseMatrix, truncated_svd

__all__ = [
    "EvalConfig",
    "EvalReport",
    "average_precision",
    "per_user_ap",
    "evaluate_method",
    "spectral_scorer",
    "pref_scorer",
    "run_experiment",
    "format_table",
    "format_csv",
    "TABLE_METHODS",
]

log = logging.getLogger(__name__)

#: column order of the results table
TABLE_METHODS = ("poly", "nnpoly", "sinh", "reduction", "neumann", "pref")


@dataclass
class EvalConfig:
    test_fraction: float = 0.30
    inner_fraction: float = 0.30
    seed: int = 1
    k: int = 32
    candidate_cap: int = None
    candidate_ratio: float = None
    methods: tuple = TABLE_METHODS
    users: str = "left"
    degree: int = DEFAULT_DEGREE
    by_time: bool = None
    threads: int = 1

    def __post_init__(self):
        for name in ("test_fraction", "inner_fraction"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name}={value} not in (0, 1)")
        if self.users not in ("left", "right"):
            raise ValueError("users must be 'left' or 'right'")
        unknown = [m for m in self.methods if m != "pref" and m not in FAMILIES]
        if unknown or "exp" in self.methods:
            raise ValueError(f"unknown or non-predictive methods: {unknown or ['exp']}")
        self.methods = tuple(self.methods)


@dataclass
class EvalReport:
    dataset: str
    nodes: int
    edges: int
    maps: dict
    params: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    rank: int = None
    seed: int = None
    users_evaluated: int = 0
    users_skipped: int = 0
    transform_reused: bool = True


def average_precision(ranked, relevant):
    """Average of the precision at each rank where a relevant item appears.

    Relevant items missing from ``ranked`` contribute zero.
    """
    relevant = set(relevant)
    if not relevant:
        raise ValueError("average precision needs at least one relevant item")
    ranked = list(ranked)
    if len(set(ranked)) != len(ranked):
        raise ValueError("ranked list contains duplicates")
    hits = 0
    total = 0.0
    for pos, item in enumerate(ranked, start=1):
        if item in relevant:
            hits += 1
            total += hits / pos
    return total / len(relevant)


def _ap_sorted(flags, n_relevant):
    hits = np.cumsum(flags)
    pos = np.flatnonzero(flags)
    return float(np.sum(hits[pos] / (pos + 1))) / n_relevant


def per_user_ap(train, test_edges, scorer, candidate_cap=None, seed=1, candidate_ratio=None):
    """Average precision for every left node with at least one test edge.

    ``scorer(u)`` returns scores for all right nodes.  Candidates are the
    right nodes not adjacent to ``u`` in ``train``; with ``candidate_cap``
    they are subsampled (seeded per user) but always keep the test items.
    ``candidate_ratio`` instead sizes each user's pool as the test items
    plus ``round(ratio * n_test)`` sampled non-test candidates.

    Returns ``(users, aps, skipped)`` with users in ascending order.
    """
    test_edges = np.asarray(test_edges, dtype=np.int64).reshape(-1, 2)
    B = biadjacency(train)
    by_user = {}
    for u, w in test_edges:
        by_user.setdefault(int(u), []).append(int(w))
    users, aps, skipped = [], [], 0
    for u in sorted(by_user):
        relevant = np.unique(by_user[u])
        mask = np.ones(train.right_count, dtype=bool)
        mask[B.row(u)] = False
        candidates = np.flatnonzero(mask)
        cap = candidate_cap
        if candidate_ratio is not None:
            cap = len(relevant) + math.floor(candidate_ratio * len(relevant) + 0.5)
        if cap is not None and len(candidates) > cap:
            others = np.setdiff1d(candidates, relevant)
            rng = np.random.default_rng([seed, u])
            take = max(cap - len(relevant), 0)
            candidates = np.union1d(relevant, rng.choice(others, size=take, replace=False))
        if len(candidates) == 0:
            skipped += 1
            continue
        ranked = rank_candidates(np.asarray(scorer(u), dtype=np.float64), candidates)
        flags = np.isin(ranked, relevant)
        users.append(u)
        aps.append(_ap_sorted(flags, len(relevant)))
    return users, aps, skipped


def evaluate_method(train, test_edges, scorer, config=None):
    """Mean average precision over users (left nodes) present in the test set."""
    config = config or EvalConfig()
    users, aps, _ = per_user_ap(train, test_edges, scorer, config.candidate_cap, config.seed,
                                config.candidate_ratio)
    if not users:
        raise ValueError("no test users to evaluate")
    return math.fsum(aps) / len(aps)


def spectral_scorer(model, transform):
    f = transform.apply(model.singular_values, context=model.singular_values)
    return lambda u: score_row(model, transform, u, f=f)


def pref_scorer(g):
    """Preferential attachment as a per-user scorer."""
    two_m = 2 * g.edge_count
    right = g.right_degrees.astype(np.float64)
    return lambda u: g.left_degrees[u] * right / two_m


def _edges_matrix(shape, edges):
    edges = np.asarray(edges).reshape(-1, 2)
    return SparseMatrix.from_coo(shape, edges[:, 0], edges[:, 1])


def run_experiment(dataset, config=None, name=None, has_weight=False, has_timestamp=False):
    """Run the full holdout protocol on one dataset.

    Parameters
    ----------
    dataset : str or BipartiteGraph
        Edge-list path, or an already parsed graph.
    config : EvalConfig
    name : str, optional
        Dataset name for the report; defaults to the path.

    Returns
    -------
    EvalReport
    """
    config = config or EvalConfig()
    clock = {}
    t0 = time.perf_counter()
    if isinstance(dataset, BipartiteGraph):
        g = dataset
        name = name or "graph"
    else:
        g = read_bipartite(dataset, has_weight=has_weight, has_timestamp=has_timestamp)
        name = name or str(dataset)
    if config.users == "right":
        g = g.transposed()
    clock["parse"] = time.perf_counter() - t0

    by_time = config.by_time if config.by_time is not None else g.timestamps is not None
    outer = split_edges(g, config.test_fraction, config.seed, by_time)
    report = EvalReport(name, g.node_count, g.edge_count, {}, seed=config.seed)
    k = min(config.k, g.left_count, g.right_count)
    report.rank = k

    spectral = [m for m in config.methods if m != "pref"]
    transforms = {}
    if spectral:
        t0 = time.perf_counter()
        inner = split_edges(outer.train, config.inner_fraction, config.seed, by_time)
        inner_model = truncated_svd(biadjacency(inner.train), k, seed=config.seed)
        holdout = _edges_matrix(inner_model.shape, inner.test_edges)
        targets = build_targets(inner_model, holdout)
        for fr in fit_all(spectral, targets, threads=config.threads, degree=config.degree):
            if fr.error:
                report.errors[fr.family] = fr.error
            else:
                transforms[fr.family] = fr.transform
                report.params[fr.family] = fr.transform.to_record().strip().replace("\n", ";")
        clock["learn"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        model = truncated_svd(biadjacency(outer.train), k, seed=config.seed)
        clock["svd"] = time.perf_counter() - t0

    for method in config.methods:
        t0 = time.perf_counter()
        report.maps[method] = None
        try:
            if method == "pref":
                scorer = pref_scorer(outer.train)
            elif method in transforms:
                scorer = spectral_scorer(model, transforms[method])
            else:
                continue
            users, aps, skipped = per_user_ap(outer.train, outer.test_edges, scorer,
                                              config.candidate_cap, config.seed,
                                              config.candidate_ratio)
            if not users:
                raise ValueError("no test users to evaluate")
            report.maps[method] = math.fsum(aps) / len(aps)
            report.users_evaluated, report.users_skipped = len(users), skipped
        except (ValueError, ArithmeticError) as exc:
            report.errors[method] = str(exc)
        clock[f"map:{method}"] = time.perf_counter() - t0
        log.info("%s %s MAP=%s", name, method, report.maps[method])
    report.timing = clock
    return report


def _fmt(x):
    return "nan" if x is None else f"{x:.6g}"


def format_csv(reports, methods=None):
    methods = methods or list(reports[0].maps)
    rows = [",".join(["dataset", "nodes", "edges", *methods])]
    for r in reports:
        rows.append(",".join([r.dataset, str(r.nodes), str(r.edges),
                              *(_fmt(r.maps.get(m)) for m in methods)]))
    return "\n".join(rows) + "\n"


def format_table(reports, methods=None):
    """Aligned plain-text table, one row per dataset."""
    methods = methods or list(reports[0].maps)
    header = ["Dataset", "Nodes", "Edges", *methods]
    body = [[r.dataset, f"{r.nodes:,}", f"{r.edges:,}", *(_fmt(r.maps.get(m)) for m in methods)]
            for r in reports]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = []
    for j, row in enumerate([header, *body]):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
