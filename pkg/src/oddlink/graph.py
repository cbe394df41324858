"""Bipartite and unipartite graphs read from whitespace-separated edge lists.

Input lines look like ``<u> <v> [weight [timestamp]]``; lines starting
with ``%`` or ``#`` are comments.  Node labels are remapped to dense
0-based indices per partition in order of first appearance, and the
labels are kept so results can be reported in the original ids.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .sparse import SparseMatrix

__all__ = [
    "BipartiteGraph",
    "UnipartiteGraph",
    "SplitResult",
    "parse_bipartite",
    "parse_unipartite",
    "read_bipartite",
    "read_unipartite",
    "format_bipartite",
    "split_edges",
    "split_unipartite",
    "degree",
    "biadjacency",
    "block_adjacency",
    "adjacency",
]


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Unweighted bipartite graph ``G = (V + W, E)``.

    ``left`` and ``right`` are parallel index arrays, one entry per edge;
    ``timestamps`` is a parallel int array or None.
    """

    left_count: int
    right_count: int
    left: np.ndarray
    right: np.ndarray
    timestamps: np.ndarray = None
    left_labels: tuple = None
    right_labels: tuple = None
    left_degrees: np.ndarray = field(init=False, repr=False)
    right_degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        if left.shape != right.shape or left.ndim != 1:
            raise ValueError("left and right must be 1-d arrays of equal length")
        if len(left) and (left.min() < 0 or left.max() >= self.left_count
                          or right.min() < 0 or right.max() >= self.right_count):
            raise ValueError("edge endpoint out of range")
        if len(np.unique(left * self.right_count + right)) != len(left):
            raise ValueError("duplicate edges")
        ts = self.timestamps
        if ts is not None:
            ts = np.asarray(ts, dtype=np.int64)
            if ts.shape != left.shape:
                raise ValueError("timestamps must match edges")
        left_labels = self.left_labels
        if left_labels is None:
            left_labels = tuple(str(i) for i in range(self.left_count))
        right_labels = self.right_labels
        if right_labels is None:
            right_labels = tuple(str(i) for i in range(self.right_count))
        for name, value in [("left", left), ("right", right), ("timestamps", ts),
                            ("left_labels", tuple(left_labels)), ("right_labels", tuple(right_labels))]:
            object.__setattr__(self, name, value)
        object.__setattr__(self, "left_degrees", np.bincount(left, minlength=self.left_count))
        object.__setattr__(self, "right_degrees", np.bincount(right, minlength=self.right_count))

    @property
    def edge_count(self):
        return len(self.left)

    @property
    def node_count(self):
        return self.left_count + self.right_count

    @property
    def edges(self):
        """Edges as an ``(m, 2)`` array of (left, right) indices."""
        return np.column_stack([self.left, self.right])

    def subgraph(self, mask):
        """Same node sets, only the edges selected by ``mask``."""
        ts = None if self.timestamps is None else self.timestamps[mask]
        return BipartiteGraph(self.left_count, self.right_count, self.left[mask],
                              self.right[mask], ts, self.left_labels, self.right_labels)

    def transposed(self):
        """Swap the roles of the two partitions."""
        return BipartiteGraph(self.right_count, self.left_count, self.right, self.left,
                              self.timestamps, self.right_labels, self.left_labels)

    def neighbors(self, u):
        return np.sort(self.right[self.left == u])


@dataclass(frozen=True, eq=False)
class UnipartiteGraph:
    """Undirected simple graph; edges stored once each with ``u < v``."""

    node_count: int
    edges: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(e) and (e.min() < 0 or e.max() >= self.node_count):
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        e = np.sort(e, axis=1)
        if len(np.unique(e[:, 0] * self.node_count + e[:, 1])) != len(e):
            raise ValueError("duplicate edges")
        labels = self.labels
        if labels is None:
            labels = tuple(str(i) for i in range(self.node_count))
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def edge_count(self):
        return len(self.edges)

    def relabeled(self, perm):
        """Apply the node permutation ``i -> perm[i]``."""
        perm = np.asarray(perm)
        labels = [None] * self.node_count
        for i, p in enumerate(perm):
            labels[p] = self.labels[i]
        return UnipartiteGraph(self.node_count, perm[self.edges], tuple(labels))


@dataclass(frozen=True, eq=False)
class SplitResult:
    train: BipartiteGraph
    test_edges: np.ndarray
    seed: int
    by_time: bool


def _lines(stream):
    if isinstance(stream, str):
        return stream.splitlines()
    return stream


def _tokens(stream):
    for lineno, line in enumerate(_lines(stream), start=1):
        s = line.strip()
        if not s or s[0] in "%#":
            continue
        yield lineno, s.split()


def _parse_int(tok, lineno, what):
    try:
        return int(tok)
    except ValueError:
        try:
            value = float(tok)
        except ValueError:
            raise ParseError(f"bad {what} {tok!r}", lineno) from None
        if not math.isfinite(value):
            raise ParseError(f"bad {what} {tok!r}", lineno)
        return int(value)


class _Index(dict):
    def __missing__(self, key):
        self[key] = len(self)
        return self[key]


def parse_bipartite(stream, has_weight=False, has_timestamp=False, reject_weights=False):
    """Parse a bipartite edge list.

    Parameters
    ----------
    stream : iterable of str or str
        Lines of the edge list.
    has_weight : bool
        A weight column follows the two node columns.  Weights are read
        and discarded; only edge presence is kept.
    has_timestamp : bool
        A timestamp column (integer seconds) follows the weight column,
        or the node columns when there are no weights.
    reject_weights : bool
        Raise on any weight other than 1.

    Duplicate edges collapse to one; the earliest timestamp wins, and the
    collapsed edge sits at the position of its first occurrence.
    """
    need = 2 + bool(has_weight) + bool(has_timestamp)
    lefts, rights = _Index(), _Index()
    seen = {}
    order = []
    for lineno, tok in _tokens(stream):
        if len(tok) < need:
            raise ParseError(f"expected {need} columns, got {len(tok)}", lineno)
        if has_weight:
            try:
                w = float(tok[2])
            except ValueError:
                raise ParseError(f"bad weight {tok[2]!r}", lineno) from None
            if reject_weights and w != 1.0:
                raise ParseError(f"weighted edge ({tok[2]}) in presence-only input", lineno)
        ts = _parse_int(tok[need - 1], lineno, "timestamp") if has_timestamp else None
        key = (lefts[tok[0]], rights[tok[1]])
        if key in seen:
            if ts is not None and ts < seen[key]:
                seen[key] = ts
        else:
            seen[key] = ts
            order.append(key)
    if not order:
        raise ParseError("empty graph")
    edges = np.array(order, dtype=np.int64)
    ts = np.array([seen[k] for k in order], dtype=np.int64) if has_timestamp else None
    return BipartiteGraph(len(lefts), len(rights), edges[:, 0], edges[:, 1], ts,
                          tuple(lefts), tuple(rights))


def parse_unipartite(stream):
    """Parse an undirected edge list; reversed duplicates and self-loops are dropped.

    Extra columns after the two node ids are ignored.
    """
    nodes = _Index()
    seen = set()
    order = []
    for lineno, tok in _tokens(stream):
        if len(tok) < 2:
            raise ParseError(f"expected 2 columns, got {len(tok)}", lineno)
        a, b = nodes[tok[0]], nodes[tok[1]]
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            order.append(key)
    if not order:
        raise ParseError("empty graph")
    return UnipartiteGraph(len(nodes), np.array(order, dtype=np.int64), tuple(nodes))


def read_bipartite(path, **options):
    with open(path) as fh:
        return parse_bipartite(fh, **options)


def read_unipartite(path):
    with open(path) as fh:
        return parse_unipartite(fh)


def format_bipartite(g):
    """Serialize to the edge-list format, original labels, timestamps if present."""
    out = []
    for i in range(g.edge_count):
        cols = [g.left_labels[g.left[i]], g.right_labels[g.right[i]]]
        if g.timestamps is not None:
            cols += ["1", str(g.timestamps[i])]
        out.append("\t".join(cols))
    return "\n".join(out) + "\n"


def _test_mask(n_edges, fraction, seed, timestamps=None):
    if not 0 < fraction < 1:
        raise ValueError(f"fraction {fraction} not in (0, 1)")
    if fraction * n_edges < 1:
        raise ValueError(f"fraction {fraction} of {n_edges} edges selects nothing")
    mask = np.zeros(n_edges, dtype=bool)
    if timestamps is not None:
        n_test = math.ceil(fraction * n_edges - 1e-9)
        order = np.argsort(timestamps, kind="stable")
        mask[order[n_edges - n_test:]] = True
    else:
        n_test = math.floor(fraction * n_edges + 0.5)
        rng = np.random.default_rng(seed)
        mask[rng.choice(n_edges, size=n_test, replace=False)] = True
    if n_test >= n_edges:
        raise ValueError("split leaves no training edges")
    return mask


def split_edges(g, fraction, seed=1, by_time=False):
    """Withhold a fraction of the edges as a test set.

    With ``by_time`` the test set is the newest ``ceil(fraction * |E|)``
    edges, ties in time resolved by input order (later lines are newer).
    Otherwise ``round(fraction * |E|)`` edges are drawn uniformly without
    replacement using ``seed``.  The training graph keeps all nodes so
    indices stay aligned.
    """
    if by_time and g.timestamps is None:
        raise ValueError("time-ordered split needs timestamps")
    mask = _test_mask(g.edge_count, fraction, seed, g.timestamps if by_time else None)
    return SplitResult(g.subgraph(~mask), g.edges[mask], seed, by_time)


def split_unipartite(g, fraction, seed=1):
    """Random edge split of a unipartite graph into ``(train, test_edges)``."""
    mask = _test_mask(g.edge_count, fraction, seed)
    return UnipartiteGraph(g.node_count, g.edges[~mask], g.labels), g.edges[mask]


def degree(g, side, node):
    """Number of distinct neighbors of ``node`` on ``side`` ('left' or 'right')."""
    degrees = {"left": g.left_degrees, "right": g.right_degrees}[side]
    if not 0 <= node < len(degrees):
        raise IndexError(f"{side} node {node} out of range")
    return int(degrees[node])


def biadjacency(g):
    """The ``left_count x right_count`` 0/1 matrix B."""
    return SparseMatrix.from_coo((g.left_count, g.right_count), g.left, g.right)


def block_adjacency(g):
    """The symmetric adjacency matrix ``[[0, B], [B^T, 0]]``; right nodes follow left ones."""
    n = g.node_count
    right = g.right + g.left_count
    return SparseMatrix.from_coo((n, n), np.r_[g.left, right], np.r_[right, g.left])


def adjacency(g):
    """Symmetric 0/1 adjacency matrix of a unipartite graph."""
    u, v = g.edges[:, 0], g.edges[:, 1]
    return SparseMatrix.from_coo((g.node_count, g.node_count), np.r_[u, v], np.r_[v, u])
