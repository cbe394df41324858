"""Spectral transformation families and link-prediction scores.

A transformation ``f`` acts on the singular values of the biadjacency
matrix.  For an odd ``f``, applying it to the eigenvalues ``+-sigma`` of
the block adjacency matrix and reading off the top-right block gives

    score(u, w) = sum_i f(sigma_i) U[u, i] V[w, i]

so bipartite scores never need the full eigendecomposition.
"""

import math
from dataclasses import dataclass, fields
from typing import ClassVar

import numpy as np

from .errors import DomainError

__all__ = [
    "SpectralTransform",
    "Sinh",
    "OddNeumann",
    "RankReduction",
    "OddPolynomial",
    "NonnegOddPolynomial",
    "Exp",
    "FAMILIES",
    "eval_transform",
    "transform_from_record",
    "score",
    "score_row",
    "score_matrix",
    "top_n",
    "rank_candidates",
    "preferential_attachment",
    "common_neighbors",
    "taylor_weights",
]

#: largest argument accepted by sinh/exp before double overflow
MAX_EXP_ARG = 700.0


class SpectralTransform:
    """Base class; subclasses are frozen dataclasses of their parameters."""

    family: ClassVar[str]
    odd: ClassVar[bool] = True

    def apply(self, x, context=None):
        raise NotImplementedError

    def __call__(self, x, context=None):
        return self.apply(x, context)

    def to_record(self):
        """Key-value text record, one ``key=value`` per line."""
        lines = [f"family={self.family}"]
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(float(c)) for c in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"


def _arr(x):
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class Sinh(SpectralTransform):
    """``beta * sinh(alpha * x)``"""

    alpha: float
    beta: float = 1.0
    family: ClassVar[str] = "sinh"

    def apply(self, x, context=None):
        z = self.alpha * _arr(x)
        if np.any(np.abs(z) > MAX_EXP_ARG):
            raise DomainError(f"sinh argument exceeds {MAX_EXP_ARG}")
        return self.beta * np.sinh(z)


@dataclass(frozen=True)
class Exp(SpectralTransform):
    """``beta * exp(alpha * x)``; not odd, used only to test for bipartivity."""

    alpha: float
    beta: float = 1.0
    family: ClassVar[str] = "exp"
    odd: ClassVar[bool] = False

    def apply(self, x, context=None):
        z = self.alpha * _arr(x)
        if np.any(z > MAX_EXP_ARG):
            raise DomainError(f"exp argument exceeds {MAX_EXP_ARG}")
        return self.beta * np.exp(z)


@dataclass(frozen=True)
class OddNeumann(SpectralTransform):
    """``beta * alpha x / (1 - alpha^2 x^2)``, defined for ``|alpha x| < 1``."""

    alpha: float
    beta: float = 1.0
    family: ClassVar[str] = "neumann"

    def apply(self, x, context=None):
        z = self.alpha * _arr(x)
        if np.any(np.abs(z) >= 1):
            raise DomainError("odd von Neumann pole: |alpha * x| must be < 1")
        return self.beta * z / (1 - z * z)


@dataclass(frozen=True)
class RankReduction(SpectralTransform):
    """Keep ``beta * x`` for the ``rank`` largest values in ``context``, zero the rest.

    Values tied with the ``rank``-th largest are kept as well.
    """

    rank: int
    beta: float = 1.0
    family: ClassVar[str] = "reduction"

    def threshold(self, context):
        if context is None:
            raise ValueError("rank reduction needs the spectrum as context")
        mags = np.sort(np.abs(_arr(context)))[::-1]
        if len(mags) == 0:
            raise ValueError("empty spectrum")
        return mags[min(self.rank, len(mags)) - 1]

    def apply(self, x, context=None):
        x = _arr(x)
        return np.where(np.abs(x) >= self.threshold(context), self.beta * x, 0.0)


@dataclass(frozen=True)
class OddPolynomial(SpectralTransform):
    """``sum_j coeffs[j] * x^(2j+1)``"""

    coeffs: tuple
    family: ClassVar[str] = "poly"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def apply(self, x, context=None):
        x = _arr(x)
        # Horner in x^2 keeps f(-x) == -f(x) bit for bit
        sq = x * x
        acc = np.zeros_like(x)
        for c in reversed(self.coeffs):
            acc = acc * sq + c
        return x * acc


@dataclass(frozen=True)
class NonnegOddPolynomial(OddPolynomial):
    family: ClassVar[str] = "nnpoly"

    def __post_init__(self):
        super().__post_init__()
        if any(c < 0 for c in self.coeffs):
            raise ValueError("nonnegative polynomial with a negative coefficient")


FAMILIES = {cls.family: cls for cls in
            (Sinh, OddNeumann, RankReduction, OddPolynomial, NonnegOddPolynomial, Exp)}


def transform_from_record(text):
    """Inverse of :meth:`SpectralTransform.to_record`; unknown keys are ignored."""
    kv = {}
    for line in text.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
    try:
        cls = FAMILIES[kv["family"]]
    except KeyError:
        raise ValueError(f"unknown transform family {kv.get('family')!r}") from None
    args = {}
    for f in fields(cls):
        if f.name not in kv:
            continue
        raw = kv[f.name]
        if f.name == "coeffs":
            args[f.name] = tuple(float(c) for c in raw.split(",") if c)
        elif f.name == "rank":
            args[f.name] = int(raw)
        else:
            args[f.name] = float(raw)
    return cls(**args)


def eval_transform(t, sigma, context=None):
    """Scalar ``f(sigma)``."""
    return float(t.apply(np.array([sigma]), context)[0])


def _spectrum(model, t):
    if not t.odd:
        raise DomainError(f"{t.family} is not odd and cannot score bipartite pairs")
    s = model.singular_values
    return t.apply(s, context=s)


def score(model, t, u, w):
    """Score of the pair (left ``u``, right ``w``) under transformation ``t``."""
    rows, cols = model.shape
    if not (0 <= u < rows and 0 <= w < cols):
        raise IndexError(f"pair ({u}, {w}) out of range for {model.shape}")
    f = _spectrum(model, t)
    return float((model.left_vectors[u] * f) @ model.right_vectors[w])


def score_row(model, t, u, f=None):
    """Scores of left node ``u`` against every right node."""
    if f is None:
        f = _spectrum(model, t)
    return model.right_vectors @ (model.left_vectors[u] * f)


def score_matrix(model, t):
    """Dense ``rows x cols`` score matrix; meant for small graphs."""
    f = _spectrum(model, t)
    return (model.left_vectors * f) @ model.right_vectors.T


def rank_candidates(scores, candidates):
    """Order ``candidates`` by descending score, ties by ascending index."""
    candidates = np.asarray(candidates, dtype=np.int64)
    order = np.lexsort((candidates, -scores[candidates]))
    return candidates[order]


def top_n(model, t, u, n, exclude=()):
    """The ``n`` best right nodes for ``u`` outside ``exclude``, as (index, score) pairs."""
    if n < 1:
        raise ValueError("n must be positive")
    scores = score_row(model, t, u)
    mask = np.ones(len(scores), dtype=bool)
    mask[np.fromiter(exclude, dtype=np.int64)] = False
    ranked = rank_candidates(scores, np.flatnonzero(mask))[:n]
    return [(int(w), float(scores[w])) for w in ranked]


def preferential_attachment(g, u, w):
    """``d(u) d(w) / (2|E|)``"""
    if g.edge_count == 0:
        raise ValueError("preferential attachment is undefined without edges")
    if not (0 <= u < g.left_count and 0 <= w < g.right_count):
        raise IndexError(f"pair ({u}, {w}) out of range")
    return g.left_degrees[u] * g.right_degrees[w] / (2 * g.edge_count)


def common_neighbors(g, a, b):
    """Number of common neighbors of block-graph nodes ``a`` and ``b``.

    Nodes ``0 .. left_count-1`` are the left partition and the right
    partition follows.
    """
    def nbrs(x):
        if x < g.left_count:
            return set((g.right[g.left == x] + g.left_count).tolist())
        return set(g.left[g.right == x - g.left_count].tolist())

    return len(nbrs(a) & nbrs(b))


def taylor_weights(t, max_power):
    """Series coefficients of an odd transformation at powers 1, 3, ..., <= max_power.

    These are the weights given to paths of each odd length.
    """
    out = []
    for p in range(1, max_power + 1, 2):
        if isinstance(t, Sinh):
            c = t.alpha ** p / math.factorial(p)
        elif isinstance(t, OddNeumann):
            c = t.alpha ** p
        else:
            raise ValueError(f"no Taylor weights for {t.family}")
        out.append((p, t.beta * c))
    return out
