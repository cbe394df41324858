"""Learning transformation parameters by one-dimensional curve fitting.

The observed spectral transformation is a list of pairs ``(sigma_i, d_i)``:
``sigma_i`` is a singular value of the training biadjacency matrix and
``d_i = u_i^T (B_train + B_holdout) v_i`` measures how strongly the held-out
edges line up with that singular direction.  Each family is fitted to
these points by least squares.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError
from .kernels import (
    Exp,
    NonnegOddPolynomial,
    OddNeumann,
    OddPolynomial,
    RankReduction,
    Sinh,
)
from .nnls import nnls

__all__ = [
    "FitTargets",
    "FitReport",
    "build_targets",
    "fit",
    "fit_all",
    "golden_section",
    "closed_form_beta",
    "DEFAULT_DEGREE",
]

DEFAULT_DEGREE = 3
GRID_SIZE = 200
NEUMANN_MARGIN = 1e-3
REFINE_TOL = 1e-10
# search ranges for alpha * max|sigma|
ALPHA_RANGE = {
    "sinh": (1e-3, 30.0),
    "exp": (1e-3, 30.0),
    "neumann": (1e-3, 1 - NEUMANN_MARGIN),
}

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class FitTargets:
    sigma: np.ndarray
    targets: np.ndarray
    source_rank: int

    def __len__(self):
        return len(self.sigma)


@dataclass(frozen=True, eq=False)
class FitReport:
    """A fitted transformation, or the reason a family could not be fitted."""

    family: str
    transform: object
    residual: float
    targets: FitTargets = field(repr=False)
    error: str = None

    def fitted_values(self):
        s = self.targets.sigma
        return self.transform.apply(s, context=s)

    def to_record(self):
        lines = [self.transform.to_record().rstrip("\n")] if self.transform else [f"family={self.family}"]
        lines.append(f"residual={self.residual!r}")
        lines.append(f"pairs={len(self.targets)}")
        lines.append(f"source_rank={self.targets.source_rank}")
        if self.error:
            lines.append(f"error={self.error}")
        return "\n".join(lines) + "\n"

    def curve_csv(self):
        """CSV of ``sigma, target, fitted`` rows."""
        rows = ["sigma,target,fitted"]
        fitted = self.fitted_values()
        for s, d, f in zip(self.targets.sigma, self.targets.targets, fitted):
            rows.append(f"{s!r},{d!r},{f!r}")
        return "\n".join(rows) + "\n"


def build_targets(train_model, holdout):
    """Pair each training singular value with its holdout-augmented projection.

    ``d_i = sigma_i + u_i^T H v_i``, which equals ``u_i^T (B_train + H) v_i``
    for converged triplets.
    """
    if holdout.shape != train_model.shape:
        raise ValueError(f"holdout shape {holdout.shape} != model shape {train_model.shape}")
    u, v = train_model.left_vectors, train_model.right_vectors
    proj = np.einsum("ij,ij->j", u, holdout.matmat(v))
    sigma = train_model.singular_values.copy()
    return FitTargets(sigma, sigma + proj, train_model.rank)


def golden_section(f, a, b, tol=1e-6):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def closed_form_beta(g, d, positive=False):
    """Least-squares scale for ``beta * g ~ d``."""
    gg = float(g @ g)
    if gg == 0:
        return 0.0
    beta = float(g @ d) / gg
    return max(beta, 0.0) if positive else beta


_SHAPES = {
    "sinh": (Sinh, lambda a, s: np.sinh(a * s)),
    "exp": (Exp, lambda a, s: np.exp(a * s)),
    "neumann": (OddNeumann, lambda a, s: a * s / (1 - (a * s) ** 2)),
}


def _fit_scaled(family, sigma, d, grid, alpha_bounds, positive_beta):
    cls, shape = _SHAPES[family]
    scale = np.abs(sigma).max()
    lo, hi = alpha_bounds or (ALPHA_RANGE[family][0] / scale, ALPHA_RANGE[family][1] / scale)
    if family == "neumann":
        hi = min(hi, (1 - NEUMANN_MARGIN) / scale)

    def loss(log_alpha):
        g = shape(math.exp(log_alpha), sigma)
        beta = closed_form_beta(g, d, positive_beta)
        r = beta * g - d
        return float(r @ r)

    logs = np.linspace(math.log(lo), math.log(hi), grid)
    losses = np.array([loss(x) for x in logs])
    j = int(np.argmin(losses))
    best_log, best_loss = logs[j], losses[j]
    # refine in log alpha well past relative width 1e-6 so that grid changes
    # move the final residual by rounding-level amounts only
    x, fx = golden_section(loss, logs[max(j - 1, 0)], logs[min(j + 1, grid - 1)], tol=REFINE_TOL)
    if fx < best_loss:
        best_log = x
    alpha = math.exp(best_log)
    beta = closed_form_beta(shape(alpha, sigma), d, positive_beta)
    return cls(alpha, beta)


def _odd_design(sigma, degree):
    scale = np.abs(sigma).max()
    powers = 2 * np.arange(degree + 1) + 1
    return (sigma[:, None] / scale) ** powers, scale ** powers


def fit(family, targets, grid=GRID_SIZE, alpha_bounds=None, degree=DEFAULT_DEGREE,
        positive_beta=False):
    """Least-squares fit of one family to ``targets``.

    Parameters
    ----------
    family : str
        One of ``sinh``, ``neumann``, ``reduction``, ``poly``, ``nnpoly``, ``exp``.
    targets : FitTargets
    grid : int
        Log-spaced alpha candidates scanned before golden-section refinement.
    alpha_bounds : (float, float), optional
        Overrides the default alpha search range.
    degree : int
        Polynomial families use powers ``1, 3, ..., 2*degree+1``.
    positive_beta : bool
        Constrain the scale factor to be nonnegative.

    Returns
    -------
    FitReport
    """
    sigma = np.asarray(targets.sigma, dtype=np.float64)
    d = np.asarray(targets.targets, dtype=np.float64)
    need = degree + 1 if family in ("poly", "nnpoly") else 2 if family != "reduction" else 1
    if len(sigma) < need:
        raise FitError(f"{family} needs at least {need} pairs, got {len(sigma)}")
    if not np.any(sigma):
        raise FitError("all singular values are zero")

    if family in _SHAPES:
        t = _fit_scaled(family, sigma, d, grid, alpha_bounds, positive_beta)
    elif family == "poly":
        X, s = _odd_design(sigma, degree)
        c = np.linalg.lstsq(X, d, rcond=None)[0]
        t = OddPolynomial(c / s)
    elif family == "nnpoly":
        X, s = _odd_design(sigma, degree)
        c, _ = nnls(X, d)
        t = NonnegOddPolynomial(c / s)
    elif family == "reduction":
        best = None
        for rank in range(1, len(sigma) + 1):
            g = RankReduction(rank).apply(sigma, context=sigma)
            beta = closed_form_beta(g, d, positive_beta)
            r = beta * g - d
            loss = float(r @ r)
            if best is None or loss < best[0]:
                best = (loss, RankReduction(rank, beta))
        t = best[1]
    else:
        raise ValueError(f"unknown family {family!r}")
    fitted = t.apply(sigma, context=sigma)
    return FitReport(family, t, float(np.sum((fitted - d) ** 2)), targets)


def fit_all(families, targets, threads=1, **options):
    """Fit every family; failures become reports carrying ``error``.

    Sorted by residual, ties (and failures) by family name.
    """
    def one(family):
        try:
            return fit(family, targets, **options)
        except (FitError, DomainError, ValueError) as exc:
            return FitReport(family, None, math.inf, targets, error=str(exc))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        reports = list(pool.map(one, families))
    return sorted(reports, key=lambda r: (r.residual, r.family))
