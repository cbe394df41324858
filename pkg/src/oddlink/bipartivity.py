"""Near-bipartivity test for unipartite networks.

The learned spectral transformation of a bipartite-like network is odd:
the negative end of the spectrum mirrors the positive end.  We fit both a
hyperbolic sine and an exponential to the learned curve and call the
network nearly bipartite when the sine fits better.
"""

from dataclasses import dataclass, field

import numpy as np

from .graph import adjacency, split_unipartite
from .learning import FitTargets, fit
from .sparse import SparseMatrix, extremal_eigs

__all__ = ["BipartivityReport", "assess", "NEARLY_BIPARTITE", "NOT_BIPARTITE"]

NEARLY_BIPARTITE = "nearly-bipartite"
NOT_BIPARTITE = "not-bipartite"
_TINY = 1e-300


def verdict_for(sinh_residual, exp_residual, threshold=1.0):
    """``(ratio, verdict)`` from the two fit residuals."""
    ratio = max(sinh_residual, _TINY) / max(exp_residual, _TINY)
    return ratio, NEARLY_BIPARTITE if ratio < threshold else NOT_BIPARTITE


@dataclass(frozen=True, eq=False)
class BipartivityReport:
    sinh_fit: object
    exp_fit: object
    ratio: float
    verdict: str
    eigenvalues: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)

    def curve_csv(self):
        rows = ["lambda,target,sinh_fit,exp_fit"]
        s = self.sinh_fit.fitted_values()
        e = self.exp_fit.fitted_values()
        for row in zip(self.eigenvalues, self.targets, s, e):
            rows.append(",".join(repr(float(x)) for x in row))
        return "\n".join(rows) + "\n"

    def summary(self, name=""):
        return (f"{name}\t{self.verdict}\tratio={self.ratio:.6g}"
                f"\tsinh_residual={self.sinh_fit.residual:.6g}"
                f"\texp_residual={self.exp_fit.residual:.6g}").lstrip("\t")


def _clamp(m_top, m_bottom, n):
    if m_top + m_bottom <= n:
        return m_top, m_bottom
    m_bottom = min(m_bottom, n // 2)
    m_top = min(m_top, n - m_bottom)
    return m_top, min(m_bottom, n - m_top)


def assess(g, m_top=16, m_bottom=16, fraction=0.3, seed=1, tol=1e-8, max_iter=1000,
           threshold=1.0):
    """Classify ``g`` as nearly bipartite or not.

    The edges are split with ``fraction`` held out; the extremal eigenpairs
    ``(lambda_i, u_i)`` of the training adjacency matrix are paired with
    ``d_i = u_i^T H u_i`` where ``H`` is the adjacency matrix of the held-out
    edges, and sinh and exp curves (both with nonnegative scale) are fitted
    to the pairs.

    When the graph has no odd structure both fits collapse onto the top
    eigenvalue and the ratio sits within about 1e-4 of 1; pass a
    ``threshold`` a little below 1 to call such near-ties not bipartite.

    Parameters
    ----------
    g : UnipartiteGraph
    m_top, m_bottom : int
        Eigenpairs taken from each end of the spectrum; clamped to the
        graph order.
    fraction : float
        Share of edges withheld from the training adjacency.
    seed : int
    threshold : float
        Nearly bipartite iff ``sinh residual / exp residual < threshold``.

    Returns
    -------
    BipartivityReport
    """
    train, test = split_unipartite(g, fraction, seed)
    A_train = adjacency(train)
    n = g.node_count
    H = SparseMatrix.from_coo((n, n), np.r_[test[:, 0], test[:, 1]], np.r_[test[:, 1], test[:, 0]])
    m_top, m_bottom = _clamp(m_top, m_bottom, g.node_count)
    eig = extremal_eigs(A_train, m_top, m_bottom, tol=tol, max_iter=max_iter, seed=seed)
    vecs = eig.vectors
    d = np.einsum("ij,ij->j", vecs, H.matmat(vecs))
    targets = FitTargets(eig.eigenvalues, d, len(d))
    sinh_fit = fit("sinh", targets, positive_beta=True)
    exp_fit = fit("exp", targets, positive_beta=True)
    ratio, verdict = verdict_for(sinh_fit.residual, exp_fit.residual, threshold)
    return BipartivityReport(sinh_fit, exp_fit, ratio, verdict, eig.eigenvalues, d)
