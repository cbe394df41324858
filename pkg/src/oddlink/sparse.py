"""Row-compressed sparse matrices and Lanczos-type decompositions.

The decompositions here are built for graphs at desk scale: Lanczos
bidiagonalization (for the biadjacency SVD) and symmetric Lanczos (for
extremal eigenpairs of a unipartite adjacency matrix), both with full
reorthogonalization.  When the Krylov space becomes invariant the
iteration restarts from a fresh seeded random vector, which is also how
repeated singular values and eigenvalues get picked up.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "SparseMatrix",
    "SvdModel",
    "EigenModel",
    "spmv",
    "truncated_svd",
    "extremal_eigs",
]

#: singular values below this fraction of sigma_1 are reported as exact zeros
ZERO_CUTOFF = 1e-10


class SparseMatrix:
    """Compressed sparse row matrix of reals.

    Column indices are sorted within each row and explicit zeros are
    never stored.  Use :meth:`from_coo` to build one from triplets.
    """

    def __init__(self, shape, indptr, indices, data):
        rows, cols = (int(s) for s in shape)
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        data = np.asarray(data, dtype=np.float64)
        if indptr.shape != (rows + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValueError("inconsistent indptr")
        if len(indices) != len(data):
            raise ValueError("indices and data differ in length")
        if len(indices) and (indices.min() < 0 or indices.max() >= cols):
            raise ValueError("column index out of range")
        self.shape = (rows, cols)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self._row_ids = np.repeat(np.arange(rows), np.diff(indptr))

    @classmethod
    def from_coo(cls, shape, row, col, values=None):
        """Build from coordinate triplets; duplicate coordinates are summed."""
        rows, cols = shape
        row = np.asarray(row, dtype=np.int64)
        col = np.asarray(col, dtype=np.int64)
        if values is None:
            values = np.ones(len(row))
        values = np.asarray(values, dtype=np.float64)
        if len(row) and (row.min() < 0 or row.max() >= rows):
            raise ValueError("row index out of range")
        order = np.lexsort((col, row))
        row, col, values = row[order], col[order], values[order]
        if len(row):
            start = np.ones(len(row), dtype=bool)
            start[1:] = (row[1:] != row[:-1]) | (col[1:] != col[:-1])
            groups = np.cumsum(start) - 1
            values = np.bincount(groups, weights=values)
            row, col = row[start], col[start]
            keep = values != 0
            row, col, values = row[keep], col[keep], values[keep]
        indptr = np.zeros(rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(row, minlength=rows), out=indptr[1:])
        return cls((rows, cols), indptr, col, values)

    @classmethod
    def from_dense(cls, array):
        array = np.asarray(array, dtype=np.float64)
        r, c = np.nonzero(array)
        return cls.from_coo(array.shape, r, c, array[r, c])

    @property
    def nnz(self):
        return len(self.data)

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.shape[1],):
            raise ValueError(f"vector of length {x.shape} does not match {self.shape[1]} columns")
        return np.bincount(self._row_ids, weights=self.data * x[self.indices], minlength=self.shape[0])

    def rmatvec(self, y):
        """Product with the transpose, ``M^T y``."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.shape[0],):
            raise ValueError(f"vector of length {y.shape} does not match {self.shape[0]} rows")
        return np.bincount(self.indices, weights=self.data * y[self._row_ids], minlength=self.shape[1])

    def matmat(self, X):
        """Product with a dense ``(cols, k)`` array."""
        X = np.asarray(X, dtype=np.float64)
        return np.column_stack([self.matvec(X[:, j]) for j in range(X.shape[1])]) \
            if X.shape[1] else np.zeros((self.shape[0], 0))

    def transpose(self):
        return SparseMatrix.from_coo(self.shape[::-1], self.indices, self._row_ids, self.data)

    T = property(transpose)

    def toarray(self):
        out = np.zeros(self.shape)
        out[self._row_ids, self.indices] = self.data
        return out

    def row(self, i):
        """Column indices of the nonzeros in row ``i``."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def is_symmetric(self):
        if self.shape[0] != self.shape[1]:
            return False
        t = self.transpose()
        return (
            np.array_equal(self.indptr, t.indptr)
            and np.array_equal(self.indices, t.indices)
            and np.array_equal(self.data, t.data)
        )

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return SparseMatrix.from_coo(
            self.shape,
            np.concatenate([self._row_ids, other._row_ids]),
            np.concatenate([self.indices, other.indices]),
            np.concatenate([self.data, other.data]),
        )

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def spmv(m, x):
    """Sparse matrix times dense vector."""
    return m.matvec(x)


@dataclass(frozen=True)
class SvdModel:
    """Truncated singular triplets ``B ~ U diag(s) V^T``.

    Attributes
    ----------
    left_vectors : ndarray, shape (rows, k)
    singular_values : ndarray, shape (k,)
        Nonincreasing and nonnegative.
    right_vectors : ndarray, shape (cols, k)
    seed : int
        Seed of the Lanczos start vector.
    residuals : ndarray, shape (k,)
        ``max(|B v - s u|, |B^T u - s v|)`` per triplet.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray
    seed: int = 1
    residuals: np.ndarray = field(default=None, repr=False)

    @property
    def rank(self):
        return len(self.singular_values)

    @property
    def shape(self):
        return (self.left_vectors.shape[0], self.right_vectors.shape[0])

    def transposed(self):
        return SvdModel(self.right_vectors, self.singular_values, self.left_vectors,
                        self.seed, self.residuals)

    def save(self, path, left_labels=None, right_labels=None):
        """Write the TSV container read back by :meth:`load`.

        Layout: a ``%svd rows cols k seed`` header, optional label lines,
        then the singular values, then the rows of U and of V, all at full
        precision.
        """
        rows, cols = self.shape
        fmt = "%.17g"
        with open(path, "w") as fh:
            fh.write(f"%svd\t{rows}\t{cols}\t{self.rank}\t{self.seed}\n")
            if left_labels is not None:
                fh.write("%left\t" + "\t".join(left_labels) + "\n")
            if right_labels is not None:
                fh.write("%right\t" + "\t".join(right_labels) + "\n")
            fh.write("%sigma\n")
            np.savetxt(fh, self.singular_values[None, :], fmt=fmt, delimiter="\t")
            fh.write("%U\n")
            np.savetxt(fh, self.left_vectors.reshape(rows, -1), fmt=fmt, delimiter="\t")
            fh.write("%V\n")
            np.savetxt(fh, self.right_vectors.reshape(cols, -1), fmt=fmt, delimiter="\t")

    @classmethod
    def load(cls, path):
        """Return ``(model, left_labels, right_labels)``; labels may be None."""
        with open(path) as fh:
            lines = fh.read().split("\n")
        head = lines[0].split("\t")
        if head[0] != "%svd":
            raise ValueError(f"{path}: not an SVD model file")
        rows, cols, k, seed = (int(x) for x in head[1:5])
        labels = {"%left": None, "%right": None}
        i = 1
        while lines[i].split("\t", 1)[0] in labels:
            tag, _, rest = lines[i].partition("\t")
            labels[tag] = rest.split("\t") if rest else []
            i += 1

        def block(tag, nrows):
            nonlocal i
            if lines[i] != tag:
                raise ValueError(f"{path}: expected section {tag}")
            chunk = lines[i + 1:i + 1 + nrows]
            i += 1 + nrows
            return np.array([[float(v) for v in ln.split("\t")] if k else [] for ln in chunk]).reshape(nrows, k)

        sigma = block("%sigma", 1)[0]
        u = block("%U", rows)
        v = block("%V", cols)
        return cls(u, sigma, v, seed), labels["%left"], labels["%right"]


@dataclass(frozen=True)
class EigenModel:
    """Eigenpairs of a symmetric matrix, sorted by descending ``|lambda|``."""

    vectors: np.ndarray
    eigenvalues: np.ndarray
    residuals: np.ndarray = field(default=None, repr=False)


class _Basis:
    """Growable column basis with two-pass Gram-Schmidt."""

    def __init__(self, n):
        self.n = n
        self._buf = np.zeros((n, min(n, 16)))
        self.size = 0

    @property
    def cols(self):
        return self._buf[:, :self.size]

    def orthogonalize(self, x):
        q = self.cols
        for _ in range(2):
            x = x - q @ (q.T @ x)
        return x

    def append(self, x):
        if self.size == self._buf.shape[1]:
            grown = np.zeros((self.n, min(self.n, 2 * self.size)))
            grown[:, :self.size] = self._buf[:, :self.size]
            self._buf = grown
        self._buf[:, self.size] = x
        self.size += 1

    def fresh(self, rng):
        """A random unit vector orthogonal to the basis."""
        for _ in range(10):
            x = self.orthogonalize(rng.standard_normal(self.n))
            nrm = np.linalg.norm(x)
            if nrm > 1e-8:
                return x / nrm
        raise ConvergenceError("could not extend Krylov basis")


def _breakdown(value, scale):
    return value <= 1e-12 * max(scale, 1e-300)


def truncated_svd(m, k, tol=1e-8, max_iter=1000, seed=1):
    """Top-``k`` singular triplets of a sparse matrix.

    Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
    The Krylov dimension grows (doubling) until every wanted triplet
    satisfies ``|B v - s u| <= tol * s_1`` and ``|B^T u - s v| <= tol * s_1``,
    or the space is exhausted.

    Parameters
    ----------
    m : SparseMatrix
    k : int
        Number of triplets, ``1 <= k <= min(m.shape)``.
    tol : float
        Residual tolerance relative to the largest singular value.
    max_iter : int
        Cap on Lanczos steps.
    seed : int
        Seeds the start vector and any restart vectors.

    Returns
    -------
    SvdModel

    Raises
    ------
    ConvergenceError
        If ``max_iter`` steps pass without convergence.
    """
    rows, cols = m.shape
    n = min(rows, cols)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    # iterate on the tall orientation so the right basis bounds the Krylov size
    flip = rows < cols
    if flip:
        mul, rmul, tall_rows = m.rmatvec, m.matvec, cols
    else:
        mul, rmul, tall_rows = m.matvec, m.rmatvec, rows

    rng = np.random.default_rng(seed)
    U, V = _Basis(tall_rows), _Basis(n)
    alphas, betas = [], []
    scale = 0.0

    v = V.fresh(rng)
    V.append(v)
    w = mul(v)
    alpha = np.linalg.norm(w)
    scale = max(scale, alpha)
    if _breakdown(alpha, scale):
        u, alpha = U.fresh(rng), 0.0
    else:
        u = w / alpha
    U.append(u)
    alphas.append(alpha)

    target = min(n, max(2 * k + 1, k + 20))
    while True:
        p = V.size
        r = V.orthogonalize(rmul(U.cols[:, p - 1]) - alphas[-1] * V.cols[:, p - 1])
        beta = 0.0 if p == n else np.linalg.norm(r)
        scale = max(scale, beta)
        if p >= target:
            bd = np.diag(alphas) + np.diag(betas, 1)
            x, s, yt = np.linalg.svd(bd)
            est = beta * np.abs(x[-1, :k])
            if np.all(est <= tol * max(s[0], 1e-300)) or p == n:
                break
            if p >= max_iter:
                raise ConvergenceError(
                    f"truncated_svd: no convergence after {p} steps", residuals=est)
            target = min(n, 2 * p, max_iter)
        if _breakdown(beta, scale):
            v, beta = V.fresh(rng), 0.0
        else:
            v = r / beta
        V.append(v)
        betas.append(beta)
        w = U.orthogonalize(mul(v) - beta * U.cols[:, p - 1])
        alpha = np.linalg.norm(w)
        scale = max(scale, alpha)
        if _breakdown(alpha, scale):
            u, alpha = U.fresh(rng), 0.0
        else:
            u = w / alpha
        U.append(u)
        alphas.append(alpha)

    left = U.cols @ x[:, :k]
    right = V.cols @ yt[:k].T
    sigma = s[:k].copy()
    if flip:
        left, right = right, left
    sigma[sigma < ZERO_CUTOFF * sigma[0]] = 0.0
    res = np.array([
        max(np.linalg.norm(m.matvec(right[:, i]) - sigma[i] * left[:, i]),
            np.linalg.norm(m.rmatvec(left[:, i]) - sigma[i] * right[:, i]))
        for i in range(k)
    ])
    if np.any(res > max(tol, 1e-12) * max(sigma[0], 1.0) * 10):
        raise ConvergenceError("truncated_svd: residual check failed", residuals=res)
    return SvdModel(left, sigma, right, seed, res)


def extremal_eigs(m, m_top, m_bottom, tol=1e-8, max_iter=1000, seed=1):
    """Largest ``m_top`` and smallest ``m_bottom`` eigenpairs of a symmetric matrix.

    Symmetric Lanczos with full reorthogonalization and seeded restarts on
    invariant subspaces.  Eigenvalues come back sorted by descending
    absolute value (positive first on ties).
    """
    n = m.shape[0]
    if not m.is_symmetric():
        raise ValueError("extremal_eigs needs a symmetric matrix")
    if m_top < 0 or m_bottom < 0 or m_top + m_bottom > n or m_top + m_bottom == 0:
        raise ValueError(f"cannot take {m_top}+{m_bottom} eigenpairs of an order-{n} matrix")
    want = m_top + m_bottom
    rng = np.random.default_rng(seed)
    Q = _Basis(n)
    alphas, betas = [], []
    scale = 0.0
    q = Q.fresh(rng)
    Q.append(q)
    target = min(n, max(2 * want + 1, want + 20))
    while True:
        p = Q.size
        w = m.matvec(Q.cols[:, p - 1])
        alpha = Q.cols[:, p - 1] @ w
        alphas.append(alpha)
        r = Q.orthogonalize(w)
        beta = 0.0 if p == n else np.linalg.norm(r)
        scale = max(scale, abs(alpha), beta)
        if p >= target:
            theta, y = np.linalg.eigh(np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1))
            pick = np.r_[np.arange(p - m_top, p), np.arange(min(m_bottom, p - m_top))]
            est = beta * np.abs(y[-1, pick])
            lam_max = max(np.abs(theta).max(), 1e-300)
            if np.all(est <= tol * lam_max) or p == n:
                break
            if p >= max_iter:
                raise ConvergenceError(
                    f"extremal_eigs: no convergence after {p} steps", residuals=est)
            target = min(n, 2 * p, max_iter)
        if _breakdown(beta, scale):
            q, beta = Q.fresh(rng), 0.0
        else:
            q = r / beta
        Q.append(q)
        betas.append(beta)

    pick = np.unique(pick)
    vals = theta[pick]
    vecs = Q.cols @ y[:, pick]
    order = np.lexsort((-vals, -np.abs(vals)))
    vals, vecs = vals[order], vecs[:, order]
    res = np.linalg.norm(
        np.column_stack([m.matvec(vecs[:, i]) for i in range(len(vals))]) - vecs * vals, axis=0)
    return EigenModel(vecs, vals, res)
