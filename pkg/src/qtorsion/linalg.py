"""Symmetric sparse matrices with a certified conjugate-gradient solver and
an inverse-power smallest-eigenvalue routine.

The CSR triple (row_offsets, col_indices, values) is the public contract;
scipy.sparse supplies the matrix-vector kernel behind it.  Both iterative
routines certify their results: cg_solve re-checks the true residual before
returning, and smallest_eig converges on the eigen-residual, not on
iterate differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseMatrix",
    "EigResult",
    "cg_solve",
    "smallest_eig",
    "scaled_plus_identity",
    "NonConvergenceError",
    "IndefiniteMatrixError",
]

_SYM_RTOL = 1e-14


class NonConvergenceError(RuntimeError):
    """Iteration budget exhausted before the requested tolerance."""


class IndefiniteMatrixError(RuntimeError):
    """Negative curvature encountered; the operator is not positive definite."""


@dataclass(frozen=True)
class SparseMatrix:
    """Square symmetric matrix in CSR form.

    Construction validates the structure (sorted, in-range column indices,
    finite values) and symmetry to within 1e-14 relative.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        n = self.n
        ro = np.ascontiguousarray(self.row_offsets, dtype=np.int64)
        ci = np.ascontiguousarray(self.col_indices, dtype=np.int64)
        va = np.ascontiguousarray(self.values, dtype=np.float64)
        if n <= 0:
            raise ValueError("matrix dimension must be positive")
        if ro.shape != (n + 1,) or ro[0] != 0 or ro[-1] != ci.size or ci.size != va.size:
            raise ValueError("inconsistent CSR structure")
        if np.any(np.diff(ro) < 0):
            raise ValueError("row offsets must be nondecreasing")
        if ci.size and (ci.min() < 0 or ci.max() >= n):
            raise ValueError("column index out of range")
        if not np.isfinite(va).all():
            raise ValueError("matrix values must be finite")
        # strictly increasing columns inside each row: no duplicates allowed
        if ci.size:
            d = np.diff(ci)
            row_start = np.zeros(ci.size, dtype=bool)
            row_start[ro[1:-1]] = True
            if np.any(d[~row_start[1:]] <= 0):
                raise ValueError("column indices must be sorted and unique per row")
        csr = sp.csr_matrix((va, ci, ro), shape=(n, n))
        scale = float(np.abs(va).max()) if va.size else 0.0
        asym = float(np.abs(csr - csr.T).max()) if va.size else 0.0
        if asym > _SYM_RTOL * max(scale, np.finfo(float).tiny):
            raise ValueError(f"matrix not symmetric: |A - A^T| = {asym:.3e}")
        object.__setattr__(self, "row_offsets", ro)
        object.__setattr__(self, "col_indices", ci)
        object.__setattr__(self, "values", va)
        for arr in (ro, ci, va):
            arr.setflags(write=False)
        object.__setattr__(self, "_csr", csr)

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseMatrix":
        """Build from triplets; duplicates are summed, rows sorted."""
        coo = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(n=n, row_offsets=csr.indptr.astype(np.int64),
                   col_indices=csr.indices.astype(np.int64), values=csr.data)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._csr @ x

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def gershgorin_min(self) -> float:
        """Lower bound on the spectrum from Gershgorin disks."""
        diag = self.diagonal()
        row_abs = np.add.reduceat(np.abs(self.values), self.row_offsets[:-1])
        row_abs[np.diff(self.row_offsets) == 0] = 0.0
        return float((diag - (row_abs - np.abs(diag))).min())


def scaled_plus_identity(a: SparseMatrix, scale: float, shift: float) -> SparseMatrix:
    """The matrix scale * A + shift * I, in the same CSR format."""
    m = (scale * a._csr + shift * sp.identity(a.n, format="csr")).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    return SparseMatrix(n=a.n, row_offsets=m.indptr.astype(np.int64),
                        col_indices=m.indices.astype(np.int64), values=m.data)


@dataclass(frozen=True)
class EigResult:
    """Smallest eigenvalue, its unit eigenvector, and the achieved residual."""

    lambda_min: float
    eigvec: np.ndarray
    residual: float
    iterations: int


def cg_solve(
    a: SparseMatrix,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Conjugate gradients for symmetric positive definite A.

    Converges on the true relative residual ||b - A x|| <= tol ||b||
    (re-evaluated, not the recurrence value).  Raises
    IndefiniteMatrixError on negative curvature and NonConvergenceError
    when max_iter is exhausted.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (a.n,):
        raise ValueError(f"right-hand side must have shape ({a.n},)")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(a.n)
    if max_iter is None:
        max_iter = 20 * a.n + 200
    x = np.zeros(a.n) if x0 is None else np.array(x0, dtype=float)
    r = b - a.matvec(x)
    p = r.copy()
    rr = float(r @ r)
    target = tol * bnorm
    for it in range(max_iter):
        if np.sqrt(rr) <= target:
            true_r = b - a.matvec(x)
            if np.linalg.norm(true_r) <= target:
                return x
            # recurrence drifted; restart from the true residual
            r = true_r
            p = r.copy()
            rr = float(r @ r)
        ap = a.matvec(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise IndefiniteMatrixError(
                f"negative curvature p^T A p = {pap:.3e} at iteration {it}"
            )
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    if np.sqrt(rr) <= target and np.linalg.norm(b - a.matvec(x)) <= target:
        return x
    raise NonConvergenceError(
        f"CG: residual {np.sqrt(rr) / bnorm:.3e} after {max_iter} iterations (tol {tol})"
    )


def smallest_eig(
    a: SparseMatrix,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> EigResult:
    """Smallest eigenvalue of symmetric A by inverse power iteration.

    Inner solves use cg_solve on A shifted positive definite (Gershgorin
    lower bound; shift 0 when A is already safely definite).  Convergence
    is declared on the eigen-residual ||A v - lambda v|| <= tol |lambda|.
    The start vector is all-ones; if the first iterate turns out to be
    numerically orthogonal to it, the start falls back to e_1.
    """
    n = a.n
    g = a.gershgorin_min()
    sigma = 0.0 if g > 0.0 else g - max(0.01 * abs(g), 1e-12)
    b = a if sigma == 0.0 else scaled_plus_identity(a, 1.0, -sigma)
    x = np.full(n, 1.0 / np.sqrt(n))
    lam_shift = None
    restarted = False
    for it in range(1, max_iter + 1):
        inner_tol = 1e-4 if lam_shift is None else max(1e-13, 0.02 * res_rel)
        guess = None if lam_shift is None else x / lam_shift
        y = cg_solve(b, x, tol=inner_tol, x0=guess)
        ynorm = float(np.linalg.norm(y))
        if ynorm == 0.0:
            raise NonConvergenceError("inverse iteration produced the zero vector")
        if not restarted and abs(float(x @ y)) <= 1e-14 * ynorm:
            # start vector has no component along the ground state
            x = np.zeros(n)
            x[0] = 1.0
            restarted = True
            continue
        v = y / ynorm
        av = a.matvec(v)
        lam = float(v @ av)
        res = float(np.linalg.norm(av - lam * v))
        res_rel = res / max(abs(lam), np.finfo(float).tiny)
        if res <= tol * abs(lam):
            i = int(np.argmax(np.abs(v) > 1e-12 * np.abs(v).max()))
            if v[i] < 0.0:
                v = -v
            return EigResult(lambda_min=lam, eigvec=v, residual=res, iterations=it)
        lam_shift = max(lam - sigma, 1e-300)
        x = v
    raise NonConvergenceError(f"inverse iteration: residual {res:.3e} after {max_iter} iterations")
