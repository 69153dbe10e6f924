"""Dense symmetric-matrix kernel.

Thin, deterministic wrappers around numpy/scipy factorizations: Cholesky for
the positive definite path with an LDL (Bunch-Kaufman) fallback for
indefinite input, symmetric eigendecomposition for matrix exponentials, and
a certified spectral-radius upper bound for nonnegative matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NegativeEntry, NotPositiveDefinite, SingularMatrix

SYMMETRY_RTOL = 1e-12
PIVOT_RTOL = 1e-12


def assert_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return a
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class Factorization:
    """Symmetric factorization exposing solve / det / logdet."""

    n: int
    is_posdef: bool
    _chol: np.ndarray | None
    _ldl: tuple | None  # (lu, d, perm)

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self._chol is not None:
            return scipy.linalg.cho_solve((self._chol, True), b)
        lu, d, perm = self._ldl
        # Solve (P L) D (P L)^T x = b block by block.
        pl = lu[perm]
        y = scipy.linalg.solve_triangular(pl, b[perm], lower=True, unit_diagonal=True)
        z = _block_diag_solve(d, y)
        x = scipy.linalg.solve_triangular(pl.T, z, lower=False, unit_diagonal=True)
        out = np.empty_like(x)
        out[perm] = x
        return out

    def logdet(self) -> float:
        if not self.is_posdef:
            raise NotPositiveDefinite("logdet requires a positive definite matrix")
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def det(self) -> float:
        if self._chol is not None:
            diag = np.diag(self._chol)
            if self.n > 20:
                return float(np.exp(2.0 * np.sum(np.log(diag))))
            return float(np.prod(diag) ** 2)
        _, d, _ = self._ldl
        return _block_diag_det(d, log_space=self.n > 20)


def _block_diag_solve(d: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    z = np.array(y, dtype=float, copy=True)
    i = 0
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 0:
            block = d[i : i + 2, i : i + 2]
            z[i : i + 2] = np.linalg.solve(block, y[i : i + 2])
            i += 2
        else:
            z[i] = y[i] / d[i, i]
            i += 1
    return z


def _block_diag_det(d: np.ndarray, log_space: bool) -> float:
    n = d.shape[0]
    sign = 1.0
    log_abs = 0.0
    prod = 1.0
    i = 0
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 0:
            val = d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]
            i += 2
        else:
            val = d[i, i]
            i += 1
        if log_space:
            sign *= np.sign(val)
            log_abs += np.log(abs(val))
        else:
            prod *= val
    return float(sign * np.exp(log_abs)) if log_space else float(prod)


def factorize(a: np.ndarray) -> Factorization:
    """Cholesky when positive definite, pivoted LDL otherwise.

    Raises SingularMatrix when a pivot falls below 1e-12 times the largest
    entry magnitude.
    """
    a = assert_symmetric(a)
    n = a.shape[0]
    if n == 0:
        return Factorization(0, True, np.zeros((0, 0)), None)
    threshold = PIVOT_RTOL * max(np.abs(a).max(), 1.0)
    try:
        chol = np.linalg.cholesky(a)
        if np.min(np.diag(chol)) ** 2 < threshold:
            raise SingularMatrix("pivot below singularity threshold")
        return Factorization(n, True, chol, None)
    except np.linalg.LinAlgError:
        pass
    lu, d, perm = scipy.linalg.ldl(a, lower=True)
    pivots = []
    i = 0
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 0:
            pivots.append(abs(d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]) ** 0.5)
            i += 2
        else:
            pivots.append(abs(d[i, i]))
            i += 1
    if min(pivots) < threshold:
        raise SingularMatrix("pivot below singularity threshold")
    return Factorization(n, False, None, (lu, d, perm))


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return factorize(a).solve(b)


def inverse(a: np.ndarray) -> np.ndarray:
    f = factorize(a)
    inv = f.solve(np.eye(f.n))
    return 0.5 * (inv + inv.T)


def det(a: np.ndarray) -> float:
    return factorize(a).det()


def logdet(a: np.ndarray) -> float:
    return factorize(a).logdet()


def expm(a: np.ndarray, t: float) -> np.ndarray:
    """exp(-t a) through the symmetric eigendecomposition of a."""
    a = assert_symmetric(a)
    w, u = np.linalg.eigh(a)
    out = (u * np.exp(-t * w)) @ u.T
    return 0.5 * (out + out.T)


def spectral_radius_upper(a: np.ndarray, refine_iters: int = 30) -> float:
    """Certified upper bound on the spectral radius of a nonnegative matrix.

    For a nonnegative matrix and any positive vector x, the Collatz-Wielandt
    quotient max_i (a x)_i / x_i bounds rho(a) from above.  Starting from the
    all-ones vector (which reproduces the maximum row sum) the bound is
    tightened by power iteration while iterates stay strictly positive; a
    relative 1e-12 margin covers floating point in the final products.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return 0.0
    if np.min(a) < 0:
        raise NegativeEntry("spectral radius bound requires nonnegative entries")
    x = np.ones(a.shape[0])
    best = np.inf
    for _ in range(refine_iters):
        y = a @ x
        best = min(best, float(np.max(y / x)))
        if best == 0.0 or np.min(y) <= 0.0:
            break
        x = y / np.max(y)
    return best * (1.0 + 1e-12)
