"""Closed-form propagators, determinants, DN and extension operators for
line and circle graphs.

Everything is parametrized by beta with sinh(beta/2) = m/2, i.e.
beta = 2 asinh(m/2).  Vertex labels follow the canonical 1..N ordering of
the builder graphs.
"""

from __future__ import annotations

import numpy as np


def beta_of_m2(m2: float) -> float:
    return 2.0 * np.arcsinh(np.sqrt(m2) / 2.0)


def line_propagator(n: int, m2: float) -> np.ndarray:
    """Green's function of the length-n line graph (no boundary condition)."""
    b = beta_of_m2(m2)
    i = np.arange(1, n + 1)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    num = np.cosh(b * (n - np.abs(ii - jj))) + np.cosh(b * (n + 1 - ii - jj))
    return num / (2.0 * np.sinh(b) * np.sinh(b * n))


def line_det(n: int, m2: float) -> float:
    b = beta_of_m2(m2)
    return float(2.0 * np.tanh(b / 2.0) * np.sinh(b * n))


def circle_propagator(n: int, m2: float) -> np.ndarray:
    b = beta_of_m2(m2)
    i = np.arange(1, n + 1)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    num = np.cosh(b * (n / 2.0 - np.abs(ii - jj)))
    return num / (2.0 * np.sinh(b) * np.sinh(b * n / 2.0))


def circle_det(n: int, m2: float) -> float:
    b = beta_of_m2(m2)
    return float(4.0 * np.sinh(b * n / 2.0) ** 2)


def line_rel_one_end_propagator(n: int, m2: float) -> np.ndarray:
    """Dirichlet propagator of the line relative to its right endpoint.

    Bulk vertices are 1..n-1.
    """
    b = beta_of_m2(m2)
    i = np.arange(1, n)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    num = np.sinh(b * (n - 0.5 - np.abs(ii - jj))) + np.sinh(b * (n + 0.5 - ii - jj))
    return num / (2.0 * np.sinh(b) * np.cosh(b * (n - 0.5)))


def line_rel_one_end_dn(n: int, m2: float) -> float:
    b = beta_of_m2(m2)
    return float(2.0 * np.sinh(b / 2.0) * np.sinh(b * n) / np.cosh(b * (n - 0.5)))


def line_rel_one_end_extension(n: int, m2: float) -> np.ndarray:
    """E(i, n) for bulk i = 1..n-1, as a column vector."""
    b = beta_of_m2(m2)
    i = np.arange(1, n)
    return (np.cosh(b * (i - 0.5)) / np.cosh(b * (n - 0.5))).reshape(-1, 1)


def line_rel_one_end_det(n: int, m2: float) -> float:
    b = beta_of_m2(m2)
    return float(np.cosh(b * (n - 0.5)) / np.cosh(b / 2.0))


def line_rel_both_ends_propagator(n: int, m2: float) -> np.ndarray:
    """Dirichlet propagator of the line relative to both endpoints (bulk 2..n-1)."""
    b = beta_of_m2(m2)
    i = np.arange(2, n)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    num = np.cosh(b * (n - 1 - np.abs(ii - jj))) - np.cosh(b * (n + 1 - ii - jj))
    return num / (2.0 * np.sinh(b) * np.sinh(b * (n - 1)))


def line_rel_both_ends_dn(n: int, m2: float) -> np.ndarray:
    b = beta_of_m2(m2)
    pref = 2.0 * np.sinh(b / 2.0) / np.sinh(b * (n - 1))
    diag = np.cosh(b * (n - 0.5))
    off = -np.cosh(b / 2.0)
    return pref * np.array([[diag, off], [off, diag]])


def line_rel_both_ends_extension(n: int, m2: float) -> np.ndarray:
    """E(i, 1) and E(i, n) for bulk i = 2..n-1, as an (n-2) x 2 matrix."""
    b = beta_of_m2(m2)
    i = np.arange(2, n)
    denom = np.sinh(b * (n - 1))
    return np.column_stack([np.sinh(b * (n - i)) / denom, np.sinh(b * (i - 1)) / denom])


def line_rel_both_ends_det(n: int, m2: float) -> float:
    b = beta_of_m2(m2)
    return float(np.sinh(b * (n - 1)) / np.sinh(b))


def circle_rel_point_dn(n: int, m2: float) -> float:
    """DN operator of the circle graph relative to a single vertex."""
    b = beta_of_m2(m2)
    return float(2.0 * np.sinh(b) * np.tanh(b * n / 2.0))
