"""
kernelmat.py

Finite matrices behind the maximal-height law of N non-intersecting
Brownian bridges, and the exact CDFs built from them.

Matrices (all N x N, indices 0..N-1, barrier parameter r):
- H       : H_jk = int phi_j(x) phi_k(2r - x) dx
- Htilde  : (-1)^N (psi_{i+j-N} - psi_{i+j-N+1})(2r^2), zero above the anti-diagonal
- S, Sinv : upper triangular pair with Sinv Htilde S = H
- L       : int_{2r^2}^inf psi_j psi_k
- Q       : lower triangular, -2r on the diagonal, -4r below
- Edge vectors R1 = psi(2r^2), R2 = Psi(2r^2), u = (-1)^{N-1} 1, v_i = 2 (-1)^i

CDFs:
- maxheight_cdf(N, m) = P(max_t B_N(t) <= m) = det(I - H) at r = sqrt(2) m
- loe_cdf(N, s)       = P(lambda_max(X^T X) <= s), X of size (N+1) x N
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union

import numpy as np
import pandas as pd
from scipy.linalg import lu_factor
from scipy.special import gammaln

from config.settings import (
    CDF_ROUTE_FACTOR,
    CDF_ROUTE_TOLERANCE,
    CLOSED_FORM_MAX_N,
    LAGUERRE_TRUNCATION,
    PIVOT_FLOOR,
    TABLE_MONOTONE_SLACK,
)
from model.errors import ArgumentError, ConsistencyError, NumericError
from model.specfun import (
    GAUSS_HERMITE,
    hermite_phi_row,
    interval_rule,
    laguerre_psi_integral_row,
    laguerre_psi_row,
    quadrature_rule,
)

MAXHEIGHT = "maxheight"
LOE = "loe"
CDF_KINDS = (MAXHEIGHT, LOE)


# -------------------- TYPES --------------------

@dataclass(frozen=True)
class KernelMatrix:
    """Dense N x N matrix tagged with its symbol and barrier parameter."""

    symbol: str
    N: int
    r: float
    entries: np.ndarray

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class EdgeVectors:
    N: int
    r: float
    R1: np.ndarray
    R2: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class DistributionTable:
    """Sorted (argument, probability) pairs of a CDF."""

    label: str
    points: Tuple[Tuple[float, float], ...]

    @property
    def arguments(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def to_frame(self) -> pd.DataFrame:
        """Table as a DataFrame with columns ``arg`` and ``prob``."""
        return pd.DataFrame({"arg": self.arguments, "prob": self.probabilities})


MatrixLike = Union[KernelMatrix, np.ndarray]


# -------------------- UTILS --------------------

def _check_N(N: int) -> int:
    if int(N) != N or N < 1:
        raise ArgumentError(f"N must be a positive integer, got {N}")
    return int(N)


def _check_r(r: float, strict: bool = False) -> float:
    r = float(r)
    if not math.isfinite(r):
        raise ArgumentError("r must be finite")
    if strict and r <= 0:
        raise ArgumentError(f"r must be > 0, got {r}")
    if r < 0:
        raise ArgumentError(f"r must be >= 0, got {r}")
    return r


def _entries(M: MatrixLike) -> np.ndarray:
    arr = M.entries if isinstance(M, KernelMatrix) else np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ArgumentError(f"Expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError("Matrix entries must be finite")
    return arr


def _symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def log_c(N: int, r: float) -> np.ndarray:
    """log c_k, with c_k = r^{N-1-k} (2^{N-1-k} k! / (N-1)!)^{1/2}."""
    k = np.arange(N)
    return (N - 1 - k) * math.log(r) + 0.5 * (
        (N - 1 - k) * math.log(2.0) + gammaln(k + 1) - gammaln(N)
    )


def binomial_sign_pattern(N: int) -> np.ndarray:
    """B_ij = C(N-1-i, j-i) (-1)^{N-1+j} for j >= i, else 0."""
    B = np.zeros((N, N))
    for i in range(N):
        for j in range(i, N):
            B[i, j] = math.comb(N - 1 - i, j - i) * (-1.0) ** (N - 1 + j)
    return B


def edge_vectors_uv(N: int) -> Tuple[np.ndarray, np.ndarray]:
    u = np.full(N, (-1.0) ** (N - 1))
    v = 2.0 * (-1.0) ** np.arange(N)
    return u, v


# -------------------- H --------------------

def _H_quadrature(N: int, r: float, nodes: int) -> np.ndarray:
    # e^{-r^2} int e^{-u^2} p_n(r+u) p_m(r-u) du == sum_i w_i e^{u_i^2} phi_n(r+u_i) phi_m(r-u_i)
    rule = quadrature_rule(GAUSS_HERMITE, nodes)
    plus = hermite_phi_row(N - 1, r + rule.nodes)
    minus = hermite_phi_row(N - 1, r - rule.nodes)
    return _symmetrize((plus * rule.scaled_weights) @ minus.T)


def hermite_overlap_closed_form(n: int, m: int, r: float) -> float:
    """
    int phi_n(x) phi_m(2r - x) dx by the alternating binomial sum.

    Loses digits to cancellation as n + m grows; kept as a cross-check.
    """
    total = 0.0
    for l in range(min(n, m) + 1):
        total += (
            (-2.0) ** l
            * math.factorial(l)
            * math.comb(n, l)
            * math.comb(m, l)
            * (2.0 * r) ** (n + m - 2 * l)
        )
    scale = math.sqrt(2.0 ** (n + m) * math.factorial(n) * math.factorial(m))
    return math.exp(-r * r) / scale * total


def _H_closed_form(N: int, r: float) -> np.ndarray:
    if N > CLOSED_FORM_MAX_N:
        raise ArgumentError(
            f"closed-form route is limited to N <= {CLOSED_FORM_MAX_N}, got {N}"
        )
    H = np.empty((N, N))
    for n in range(N):
        for m in range(n, N):
            H[n, m] = H[m, n] = hermite_overlap_closed_form(n, m, r)
    return H


def laguerre_form_terms(N: int, r: float, i: int, j: int) -> np.ndarray:
    """
    Terms (c_j / c_i) C(j-i, k-i) (-1)^k psi_k(2r^2), k = i..j, whose sum is H_ij (j >= i).
    """
    psi = laguerre_psi_row(N - 1, 2.0 * r * r)
    lc = log_c(N, r)
    ratio = math.exp(lc[j] - lc[i])
    k = np.arange(i, j + 1)
    binom = np.array([math.comb(j - i, kk - i) for kk in k], dtype=float)
    return ratio * binom * (-1.0) ** k * psi[k]


def _H_laguerre(N: int, r: float) -> np.ndarray:
    if r <= 0:
        raise ArgumentError("laguerre route needs r > 0")
    H = np.empty((N, N))
    for i in range(N):
        for j in range(i, N):
            H[i, j] = H[j, i] = float(np.sum(laguerre_form_terms(N, r, i, j)))
    return H


def build_H(
    N: int,
    r: float,
    route: str = "quadrature",
    nodes: int = 0,
) -> KernelMatrix:
    """
    Build H_jk = int phi_j(x) phi_k(2r - x) dx.

    The default route substitutes x = u + r, which turns the integrand into
    a polynomial of degree j + k against e^{-u^2}; N + 1 Gauss-Hermite nodes
    integrate it exactly.

    Args:
        N (int): Matrix size
        r (float): Barrier parameter, r >= 0
        route (str): quadrature | closed-form | laguerre
        nodes (int): Gauss-Hermite order for the quadrature route (0 = N + 1)

    Returns:
        KernelMatrix: Symbol "H"
    """
    N = _check_N(N)
    r = _check_r(r)

    if route == "quadrature":
        order = nodes or N + 1
        if order < N:
            raise ArgumentError(f"need at least N = {N} nodes for exactness, got {order}")
        entries = _H_quadrature(N, r, order)
    elif route == "closed-form":
        entries = _H_closed_form(N, r)
    elif route == "laguerre":
        entries = _H_laguerre(N, r)
    else:
        raise ArgumentError(f"Unknown route for H: {route}")

    return KernelMatrix("H", N, r, entries)


# -------------------- HTILDE --------------------

def build_Htilde(N: int, r: float) -> KernelMatrix:
    """
    Anti-diagonal band matrix Htilde_ij = (-1)^N (psi_{i+j-N} - psi_{i+j-N+1})(2r^2).

    Entries depend only on i + j; negative Laguerre degrees are exact zeros.
    """
    N = _check_N(N)
    r = _check_r(r)

    psi = laguerre_psi_row(N - 1, 2.0 * r * r)
    padded = np.concatenate([np.zeros(N), psi])
    idx = np.add.outer(np.arange(N), np.arange(N))
    entries = (-1.0) ** N * (padded[idx] - padded[idx + 1])

    return KernelMatrix("Htilde", N, r, entries)


def build_Htilde_integral_form(N: int, r: float) -> KernelMatrix:
    """Htilde written through the antiderivatives Psi_n below the anti-diagonal."""
    N = _check_N(N)
    r = _check_r(r)

    Psi = laguerre_psi_integral_row(N - 1, 2.0 * r * r)
    entries = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            k = i + j - N
            if k == -1:
                entries[i, j] = (-1.0) ** (N + 1) * math.exp(-r * r)
            elif k >= 0:
                entries[i, j] = (-1.0) ** N * 0.5 * (Psi[k] + Psi[k + 1])

    return KernelMatrix("Htilde", N, r, entries)


# -------------------- S, L, Q --------------------

def build_S_pair(N: int, r: float) -> Tuple[KernelMatrix, KernelMatrix]:
    """
    Upper triangular S and its closed-form inverse.

    S_ij    = c_j C(N-1-i, j-i) (-1)^{N-1+j}
    Sinv_ij = C(N-1-i, j-i) (-1)^{N-1+j} / c_i

    Args:
        N (int): Matrix size
        r (float): Barrier parameter, r > 0

    Returns:
        Tuple[KernelMatrix, KernelMatrix]: (S, Sinv)
    """
    N = _check_N(N)
    r = _check_r(r, strict=True)

    c = np.exp(log_c(N, r))
    B = binomial_sign_pattern(N)
    S = B * c[None, :]
    Sinv = B / c[:, None]

    return KernelMatrix("S", N, r, S), KernelMatrix("Sinv", N, r, Sinv)


def build_L_R1_R2(N: int, r: float) -> Tuple[KernelMatrix, EdgeVectors]:
    """
    L = Htilde^2 together with the edge vectors R1 = psi(2r^2), R2 = Psi(2r^2).

    Returns:
        Tuple[KernelMatrix, EdgeVectors]: L and (R1, R2, u, v)
    """
    Ht = build_Htilde(N, r).entries
    N = Ht.shape[0]
    r = float(r)
    s = 2.0 * r * r

    L = _symmetrize(Ht @ Ht)
    R1 = laguerre_psi_row(N - 1, s)
    R2 = laguerre_psi_integral_row(N - 1, s)
    u, v = edge_vectors_uv(N)

    return KernelMatrix("L", N, r, L), EdgeVectors(N, r, R1, R2, u, v)


def build_L_quadrature(N: int, r: float) -> KernelMatrix:
    """L_jk = int_{2r^2}^inf psi_j psi_k by composite Gauss-Legendre on x = 2r^2 + t."""
    N = _check_N(N)
    r = _check_r(r)

    t, w = interval_rule(0.0, LAGUERRE_TRUNCATION)
    psi = laguerre_psi_row(N - 1, 2.0 * r * r + t)
    return KernelMatrix("L", N, r, _symmetrize((psi * w) @ psi.T))


def R2_quadrature(N: int, r: float) -> np.ndarray:
    """(R2)_j = int_0^{2r^2} psi_j by composite Gauss-Legendre."""
    N = _check_N(N)
    r = _check_r(r)

    x, w = interval_rule(0.0, 2.0 * r * r)
    if x.size == 0:
        return np.zeros(N)
    return laguerre_psi_row(N - 1, x) @ w


def build_Q_u_v(N: int, r: float) -> Tuple[KernelMatrix, EdgeVectors]:
    """
    Q with -2r on the diagonal and -4r strictly below, plus the edge vectors.

    Returns:
        Tuple[KernelMatrix, EdgeVectors]: Q and (R1, R2, u, v)
    """
    N = _check_N(N)
    r = float(r)
    if not math.isfinite(r):
        raise ArgumentError("r must be finite")

    Q = -4.0 * r * np.tril(np.ones((N, N)), -1) - 2.0 * r * np.eye(N)
    s = 2.0 * r * r
    u, v = edge_vectors_uv(N)
    edges = EdgeVectors(
        N, r, laguerre_psi_row(N - 1, s), laguerre_psi_integral_row(N - 1, s), u, v
    )
    return KernelMatrix("Q", N, r, Q), edges


def build_E(N: int, r: float) -> np.ndarray:
    """E = 4r (Htilde u) u^T."""
    Ht = build_Htilde(N, r).entries
    u, _ = edge_vectors_uv(Ht.shape[0])
    return 4.0 * r * np.outer(Ht @ u, u)


def dHtilde_dr(N: int, r: float) -> np.ndarray:
    """Closed r-derivative of Htilde: Q Htilde."""
    Q, _ = build_Q_u_v(N, r)
    return Q.entries @ build_Htilde(N, r).entries


def d_inverse_dr(N: int, r: float) -> np.ndarray:
    """
    Closed r-derivative of (I + Htilde)^{-1}:
    (I - Htilde^2)^{-1} Htilde Q + (I - Htilde^2)^{-1} E (I + Htilde)^{-1}.
    """
    Ht = build_Htilde(N, r).entries
    Q, _ = build_Q_u_v(N, r)
    E = build_E(N, r)
    I = np.eye(Ht.shape[0])

    first = np.linalg.solve(I - Ht @ Ht, Ht @ Q.entries)
    second = np.linalg.solve(I - Ht @ Ht, E) @ np.linalg.inv(I + Ht)
    return first + second


# -------------------- DETERMINANTS --------------------

def slogdet_I_minus(M: MatrixLike) -> Tuple[float, float]:
    """
    Sign and log-magnitude of det(I - M) by LU with partial pivoting.

    Raises:
        NumericError: If a pivot falls below 1e-300 in magnitude
    """
    A = np.eye(_entries(M).shape[0]) - _entries(M)
    lu, piv = lu_factor(A, check_finite=False)
    diag = np.diag(lu)

    if np.min(np.abs(diag)) < PIVOT_FLOOR:
        raise NumericError("LU pivot underflow in det(I - M)")

    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    sign = (-1.0) ** swaps * float(np.prod(np.sign(diag)))
    return sign, float(np.sum(np.log(np.abs(diag))))


def det_I_minus(M: MatrixLike) -> float:
    """Signed det(I - M); never clamped."""
    sign, logabs = slogdet_I_minus(M)
    return sign * math.exp(logabs)


# -------------------- DISTRIBUTIONS --------------------

def maxheight_cdf(N: int, m: float) -> float:
    """
    P(max_{t in [0,1]} B_N(t) <= m) for N non-intersecting Brownian bridges.

    Args:
        N (int): Number of bridges
        m (float): Height

    Returns:
        float: det(I - H) at r = sqrt(2) m (0 for m <= 0)
    """
    N = _check_N(N)
    m = float(m)
    if not math.isfinite(m):
        raise ArgumentError("m must be finite")
    if m <= 0:
        return 0.0
    return det_I_minus(build_H(N, math.sqrt(2.0) * m))


def loe_cdf_routes(N: int, s: float) -> Tuple[float, float]:
    """
    Both evaluations of the LOE top-eigenvalue CDF at s > 0.

    Returns:
        Tuple[float, float]: (det(I - L - R1 R2^T), det(I - H)) at r = sqrt(s/2)
    """
    r = math.sqrt(0.5 * s)
    L, edges = build_L_R1_R2(N, r)
    squared = det_I_minus(L.entries + np.outer(edges.R1, edges.R2))
    return squared, det_I_minus(build_H(N, r))


def loe_cdf(N: int, s: float) -> float:
    """
    P(lambda_max(X^T X) <= s) with X an (N+1) x N standard Gaussian matrix.

    Computed as sqrt(det(I - L - R1 R2^T)) and cross-checked against
    det(I - H).

    Raises:
        ConsistencyError: If the two routes differ by more than 1e-7
    """
    N = _check_N(N)
    s = float(s)
    if not math.isfinite(s):
        raise ArgumentError("s must be finite")
    if s <= 0:
        return 0.0

    squared, direct = loe_cdf_routes(N, s)
    value = math.sqrt(max(squared, 0.0))
    if abs(value - direct) > CDF_ROUTE_FACTOR * CDF_ROUTE_TOLERANCE:
        raise ConsistencyError(
            f"LOE CDF routes disagree at N={N}, s={s}: {value!r} vs {direct!r}"
        )
    return value


def cdf_table(kind: str, N: int, grid: Iterable[float]) -> DistributionTable:
    """
    Tabulate maxheight_cdf or loe_cdf on a sorted grid.

    Probabilities are clamped to [0, 1] here and nowhere else.

    Args:
        kind (str): maxheight | loe
        N (int): Number of bridges / matrix size
        grid (Iterable[float]): Non-decreasing arguments

    Returns:
        DistributionTable: Label "<kind>-N<N>"
    """
    if kind not in CDF_KINDS:
        raise ArgumentError(f"Unknown CDF kind: {kind}")
    args = [float(x) for x in grid]
    if any(b < a for a, b in zip(args, args[1:])):
        raise ArgumentError("grid must be sorted")

    cdf = maxheight_cdf if kind == MAXHEIGHT else loe_cdf
    probs: List[float] = [min(1.0, max(0.0, cdf(N, x))) for x in args]

    for (a, p), (b, q) in zip(zip(args, probs), zip(args[1:], probs[1:])):
        if q < p - TABLE_MONOTONE_SLACK:
            raise ConsistencyError(f"{kind} CDF decreases between {a} and {b}")

    return DistributionTable(f"{kind}-N{N}", tuple(zip(args, probs)))
