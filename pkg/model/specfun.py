"""
specfun.py

Scalar special functions and quadrature rules used by every other module.

Provides:
- Hermite functions phi_n (normalized, Gaussian weight attached)
- Laguerre functions psi_n = e^{-x/2} L_n and their antiderivatives Psi_n
- The Airy function Ai on [-12, 40]
- Gauss-Hermite / Gauss-Legendre rules and finite-interval helpers

All functions are pure and accept either a scalar or a NumPy array for the
evaluation point. Rows come back with the degree on axis 0.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from config.settings import (
    AIRY_DOMAIN,
    AIRY_SWITCH,
    MAX_QUADRATURE_ORDER,
    PANEL_ORDER,
    PANEL_WIDTH,
)
from model.errors import ArgumentError, DomainError

ArrayLike = Union[float, np.ndarray]

GAUSS_HERMITE = "gauss-hermite"
GAUSS_LEGENDRE = "gauss-legendre"
QUADRATURE_KINDS = (GAUSS_HERMITE, GAUSS_LEGENDRE)

HERMITE_PHI = "hermite-phi"
LAGUERRE_PSI = "laguerre-psi"
LAGUERRE_PSI_INTEGRAL = "laguerre-psi-integral"
ORTHO_FAMILIES = (HERMITE_PHI, LAGUERRE_PSI, LAGUERRE_PSI_INTEGRAL)


# -------------------- TYPES --------------------

@dataclass(frozen=True)
class QuadratureRule:
    """
    Gaussian quadrature rule.

    For gauss-hermite the weight function is e^{-x^2}; ``scaled_weights``
    holds w_i * e^{x_i^2}. Weights are positive in exact arithmetic, but for
    orders above ~350 the raw ``weights`` of the outermost nodes underflow to
    0.0 in double precision. Only ``scaled_weights`` is strictly positive at
    every order; integrate large-order rules through it. For gauss-legendre
    both weight arrays are the same and the rule lives on [-1, 1].
    """

    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    def integrate(self, values: np.ndarray) -> float:
        """Weighted sum of ``values`` sampled at the nodes."""
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class OrthoFunctionId:
    """One member of an orthonormal family: (family, degree)."""

    family: str
    degree: int

    def __post_init__(self) -> None:
        if self.family not in ORTHO_FAMILIES:
            raise ArgumentError(f"Unknown function family: {self.family}")
        if self.degree < 0:
            raise ArgumentError(f"Degree must be >= 0, got {self.degree}")

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return evaluate_ortho(self.family, self.degree, x)


# -------------------- UTILS --------------------

def _check_degree(n_max: int) -> None:
    if int(n_max) != n_max or n_max < 0:
        raise ArgumentError(f"n_max must be a non-negative integer, got {n_max}")


def _finite_array(x: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} must be finite")
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _scalar_or_array(value: np.ndarray, like: np.ndarray) -> ArrayLike:
    return float(value) if like.ndim == 0 else value


# -------------------- ORTHOGONAL FUNCTION ROWS --------------------

def hermite_phi_row(n_max: int, x: ArrayLike) -> np.ndarray:
    """
    Hermite functions phi_0..phi_{n_max} at x.

    phi_n(x) = e^{-x^2/2} p_n(x) with p_n the orthonormal Hermite
    polynomial (positive leading coefficient). The recurrence runs on the
    weighted values so nothing overflows for n up to a few hundred.

    Args:
        n_max (int): Highest degree
        x (float | np.ndarray): Evaluation point(s)

    Returns:
        np.ndarray: Shape (n_max + 1,) + shape(x)
    """
    _check_degree(n_max)
    xs = _finite_array(x, "x")

    row = np.empty((n_max + 1,) + xs.shape)
    row[0] = np.pi ** -0.25 * np.exp(-0.5 * xs * xs)
    if n_max >= 1:
        row[1] = math.sqrt(2.0) * xs * row[0]
    for n in range(1, n_max):
        row[n + 1] = (
            math.sqrt(2.0 / (n + 1)) * xs * row[n]
            - math.sqrt(n / (n + 1)) * row[n - 1]
        )
    return row


def laguerre_psi_row(n_max: int, x: ArrayLike) -> np.ndarray:
    """
    Laguerre functions psi_n(x) = e^{-x/2} L_n(x) for n = 0..n_max.

    Args:
        n_max (int): Highest degree
        x (float | np.ndarray): Evaluation point(s), x >= 0

    Returns:
        np.ndarray: Shape (n_max + 1,) + shape(x)
    """
    _check_degree(n_max)
    xs = _finite_array(x, "x")
    if np.any(xs < 0):
        raise ArgumentError("Laguerre functions are defined for x >= 0")

    row = np.empty((n_max + 1,) + xs.shape)
    row[0] = np.exp(-0.5 * xs)
    if n_max >= 1:
        row[1] = (1.0 - xs) * row[0]
    for n in range(1, n_max):
        row[n + 1] = ((2 * n + 1 - xs) * row[n] - n * row[n - 1]) / (n + 1)
    return row


def laguerre_psi_integral_row(n_max: int, s: ArrayLike) -> np.ndarray:
    """
    Antiderivatives Psi_n(s) = int_0^s psi_n(x) dx for n = 0..n_max.

    Uses Psi_n + Psi_{n+1} = 2 (psi_n - psi_{n+1}), which follows from
    L_n(0) = 1, seeded by Psi_0(s) = 2 (1 - e^{-s/2}).

    Args:
        n_max (int): Highest degree
        s (float | np.ndarray): Upper limit(s), s >= 0

    Returns:
        np.ndarray: Shape (n_max + 1,) + shape(s)
    """
    _check_degree(n_max)
    ss = _finite_array(s, "s")
    if np.any(ss < 0):
        raise ArgumentError("Psi_n(s) requires s >= 0")

    psi = laguerre_psi_row(n_max + 1, ss)
    row = np.empty((n_max + 1,) + ss.shape)
    row[0] = -2.0 * np.expm1(-0.5 * ss)
    for n in range(n_max):
        row[n + 1] = 2.0 * (psi[n] - psi[n + 1]) - row[n]
    return row


def row_entry(row: np.ndarray, n: int) -> ArrayLike:
    """Entry n of a function row, with the convention that negative degrees are 0."""
    if n < 0:
        return np.zeros_like(row[0]) if row.ndim > 1 else 0.0
    return row[n]


def evaluate_ortho(family: str, n: int, x: ArrayLike) -> ArrayLike:
    """
    Evaluate a single member of a family; negative degree gives exactly 0.

    Args:
        family (str): hermite-phi | laguerre-psi | laguerre-psi-integral
        n (int): Degree (any integer)
        x (float | np.ndarray): Evaluation point(s)

    Returns:
        float | np.ndarray: Function value(s)
    """
    xs = np.asarray(x, dtype=float)
    if n < 0:
        return _scalar_or_array(np.zeros_like(xs), xs)

    builders = {
        HERMITE_PHI: hermite_phi_row,
        LAGUERRE_PSI: laguerre_psi_row,
        LAGUERRE_PSI_INTEGRAL: laguerre_psi_integral_row,
    }
    if family not in builders:
        raise ArgumentError(f"Unknown function family: {family}")
    return _scalar_or_array(builders[family](n, xs)[n], xs)


# -------------------- AIRY FUNCTION --------------------

# Ai(0) and -Ai'(0)
_AI_0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AI_PRIME_0 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)

_MACLAURIN_TERMS = 90
_ASYMPTOTIC_TERMS = 48


def _asymptotic_coefficients(count: int) -> np.ndarray:
    u = np.empty(count)
    u[0] = 1.0
    for k in range(1, count):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


_U = _asymptotic_coefficients(_ASYMPTOTIC_TERMS)


def _airy_maclaurin(x: np.ndarray) -> np.ndarray:
    x3 = x ** 3
    f_term = np.ones_like(x)
    g_term = x.copy()
    f_sum = f_term.copy()
    g_sum = g_term.copy()
    for k in range(1, _MACLAURIN_TERMS):
        f_term = f_term * x3 / ((3 * k - 1) * (3 * k))
        g_term = g_term * x3 / ((3 * k) * (3 * k + 1))
        f_sum += f_term
        g_sum += g_term
        if np.all(np.abs(f_term) + np.abs(g_term) <= 1e-18 * (np.abs(f_sum) + np.abs(g_sum))):
            break
    return _AI_0 * f_sum - _AI_PRIME_0 * g_sum


def _optimal_terms(zeta: np.ndarray) -> np.ndarray:
    """u_k / zeta^k, zeroed past the smallest term (optimal truncation)."""
    k = np.arange(_ASYMPTOTIC_TERMS)[:, None]
    terms = _U[:, None] / zeta[None, :] ** k
    decreasing = np.vstack([np.ones((1, zeta.size), bool), terms[1:] < terms[:-1]])
    significant = np.vstack(
        [np.ones((1, zeta.size), bool), terms[:-1] > 1e-18 * terms[0]]
    )
    keep = np.cumprod(decreasing & significant, axis=0).astype(bool)
    return np.where(keep, terms, 0.0)


def _airy_decaying(x: np.ndarray) -> np.ndarray:
    zeta = (2.0 / 3.0) * x ** 1.5
    terms = _optimal_terms(zeta)
    signs = (-1.0) ** np.arange(_ASYMPTOTIC_TERMS)[:, None]
    series = np.sum(signs * terms, axis=0)
    return np.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x ** 0.25) * series


def _airy_oscillatory(x: np.ndarray) -> np.ndarray:
    z = -x
    zeta = (2.0 / 3.0) * z ** 1.5
    terms = _optimal_terms(zeta)
    k = np.arange(_ASYMPTOTIC_TERMS)
    even = ((-1.0) ** (k // 2))[:, None] * (k % 2 == 0)[:, None]
    odd = ((-1.0) ** (k // 2))[:, None] * (k % 2 == 1)[:, None]
    p_series = np.sum(even * terms, axis=0)
    q_series = np.sum(odd * terms, axis=0)
    phase = zeta - 0.25 * math.pi
    return (np.cos(phase) * p_series + np.sin(phase) * q_series) / (
        math.sqrt(math.pi) * z ** 0.25
    )


def airy_ai(x: ArrayLike) -> ArrayLike:
    """
    Airy function Ai on [-12, 40].

    Maclaurin series for |x| <= 7, the exponentially decaying asymptotic
    expansion above, the oscillatory one below. Absolute error is around
    1e-11 or better on the whole domain.

    Args:
        x (float | np.ndarray): Argument(s)

    Returns:
        float | np.ndarray: Ai(x)

    Raises:
        DomainError: If any argument is outside [-12, 40]
    """
    xs = _finite_array(x, "x")
    lo, hi = AIRY_DOMAIN
    if np.any(xs < lo) or np.any(xs > hi):
        raise DomainError(f"airy_ai is supported on [{lo}, {hi}]")

    flat = np.atleast_1d(xs).ravel()
    out = np.empty_like(flat)

    inner = np.abs(flat) <= AIRY_SWITCH
    right = flat > AIRY_SWITCH
    left = flat < -AIRY_SWITCH

    if np.any(inner):
        out[inner] = _airy_maclaurin(flat[inner])
    if np.any(right):
        out[right] = _airy_decaying(flat[right])
    if np.any(left):
        out[left] = _airy_oscillatory(flat[left])

    return _scalar_or_array(out.reshape(xs.shape), xs)


def airy_ai_series(x: ArrayLike) -> ArrayLike:
    """Maclaurin evaluation of Ai at any finite x (used for seam checks)."""
    xs = _finite_array(x, "x")
    flat = np.atleast_1d(xs).ravel()
    return _scalar_or_array(_airy_maclaurin(flat).reshape(xs.shape), xs)


# -------------------- QUADRATURE --------------------

def _legendre_pair(m: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, m):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, p_prev


def _symmetrize(nodes: np.ndarray) -> np.ndarray:
    return 0.5 * (nodes - nodes[::-1])


def _gauss_hermite(m: int) -> QuadratureRule:
    if m == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, m) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
        for _ in range(2):
            row = hermite_phi_row(m, nodes)
            nodes = nodes - row[m] / (math.sqrt(2.0 * m) * row[m - 1])
        nodes = _symmetrize(nodes)

    # Christoffel numbers: w_i e^{x_i^2} = 1 / sum_k phi_k(x_i)^2
    phi = hermite_phi_row(m - 1, nodes)
    scaled = 1.0 / np.sum(phi * phi, axis=0)
    weights = scaled * np.exp(-nodes * nodes)

    return QuadratureRule(
        GAUSS_HERMITE, m, _readonly(nodes), _readonly(weights), _readonly(scaled)
    )


def _gauss_legendre(m: int) -> QuadratureRule:
    if m == 1:
        nodes = np.zeros(1)
    else:
        k = np.arange(1, m)
        off = k / np.sqrt(4.0 * k * k - 1.0)
        nodes = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
        for _ in range(2):
            p, p_prev = _legendre_pair(m, nodes)
            dp = m * (nodes * p - p_prev) / (nodes * nodes - 1.0)
            nodes = nodes - p / dp
        nodes = _symmetrize(nodes)

    p, p_prev = _legendre_pair(m, nodes)
    dp = m * (nodes * p - p_prev) / (nodes * nodes - 1.0)
    weights = 2.0 / ((1.0 - nodes * nodes) * dp * dp)

    return QuadratureRule(
        GAUSS_LEGENDRE, m, _readonly(nodes), _readonly(weights), _readonly(weights)
    )


@lru_cache(maxsize=None)
def quadrature_rule(kind: str, m: int) -> QuadratureRule:
    """
    Gauss-Hermite (weight e^{-x^2}) or Gauss-Legendre (on [-1, 1]) rule.

    Nodes come from the Golub-Welsch eigenvalue problem, polished by two
    Newton steps on the three-term recurrence; weights from the
    recurrence values at the polished nodes.

    Args:
        kind (str): gauss-hermite | gauss-legendre
        m (int): Number of nodes, 1..512

    Returns:
        QuadratureRule: Immutable rule (cached)
    """
    if kind not in QUADRATURE_KINDS:
        raise ArgumentError(f"Unknown quadrature kind: {kind}")
    if int(m) != m or not 1 <= m <= MAX_QUADRATURE_ORDER:
        raise ArgumentError(
            f"Quadrature order must be in 1..{MAX_QUADRATURE_ORDER}, got {m}"
        )

    if kind == GAUSS_HERMITE:
        return _gauss_hermite(int(m))
    return _gauss_legendre(int(m))


def mapped_rule(m: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre rule mapped affinely onto [a, b].

    Returns:
        Tuple[np.ndarray, np.ndarray]: nodes, weights
    """
    rule = quadrature_rule(GAUSS_LEGENDRE, m)
    half = 0.5 * (b - a)
    return half * rule.nodes + 0.5 * (a + b), half * rule.weights


def interval_rule(
    a: float,
    b: float,
    width: float = PANEL_WIDTH,
    order: int = PANEL_ORDER,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss-Legendre rule on [a, b] with panels no wider than ``width``.

    Returns:
        Tuple[np.ndarray, np.ndarray]: nodes, weights (empty when a == b)
    """
    if b < a:
        raise ArgumentError(f"Interval must satisfy a <= b, got [{a}, {b}]")
    if b == a:
        return np.zeros(0), np.zeros(0)

    panels = max(1, math.ceil((b - a) / width))
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = zip(*(mapped_rule(order, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])))
    return np.concatenate(nodes), np.concatenate(weights)
