"""
verify.py

Executable identity suite.

Every check evaluates both sides of an identity numerically and records the
largest discrepancy against a tolerance. Checks never raise on failure; a
failing identity is a report entry with pass = False. Reports are sorted by
check name, and a check without an anchor string counts as failed.

Suites:
- matrix identities (conjugacy, L = Htilde^2, edge vectors, derivatives,
  determinant square, factorized det(I - Htilde))
- combinatorial and Hermite/Laguerre identities
- reflection-kernel identities
- path-integral formula for N = 1, 2
- N = 1 closed forms
- error-operator decay (informational)

Where a route sums terms much larger than its result (alternating binomial
sums, similarity transforms by badly scaled triangular matrices), the error
is measured componentwise: |difference| / max(1, sum of |terms|).
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from config.settings import (
    ALGEBRAIC_TOLERANCE,
    POLYNOMIAL_TOLERANCE,
    DECAY_HORIZONS,
    DERIVATIVE_COND_LIMIT,
    DERIVATIVE_R_FLOOR,
    DERIVATIVE_STEP,
    DERIVATIVE_TOLERANCE,
    L_IDENTITY_TOLERANCE,
    PATH_INTEGRAL_CUTOFF,
    PATH_INTEGRAL_M_GRID,
    PATH_INTEGRAL_TOLERANCES,
    REFLECTION_GRID,
    REFLECTION_HORIZONS,
    REFLECTION_TOLERANCE,
    LAGUERRE_SUM_TOLERANCE,
)
from model.errors import ArgumentError
from model.kernelmat import (
    R2_quadrature,
    build_E,
    build_H,
    build_Htilde,
    build_Htilde_integral_form,
    build_L_quadrature,
    build_L_R1_R2,
    build_Q_u_v,
    build_S_pair,
    d_inverse_dr,
    det_I_minus,
    dHtilde_dr,
    hermite_overlap_closed_form,
    laguerre_form_terms,
    log_c,
    loe_cdf,
    maxheight_cdf,
)
from model.specfun import (
    GAUSS_HERMITE,
    hermite_phi_row,
    interval_rule,
    laguerre_psi_row,
    quadrature_rule,
)


# -------------------- REPORT TYPES --------------------

def _json_number(value: float) -> Optional[float]:
    # JSON has no infinities; unbounded tolerances serialize as null
    return float(value) if math.isfinite(value) else None


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    anchor: str
    params: Dict[str, Any]
    max_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.anchor) and math.isfinite(self.max_err) and self.max_err <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "max_err": _json_number(self.max_err),
            "tol": _json_number(self.tol),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    """Named checks plus informational (non-gating) entries."""

    suite: str
    checks: Tuple[VerificationCheck, ...]
    seed: int = 0
    informational: Tuple[VerificationCheck, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[VerificationCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "suite": self.suite,
            "seed": int(self.seed),
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
        }
        if self.informational:
            out["informational"] = [c.to_dict() for c in self.informational]
        return out


def make_report(
    suite: str,
    checks: Iterable[VerificationCheck],
    seed: int = 0,
    informational: Iterable[VerificationCheck] = (),
) -> VerificationReport:
    """Assemble a report with checks sorted by name."""
    return VerificationReport(
        suite,
        tuple(sorted(checks, key=lambda c: c.name)),
        seed,
        tuple(sorted(informational, key=lambda c: c.name)),
    )


def merge_reports(suite: str, reports: Sequence[VerificationReport], seed: int = 0) -> VerificationReport:
    checks = [c for rep in reports for c in rep.checks]
    info = [c for rep in reports for c in rep.informational]
    return make_report(suite, checks, seed, info)


def _check(base: str, anchor: str, params: Dict[str, Any], err: float, tol: float) -> VerificationCheck:
    label = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in params.items())
    name = f"{base}[{label}]" if label else base
    return VerificationCheck(name, anchor, dict(params), float(err), float(tol))


def _max_abs(A) -> float:
    A = np.asarray(A, dtype=float)
    return float(np.max(np.abs(A))) if A.size else 0.0


def _componentwise(diff: np.ndarray, scale: np.ndarray) -> float:
    return _max_abs(np.abs(diff) / np.maximum(1.0, scale))


# -------------------- MATRIX IDENTITIES --------------------

def conjugacy_error(N: int, r: float) -> float:
    """Componentwise error of Sinv Htilde S = H."""
    S, Sinv = build_S_pair(N, r)
    Ht = build_Htilde(N, r).entries
    H = build_H(N, r).entries
    diff = Sinv.entries @ Ht @ S.entries - H
    scale = np.abs(Sinv.entries) @ np.abs(Ht) @ np.abs(S.entries)
    return _componentwise(diff, scale)


def conjugacy_absolute_error(N: int, r: float) -> float:
    """Plain max |Sinv Htilde S - H|; grows with the scaling of S."""
    S, Sinv = build_S_pair(N, r)
    diff = Sinv.entries @ build_Htilde(N, r).entries @ S.entries - build_H(N, r).entries
    return _max_abs(diff)


def laguerre_form_error(N: int, r: float) -> float:
    """Componentwise error between H built by quadrature and by its Laguerre form."""
    H = build_H(N, r).entries
    worst = 0.0
    for i in range(N):
        for j in range(i, N):
            terms = laguerre_form_terms(N, r, i, j)
            err = abs(float(np.sum(terms)) - H[i, j]) / max(1.0, float(np.sum(np.abs(terms))))
            worst = max(worst, err)
    return worst


def _derivative_fd(build, N: int, r: float, h: float) -> np.ndarray:
    return (build(N, r + h) - build(N, r - h)) / (2.0 * h)


def _inverse_I_plus_Htilde(N: int, r: float) -> np.ndarray:
    return np.linalg.inv(np.eye(N) + build_Htilde(N, r).entries)


def _matrix_checks(N: int, r: float) -> Tuple[List[VerificationCheck], List[VerificationCheck]]:
    params = {"N": N, "r": float(r)}
    checks: List[VerificationCheck] = []

    H = build_H(N, r)
    Ht = build_Htilde(N, r).entries
    L, edges = build_L_R1_R2(N, r)
    Q, _ = build_Q_u_v(N, r)
    Qe = Q.entries
    E = build_E(N, r)
    u, v = edges.u, edges.v
    I = np.eye(N)

    checks.append(_check(
        "conjugacy", "S^-1 Htilde S = H", params,
        conjugacy_error(N, r), ALGEBRAIC_TOLERANCE,
    ))
    checks.append(_check(
        "L_identity", "Htilde^2 = int_{2r^2}^inf psi_j psi_k", params,
        _max_abs(Ht @ Ht - build_L_quadrature(N, r).entries), L_IDENTITY_TOLERANCE,
    ))
    checks.append(_check(
        "edge_R1", "Htilde u = psi(2r^2)", params,
        _max_abs(Ht @ u - edges.R1), ALGEBRAIC_TOLERANCE,
    ))
    r2_side = (I - Ht) @ v
    checks.append(_check(
        "edge_R2", "(I - Htilde) v = int_0^{2r^2} psi", params,
        max(_max_abs(r2_side - R2_quadrature(N, r)), _max_abs(r2_side - edges.R2)),
        ALGEBRAIC_TOLERANCE,
    ))
    checks.append(_check(
        "anticommutator", "Q Htilde = -Htilde Q - E", params,
        _max_abs(Qe @ Ht + Ht @ Qe + E), ALGEBRAIC_TOLERANCE,
    ))
    checks.append(_check(
        "Qv", "Q v = (-1)^N 4 r u", params,
        _max_abs(Qe @ v - (-1.0) ** N * 4.0 * r * u), ALGEBRAIC_TOLERANCE,
    ))
    checks.append(_check(
        "uv_parity", "<u, v> = 0 (N even), 2 (N odd)", params,
        abs(float(u @ v) - (0.0 if N % 2 == 0 else 2.0)), ALGEBRAIC_TOLERANCE,
    ))
    checks.append(_check(
        "Htilde_integral_form", "Htilde via Psi_n below the anti-diagonal", params,
        _max_abs(build_Htilde_integral_form(N, r).entries - Ht), ALGEBRAIC_TOLERANCE,
    ))
    checks.append(_check(
        "H_laguerre_form", "H_ij = (c_j/c_i) sum_k C(j-i,k-i) (-1)^k psi_k(2r^2)", params,
        laguerre_form_error(N, r), ALGEBRAIC_TOLERANCE,
    ))

    det_H = det_I_minus(H)
    det_LR = det_I_minus(L.entries + np.outer(edges.R1, edges.R2))
    checks.append(_check(
        "determinant_square", "det(I - H)^2 = det(I - L - R1 R2^T)", params,
        abs(det_H ** 2 - det_LR) / max(1.0, abs(det_LR)), ALGEBRAIC_TOLERANCE,
    ))

    inv_plus = np.linalg.inv(I + Ht)
    factored = det_I_minus(-Ht) * (1.0 - float(u @ inv_plus @ Ht @ v))
    checks.append(_check(
        "det_Htilde_factorization", "det(I - Htilde) = det(I + Htilde)(1 - <u,(I+Htilde)^-1 Htilde v>)",
        params, abs(det_I_minus(Ht) - factored), ALGEBRAIC_TOLERANCE,
    ))

    h = DERIVATIVE_STEP
    if r > h:
        fd = _derivative_fd(lambda n, x: build_Htilde(n, x).entries, N, r, h)
        checks.append(_check(
            "dHtilde_dr", "d/dr Htilde = Q Htilde", params,
            _componentwise(fd - dHtilde_dr(N, r), np.abs(Qe) @ np.abs(Ht)), DERIVATIVE_TOLERANCE,
        ))

    info = [_check(
        "conjugacy_absolute", "max |S^-1 Htilde S - H|", params,
        conjugacy_absolute_error(N, r), math.inf,
    )]

    if r >= DERIVATIVE_R_FLOOR:
        cond = float(np.linalg.cond(I - Ht @ Ht))
        if cond <= DERIVATIVE_COND_LIMIT:
            checks.extend(_resolvent_checks(N, r, Ht, Qe, E, u, v, params))
        else:
            info.append(_check(
                "resolvent_derivative_skipped", "cond(I - Htilde^2) above DERIVATIVE_COND_LIMIT", params,
                cond if math.isfinite(cond) else float(np.finfo(float).max), math.inf,
            ))

    return checks, info


def _richardson(f, r: float, h: float) -> np.ndarray:
    coarse = (f(r + h) - f(r - h)) / (2.0 * h)
    fine = (f(r + 0.5 * h) - f(r - 0.5 * h)) / h
    return (4.0 * fine - coarse) / 3.0


def _resolvent_checks(N, r, Ht, Qe, E, u, v, params) -> List[VerificationCheck]:
    """
    Derivative of (I + Htilde)^-1 checked three ways: against the chain rule,
    against a Richardson difference, and through the trace identity.

    Errors are componentwise against the magnitudes of the terms each side sums.
    The difference step shrinks with ||(I+Htilde)^-1|| ||dHtilde||, so the
    truncation error stays relative to the derivative it approximates.
    """
    I = np.eye(N)
    plus_inv = np.linalg.inv(I + Ht)
    resolvent = np.linalg.inv(I - Ht @ Ht)
    dHt = Qe @ Ht
    closed = d_inverse_dr(N, r)

    abs_plus, abs_res = np.abs(plus_inv), np.abs(resolvent)
    chain_scale = abs_plus @ np.abs(dHt) @ abs_plus
    closed_scale = abs_res @ np.abs(Ht @ Qe) + abs_res @ np.abs(E) @ abs_plus
    scale = chain_scale + closed_scale

    checks = [_check(
        "d_inverse_dr",
        "d/dr (I+Htilde)^-1 = (I-Htilde^2)^-1 Htilde Q + (I-Htilde^2)^-1 E (I+Htilde)^-1",
        params, _componentwise(closed + plus_inv @ dHt @ plus_inv, scale), DERIVATIVE_TOLERANCE,
    )]

    stiffness = float(np.linalg.norm(plus_inv, 2) * np.linalg.norm(dHt, 2))
    h = DERIVATIVE_STEP / max(1.0, stiffness)
    fd = _richardson(lambda x: _inverse_I_plus_Htilde(N, x), r, h)
    checks.append(_check(
        "d_inverse_dr_fd", "Richardson difference of (I+Htilde)^-1", params,
        _componentwise(fd - closed, scale), DERIVATIVE_TOLERANCE,
    ))

    trace = -2.0 * float(np.trace(resolvent @ dHt))
    trace_mag = 2.0 * float(np.sum(abs_res * np.abs(dHt).T))
    bracket = (-1.0) ** N + float(u @ plus_inv @ v)
    bracket_mag = 1.0 + float(np.abs(u) @ abs_plus @ np.abs(v))
    rhs = float(u @ closed @ v)
    rhs_mag = float(np.abs(u) @ closed_scale @ np.abs(v))
    checks.append(_check(
        "trace_identity",
        "-2 Tr((I-Htilde^2)^-1 dHtilde)[(-1)^N + <u,(I+Htilde)^-1 v>] = <u, d(I+Htilde)^-1 v>",
        params, abs(trace * bracket - rhs) / max(1.0, trace_mag * bracket_mag + rhs_mag),
        DERIVATIVE_TOLERANCE,
    ))
    return checks


def verify_matrix_identities(N_set: Iterable[int], r_set: Iterable[float]) -> VerificationReport:
    """
    Check the finite-matrix identities for every (N, r) pair.

    Args:
        N_set (Iterable[int]): Sizes in 1..16
        r_set (Iterable[float]): Barrier parameters in (0, 8]

    Returns:
        VerificationReport: Suite "matrix-identities"
    """
    Ns = sorted({int(N) for N in N_set})
    rs = sorted({float(r) for r in r_set})
    if any(N < 1 or N > 16 for N in Ns):
        raise ArgumentError("N_set must lie in 1..16")
    if any(r <= 0 or r > 8 for r in rs):
        raise ArgumentError("r_set must lie in (0, 8]")

    checks: List[VerificationCheck] = []
    info: List[VerificationCheck] = []
    for N in Ns:
        for r in rs:
            c, i = _matrix_checks(N, r)
            checks.extend(c)
            info.extend(i)
    return make_report("matrix-identities", checks, informational=info)


# -------------------- COMBINATORIAL AND POLYNOMIAL IDENTITIES --------------------

def binom(k: int, l: int) -> int:
    """
    Binomial coefficient with C(k, l) = 0 for l < 0 or l > k (k >= 0).

    For k = l = -1 the Gamma-function limit 1 is used.
    """
    if k < 0:
        return 1 if l == k else 0
    if l < 0 or l > k:
        return 0
    return math.comb(k, l)


def alternating_binom_left(n: int, m: int, a: int) -> int:
    """sum over i, j >= 0 with j - i = a of C(n, i) C(j, m) (-1)^i."""
    return sum(
        binom(n, i) * binom(i + a, m) * (-1) ** i
        for i in range(max(0, -a), n + 1)
    )


def alternating_binom_right(n: int, m: int, a: int) -> int:
    if a >= 0:
        return (-1) ** n * binom(a, m - n)
    if n < m - a:
        return 0
    return (-1) ** (m - a) * binom(n - m - 1, n - m + a)


def _alternating_binom_check(n_max: int, a_max: int) -> VerificationCheck:
    defects = [
        abs(alternating_binom_left(n, m, a) - alternating_binom_right(n, m, a))
        for n in range(n_max + 1)
        for m in range(n_max + 1)
        for a in range(-a_max, a_max + 1)
    ]
    return _check(
        "alternating_binom", "sum_{j-i=a} C(n,i) C(j,m) (-1)^i closed form",
        {"n_max": n_max, "a_max": a_max}, float(max(defects)), 0.0,
    )


def _hermite_overlap_checks(n_max: int, r_values: Sequence[float]) -> List[VerificationCheck]:
    checks = []
    N = n_max + 1
    for r in r_values:
        H_quad = build_H(N, r, nodes=64).entries
        lc = log_c(N, r)
        psi = laguerre_psi_row(n_max, 2.0 * r * r)
        closed_vs_quad = lag_vs_quad = closed_vs_lag = 0.0
        for n in range(N):
            for m in range(n + 1):
                closed = hermite_overlap_closed_form(n, m, r)
                closed_scale = math.exp(-r * r) * sum(
                    2.0 ** l * math.factorial(l) * math.comb(n, l) * math.comb(m, l)
                    * (2.0 * r) ** (n + m - 2 * l)
                    for l in range(m + 1)
                ) / math.sqrt(2.0 ** (n + m) * math.factorial(n) * math.factorial(m))

                ratio = math.exp(lc[n] - lc[m])
                terms = np.array([
                    ratio * math.comb(n - m, k - m) * (-1.0) ** k * psi[k]
                    for k in range(m, n + 1)
                ])
                lag = float(np.sum(terms))
                lag_scale = float(np.sum(np.abs(terms)))

                quad = H_quad[n, m]
                closed_vs_quad = max(closed_vs_quad, abs(closed - quad) / max(1.0, closed_scale))
                lag_vs_quad = max(lag_vs_quad, abs(lag - quad) / max(1.0, lag_scale))
                closed_vs_lag = max(
                    closed_vs_lag, abs(closed - lag) / max(1.0, closed_scale, lag_scale)
                )

        params = {"n_max": n_max, "r": float(r)}
        anchor = "int phi_n(x) phi_m(2r-x) dx: closed sum / Laguerre sum / quadrature"
        checks.append(_check("hermite_overlap_closed_vs_quadrature", anchor, params, closed_vs_quad, POLYNOMIAL_TOLERANCE))
        checks.append(_check("hermite_overlap_laguerre_vs_quadrature", anchor, params, lag_vs_quad, POLYNOMIAL_TOLERANCE))
        checks.append(_check("hermite_overlap_closed_vs_laguerre", anchor, params, closed_vs_lag, POLYNOMIAL_TOLERANCE))

    H0 = build_H(N, 0.0).entries
    expected = np.diag((-1.0) ** np.arange(N))
    checks.append(_check(
        "hermite_overlap_r0", "int phi_n(x) phi_m(-x) dx = (-1)^n 1{m=n}",
        {"n_max": n_max}, _max_abs(H0 - expected), POLYNOMIAL_TOLERANCE,
    ))
    return checks


def laguerre_sum_sides(n: int, m: int, x: float) -> Tuple[float, float, float]:
    """
    Both sides of the Laguerre sum identity (n >= m) and the magnitude of their terms.

    Returns:
        Tuple[float, float, float]: left, right, sum of |terms|
    """
    lag = laguerre_psi_row(n, x) * math.exp(0.5 * x)
    left_terms = [
        (-1.0) ** m * x ** n / math.factorial(n) * binom(n - k - 1, n - m - 1) * lag[k]
        for k in range(m + 1)
    ]
    right_terms = [
        x ** m / math.factorial(m) * binom(n - m, k - m) * (-1.0) ** k * lag[k]
        for k in range(m, n + 1)
    ]
    scale = sum(abs(t) for t in left_terms) + sum(abs(t) for t in right_terms)
    return math.fsum(left_terms), math.fsum(right_terms), scale


def _laguerre_sum_check(n_max: int, x_values: Sequence[float]) -> List[VerificationCheck]:
    checks = []
    for x in x_values:
        worst = 0.0
        for n in range(n_max + 1):
            for m in range(n + 1):
                left, right, scale = laguerre_sum_sides(n, m, x)
                worst = max(worst, abs(left - right) / max(1.0, scale))
        checks.append(_check(
            "laguerre_sum", "(-1)^m x^n/n! sum C(n-k-1,n-m-1) L_k = x^m/m! sum C(n-m,k-m)(-1)^k L_k",
            {"n_max": n_max, "x": float(x)}, worst, LAGUERRE_SUM_TOLERANCE,
        ))
    return checks


def verify_appendix_lemmas(
    binom_n_max: int = 20,
    binom_a_max: int = 20,
    hermite_n_max: int = 15,
    hermite_r: Sequence[float] = (0.3, 1.0, 2.5),
    laguerre_n_max: int = 15,
    laguerre_x: Sequence[float] = (0.1, 1.0, 7.3),
) -> VerificationReport:
    """
    Binomial convolution (exact integers), Hermite overlap three ways, Laguerre sums.

    Returns:
        VerificationReport: Suite "polynomial-identities"
    """
    checks = [_alternating_binom_check(binom_n_max, binom_a_max)]
    checks += _hermite_overlap_checks(hermite_n_max, hermite_r)
    checks += _laguerre_sum_check(laguerre_n_max, laguerre_x)
    return make_report("polynomial-identities", checks)


# -------------------- REFLECTION KERNEL --------------------

def _horizon_constants(l1: float, l2: float) -> Tuple[float, float]:
    return 0.25 * math.exp(2.0 * l1), 0.25 * math.exp(2.0 * l2)


def reflection_exponent(x, y, r: float, l1: float, l2: float):
    """Exponent of the reflection term for the cosh barrier on [l1, l2]."""
    alpha, beta = _horizon_constants(l1, l2)
    gap = beta - alpha
    e1, e2 = math.exp(l1), math.exp(l2)
    return (
        0.5 * (y * y - x * x)
        + l2
        - r * (e2 * y - e1 * x)
        + r * r * gap
        - (e1 * x + e2 * y - 2.0 * r * (alpha + beta) - r) ** 2 / (4.0 * gap)
    )


def reflection_kernel(x, y, r: float, l1: float, l2: float):
    """
    Reflection term R_[l1,l2](x, y) of the killed Ornstein-Uhlenbeck kernel.

    Args:
        x, y: Evaluation points (broadcastable)
        r (float): Barrier parameter of r cosh(t)
        l1, l2 (float): Horizon, l1 < l2

    Returns:
        Kernel value(s)
    """
    if not l1 < l2:
        raise ArgumentError(f"need l1 < l2, got [{l1}, {l2}]")
    alpha, beta = _horizon_constants(l1, l2)
    return np.exp(reflection_exponent(x, y, r, l1, l2)) / math.sqrt(4.0 * math.pi * (beta - alpha))


def mehler_kernel(x, y, L: float):
    """Kernel of e^{-L D}: sum_n e^{-L n} phi_n(x) phi_n(y)."""
    q = math.exp(-L)
    q2 = q * q
    return np.exp(
        -((1.0 + q2) * (x * x + y * y) - 4.0 * q * x * y) / (2.0 * (1.0 - q2))
    ) / math.sqrt(math.pi * (1.0 - q2))


def _gaussian_integral(log_f, values, nodes: int = 32) -> np.ndarray:
    """
    int values(z) exp(log_f(z)) dz for log_f quadratic in z and values polynomial.

    The quadratic is read off from three samples and the integral is done by
    Gauss-Hermite quadrature after completing the square.
    """
    f_m, f_0, f_p = log_f(-1.0), log_f(0.0), log_f(1.0)
    A = 0.5 * (f_p + f_m - 2.0 * f_0)
    B = 0.5 * (f_p - f_m)
    s = math.sqrt(-A)
    z0 = -B / (2.0 * A)

    rule = quadrature_rule(GAUSS_HERMITE, nodes)
    z = z0 + rule.nodes / s
    integrand = values(z) * np.exp(log_f(z) + rule.nodes ** 2)
    return integrand @ rule.weights / s


def reflection_left_error(N: int, r: float, L: float, grid: Sequence[float]) -> float:
    """
    max over (x, y) of |int dz sum_n e^{Ln} phi_n(x) phi_n(z) R_[-L,0](z, y) - K(x, 2r - y)|.
    """
    grid = np.asarray(grid, dtype=float)
    weights = np.exp(L * np.arange(N))
    alpha, beta = _horizon_constants(-L, 0.0)
    norm = 0.5 * math.log(4.0 * math.pi * (beta - alpha))
    worst = 0.0
    for y in grid:
        # int phi_n(z) R(z, y) dz for every n
        moments = _gaussian_integral(
            lambda z: reflection_exponent(z, y, r, -L, 0.0) - norm - 0.5 * z * z,
            lambda z: hermite_phi_row(N - 1, z) * np.exp(0.5 * z * z),
        )
        phi_x = hermite_phi_row(N - 1, grid)
        left = (weights * moments) @ phi_x
        right = hermite_phi_row(N - 1, 2.0 * r - y) @ phi_x
        worst = max(worst, _max_abs(left - right))
    return worst


def reflection_right_error(N: int, r: float, L: float, grid: Sequence[float]) -> float:
    """
    max over (x, y) of |int dz R_[0,L](x, z) sum_n e^{Ln} phi_n(z) phi_n(y) - K(2r - x, y)|.
    """
    grid = np.asarray(grid, dtype=float)
    weights = np.exp(L * np.arange(N))
    alpha, beta = _horizon_constants(0.0, L)
    norm = 0.5 * math.log(4.0 * math.pi * (beta - alpha))
    worst = 0.0
    for x in grid:
        moments = _gaussian_integral(
            lambda z: reflection_exponent(x, z, r, 0.0, L) - norm - 0.5 * z * z,
            lambda z: hermite_phi_row(N - 1, z) * np.exp(0.5 * z * z),
        )
        phi_y = hermite_phi_row(N - 1, grid)
        left = (weights * moments) @ phi_y
        right = hermite_phi_row(N - 1, 2.0 * r - x) @ phi_y
        worst = max(worst, _max_abs(left - right))
    return worst


def verify_reflection_identity(
    N_values: Iterable[int],
    r_values: Iterable[float],
    horizons: Iterable[float] = REFLECTION_HORIZONS,
    grid: Sequence[float] = REFLECTION_GRID,
) -> VerificationReport:
    """
    Both reflection identities on an (x, y) grid.

    e^{LD} K R_[-L,0] = K rho_r   and   R_[0,L] e^{LD} K = rho_r K,
    with rho_r f(x) = f(2r - x).

    Returns:
        VerificationReport: Suite "reflection"
    """
    checks = []
    for N in sorted({int(n) for n in N_values}):
        if not 1 <= N <= 8:
            raise ArgumentError("reflection check supports 1 <= N <= 8")
        for r in sorted({float(x) for x in r_values}):
            if not 0 < r <= 4:
                raise ArgumentError("reflection check supports r in (0, 4]")
            for L in sorted({float(h) for h in horizons}):
                if not 0.5 <= L <= 3:
                    raise ArgumentError("reflection check supports L in [0.5, 3]")
                params = {"N": N, "r": r, "L": L}
                checks.append(_check(
                    "reflection_left", "e^{LD} K R_[-L,0] = K rho_r", params,
                    reflection_left_error(N, r, L, grid), REFLECTION_TOLERANCE,
                ))
                checks.append(_check(
                    "reflection_right", "R_[0,L] e^{LD} K = rho_r K", params,
                    reflection_right_error(N, r, L, grid), REFLECTION_TOLERANCE,
                ))
    return make_report("reflection", checks)


def error_operator_hs_norm(N: int, r: float, L: float, span: float = 12.0) -> float:
    """
    Hilbert-Schmidt norm of e^{LD} K Omega_L e^{LD} K in the phi basis.

    Omega_L = A Pbar_r B - Pbar_c A Pbar_r B Pbar_c with A = e^{-LD} - R_[-L,0],
    B = e^{-LD} - R_[0,L], c = r cosh(L), Pbar_a = restriction to x <= a.
    """
    c = r * math.cosh(L)
    z, wz = interval_rule(r - 14.0, r, 1.0, 20)
    t, wt = interval_rule(c, c + span, 1.0, 20)
    weights = np.exp(L * np.arange(N))

    phi_t = hermite_phi_row(N - 1, t)
    ZZ, TT = np.meshgrid(z, t, indexing="ij")

    A_tail = mehler_kernel(TT, ZZ, L) - reflection_kernel(TT, ZZ, r, -L, 0.0)
    B_tail = mehler_kernel(ZZ, TT, L) - reflection_kernel(ZZ, TT, r, 0.0, L)

    Ta = weights[:, None] * ((phi_t * wt) @ A_tail.T)
    Tb = weights[:, None] * ((phi_t * wt) @ B_tail.T)
    F = hermite_phi_row(N - 1, z) - hermite_phi_row(N - 1, 2.0 * r - z)

    M = (F * wz) @ Tb.T + (Ta * wz) @ F.T - (Ta * wz) @ Tb.T
    return float(np.linalg.norm(M))


def decay_checks(N: int = 2, r: float = 1.0, horizons: Sequence[float] = DECAY_HORIZONS) -> List[VerificationCheck]:
    """Informational: the error-operator norm should shrink as L grows."""
    norms = [error_operator_hs_norm(N, r, L) for L in horizons]
    increases = [max(0.0, b - a) for a, b in zip(norms, norms[1:])]
    checks = [
        _check("error_operator_norm", "||e^{LD} K Omega_L e^{LD} K||_HS -> 0",
               {"N": N, "r": float(r), "L": float(L)}, value, math.inf)
        for L, value in zip(horizons, norms)
    ]
    checks.append(_check(
        "error_operator_monotone", "||e^{LD} K Omega_L e^{LD} K||_HS decreasing in L",
        {"N": N, "r": float(r)}, max(increases) if increases else 0.0, 0.0,
    ))
    return checks


# -------------------- PATH INTEGRAL --------------------

def _gaussian_moment(m: float, f) -> float:
    top = m * math.sqrt(2.0 * PATH_INTEGRAL_CUTOFF)
    value, _ = integrate.quad(
        lambda y: math.exp(-y * y / (2.0 * m * m)) * f(y),
        0.0, top, limit=400, epsabs=1e-14, epsrel=1e-12,
    )
    return value


def path_integral_cdf(N: int, m: float) -> float:
    """
    P(max_t B_N(t) <= m) from the N-fold path integral, N in {1, 2}.

    For N = 2 the squared 2 x 2 determinant is expanded so that the
    integral factorizes into products of one-dimensional integrals.
    """
    if N not in (1, 2):
        raise ArgumentError("path integral is implemented for N = 1, 2")
    if m <= 0:
        raise ArgumentError("m must be positive")

    prefactor = 2.0 ** (2 * N) / (
        (2.0 * math.pi) ** (N / 2.0) * m ** (N * N)
        * math.prod(math.factorial(j) for j in range(1, N + 1))
    )

    if N == 1:
        return prefactor * _gaussian_moment(m, lambda y: math.sin(y) ** 2)

    sin_sq = _gaussian_moment(m, lambda y: math.sin(y) ** 2)
    ycos_sq = _gaussian_moment(m, lambda y: (y * math.cos(y)) ** 2)
    mixed = _gaussian_moment(m, lambda y: y * math.sin(y) * math.cos(y))
    return prefactor * 2.0 * (sin_sq * ycos_sq - mixed * mixed)


def verify_pathintegral_smallN(
    N_values: Iterable[int] = (1, 2),
    m_grid: Iterable[float] = PATH_INTEGRAL_M_GRID,
) -> VerificationReport:
    """
    Path-integral formula against maxheight_cdf.

    Returns:
        VerificationReport: Suite "path-integral"
    """
    checks = []
    for N in sorted({int(n) for n in N_values}):
        tol = PATH_INTEGRAL_TOLERANCES.get(N)
        if tol is None:
            raise ArgumentError("path integral is implemented for N = 1, 2")
        for m in sorted({float(x) for x in m_grid}):
            if not 0.4 <= m <= 3.0:
                raise ArgumentError("m_grid must lie in [0.4, 3]")
            err = abs(path_integral_cdf(N, m) - maxheight_cdf(N, m))
            checks.append(_check(
                "path_integral", "P(M_N <= m) = N-fold Gaussian path integral",
                {"N": N, "m": m}, err, tol,
            ))
    return make_report("path-integral", checks)


# -------------------- CLOSED FORMS --------------------

def verify_closed_forms(points: int = 50) -> VerificationReport:
    """N = 1: maxheight 1 - e^{-2m^2}, LOE 1 - e^{-s/2}."""
    m = np.linspace(0.05, 3.0, points)
    s = np.linspace(0.1, 20.0, points)
    max_err = max(abs(maxheight_cdf(1, x) + math.expm1(-2.0 * x * x)) for x in m)
    loe_err = max(abs(loe_cdf(1, x) + math.expm1(-0.5 * x)) for x in s)
    return make_report("closed-forms", [
        _check("single_bridge", "P(M_1 <= m) = 1 - e^{-2m^2}", {"points": points}, max_err, 1e-12),
        _check("loe_one", "F_LOE,1(s) = 1 - e^{-s/2}", {"points": points}, loe_err, 1e-12),
    ])


# -------------------- FULL SUITE --------------------

def verify_all(
    n_max: int = 8,
    r_set: Sequence[float] = (0.5, 1.0, 2.0),
    seed: int = 0,
    informational: bool = True,
) -> VerificationReport:
    """
    Every suite at once.

    Args:
        n_max (int): Largest N for the matrix identities (<= 16)
        r_set (Sequence[float]): Barrier parameters in (0, 8]
        seed (int): Recorded in the report (the suite is deterministic)
        informational (bool): Also compute the error-operator decay entries

    Returns:
        VerificationReport: Suite "verify"
    """
    if not 1 <= n_max <= 16:
        raise ArgumentError("n_max must lie in 1..16")

    reflection_N = sorted({1, min(4, n_max), min(8, n_max)})
    reflection_r = [r for r in r_set if 0 < r <= 4] or [1.0]

    reports = [
        verify_matrix_identities(range(1, n_max + 1), r_set),
        verify_appendix_lemmas(),
        verify_reflection_identity(reflection_N, reflection_r),
        verify_pathintegral_smallN(),
        verify_closed_forms(),
    ]
    merged = merge_reports("verify", reports, seed)
    if not informational:
        return make_report("verify", merged.checks, seed)
    return make_report("verify", merged.checks, seed, [*merged.informational, *decay_checks()])
