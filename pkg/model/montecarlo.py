"""
montecarlo.py

Stochastic oracles for the exact CDFs:
- top eigenvalue of an LOE matrix X^T X, X of size (N+1) x N
- maximal height of N non-intersecting Brownian bridges, realized as the
  top eigenvalue of a Hermitian Brownian bridge, marched forward in time
  with warm-started Jacobi
- the time change linking bridges to stationary Dyson Brownian motion
- Kolmogorov-Smirnov scoring against a model CDF

Every sample draws from its own counter-based stream (master seed, sample
index), so a SampleSummary is a pure function of (seed, N, grid) no matter
how the work is split across processes.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from config.settings import (
    CHUNK_FLOAT_BUDGET,
    DEFAULT_PATH_STEPS,
    DEFAULT_SEED,
    PAIRING_TOLERANCE,
    PATH_NORMAL_BLOCK,
    PATH_S_MAX,
    worker_count,
)
from model.errors import ArgumentError, ConsistencyError, DomainError
from model.jacobi import jacobi_eigenvalues, jacobi_eigh, top_eigenvalue

# Segments whose crossing exponent exceeds this at the sample maximum are dropped
CROSSING_CUTOFF = 60.0
KS_CORRECTED_POINTS = 1024

CDF = Callable[[float], float]


# -------------------- TYPES --------------------

@dataclass(frozen=True)
class RngStream:
    """Independent random stream number ``index`` under a 64-bit master seed."""

    seed: int
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise ArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.index < 0:
            raise ArgumentError(f"stream index must be >= 0, got {self.index}")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index,))
        )


@dataclass(frozen=True)
class PathGrid:
    """Time points 0 = t_0 < ... < t_K = 1."""

    times: Tuple[float, ...]
    crossing: bool = True

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if t.size < 3:
            raise ArgumentError("a path grid needs K >= 2 steps")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise ArgumentError("path grid must start at 0 and end at 1")
        if np.any(np.diff(t) <= 0):
            raise ArgumentError("path grid must be strictly increasing")

    @property
    def K(self) -> int:
        return len(self.times) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    @classmethod
    def uniform_in_t(cls, K: int, crossing: bool = True) -> "PathGrid":
        _check_steps(K)
        return cls(tuple(np.linspace(0.0, 1.0, K + 1)), crossing)

    @classmethod
    def uniform_in_s(
        cls,
        K: int = DEFAULT_PATH_STEPS,
        s_max: float = PATH_S_MAX,
        crossing: bool = True,
    ) -> "PathGrid":
        """Interior points equally spaced in s = log(t / (1 - t)) / 2 on [-s_max, s_max]."""
        _check_steps(K)
        if K == 2:
            s = np.zeros(1)
        else:
            s = np.linspace(-s_max, s_max, K - 1)
        interior = 0.5 * (1.0 + np.tanh(s))
        return cls(tuple(np.concatenate([[0.0], interior, [1.0]])), crossing)


@dataclass(frozen=True)
class CrossingCorrection:
    """
    Grid segments near each sample maximum, for the bridge-crossing correction.

    ``maxima`` are per-sample grid maxima in path units; ``owner``, ``a``,
    ``b`` and ``dt`` describe the kept segments. Summary arguments are
    ``scale`` times path units.
    """

    maxima: np.ndarray
    owner: np.ndarray
    a: np.ndarray
    b: np.ndarray
    dt: np.ndarray
    scale: float = 1.0

    def cdf(self, x: np.ndarray) -> np.ndarray:
        levels = np.atleast_1d(np.asarray(x, dtype=float)) / self.scale
        n = self.maxima.size
        out = np.empty(levels.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k, m in enumerate(levels):
                below = self.maxima <= m
                use = below[self.owner]
                exponent = 2.0 * (m - self.a[use]) * (m - self.b[use]) / self.dt[use]
                logs = np.log1p(-np.exp(-exponent))
                per_sample = np.bincount(self.owner[use], weights=logs, minlength=n)
                out[k] = float(np.sum(np.exp(per_sample[below]))) / n
        return out


@dataclass(frozen=True)
class SampleSummary:
    """Sorted Monte Carlo sample with its seed and an empirical CDF."""

    label: str
    samples: np.ndarray
    seed: int
    crossing: Optional[CrossingCorrection] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.samples.size < 1:
            raise ArgumentError("a sample summary needs n >= 1")
        if np.any(np.diff(self.samples) < 0):
            raise ArgumentError("samples must be sorted")

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def crossing_corrected(self) -> bool:
        return self.crossing is not None

    def cdf(self, x) -> np.ndarray:
        """Empirical CDF: right-continuous step function, or the crossing-corrected estimate."""
        if self.crossing is not None:
            return self.crossing.cdf(x)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        return np.searchsorted(self.samples, xs, side="right") / self.n


@dataclass(frozen=True)
class RefinementStudy:
    K_list: Tuple[int, ...]
    means: Tuple[float, ...]
    shifts: Tuple[float, ...]
    extrapolated: float


# -------------------- UTILS --------------------

def _check_steps(K: int) -> None:
    if int(K) != K or K < 2:
        raise ArgumentError(f"K must be an integer >= 2, got {K}")


def _check_N(N: int) -> int:
    if int(N) != N or N < 1:
        raise ArgumentError(f"N must be a positive integer, got {N}")
    return int(N)


def _chunks(n: int, size: int) -> List[Tuple[int, int]]:
    size = max(1, size)
    return [(start, min(n, start + size)) for start in range(0, n, size)]


def _run_chunks(worker, jobs: List[tuple], workers: Optional[int]) -> list:
    workers = worker_count() if workers is None else workers
    if workers < 1:
        raise ArgumentError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(jobs) == 1:
        return [worker(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(worker, *zip(*jobs)))


def as_array_cdf(cdf: CDF) -> Callable[[np.ndarray], np.ndarray]:
    """Lift a scalar CDF to arrays."""
    def lifted(x):
        return np.array([cdf(float(v)) for v in np.atleast_1d(x)])
    return lifted


# -------------------- LOE --------------------

def _loe_gram(N: int, gen: np.random.Generator) -> np.ndarray:
    X = gen.standard_normal((N + 1, N))
    G = X.T @ X
    return 0.5 * (G + G.T)


def _loe_chunk(N: int, seed: int, start: int, stop: int) -> np.ndarray:
    grams = np.stack(
        [_loe_gram(N, RngStream(seed, i).generator()) for i in range(start, stop)]
    )
    return top_eigenvalue(grams)


def sample_loe_max(N: int, stream: RngStream) -> float:
    """
    One draw of the largest eigenvalue of X^T X, X (N+1) x N standard normal.

    Args:
        N (int): Matrix size
        stream (RngStream): Source of randomness

    Returns:
        float: lambda_max
    """
    N = _check_N(N)
    return float(top_eigenvalue(_loe_gram(N, stream.generator())[None])[0])


def sample_loe(
    N: int,
    n: int,
    seed: int = DEFAULT_SEED,
    workers: Optional[int] = None,
) -> SampleSummary:
    """
    n independent LOE top eigenvalues, stream index = sample index.

    Returns:
        SampleSummary: Label "loe-N<N>"
    """
    N = _check_N(N)
    if n < 1:
        raise ArgumentError(f"sample count must be >= 1, got {n}")
    RngStream(seed, 0)

    size = max(1, CHUNK_FLOAT_BUDGET // (N * N * 8))
    jobs = [(N, seed, a, b) for a, b in _chunks(n, size)]
    values = np.concatenate(_run_chunks(_loe_chunk, jobs, workers))
    return SampleSummary(f"loe-N{N}", np.sort(values), seed)


# -------------------- HERMITIAN BRIDGES --------------------

def _hermitian_from_normals(N: int, Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Real and imaginary parts of Hermitian matrices from rows of N^2 normals.

    Row layout: N diagonal entries, then the real parts, then the imaginary
    parts of the upper triangle. Off-diagonal components get half the
    diagonal variance.
    """
    n_off = N * (N - 1) // 2
    lead = Z.shape[:-1]
    diag = Z[..., :N]
    re = Z[..., N:N + n_off] * math.sqrt(0.5)
    im = Z[..., N + n_off:] * math.sqrt(0.5)

    iu = np.triu_indices(N, 1)
    idx = np.arange(N)
    X = np.zeros(lead + (N, N))
    Y = np.zeros(lead + (N, N))
    X[..., idx, idx] = diag
    X[..., iu[0], iu[1]] = re
    X[..., iu[1], iu[0]] = re
    Y[..., iu[0], iu[1]] = im
    Y[..., iu[1], iu[0]] = -im
    return X, Y


def embed_hermitian(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[X, -Y], [Y, X]] of X + iY."""
    top = np.concatenate([X, -Y], axis=-1)
    bottom = np.concatenate([Y, X], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _unpair(doubled: np.ndarray, N: int) -> Tuple[np.ndarray, float]:
    pairs = doubled.reshape(doubled.shape[:-1] + (N, 2))
    defect = float(np.max(np.abs(pairs[..., 1] - pairs[..., 0]))) if pairs.size else 0.0
    if defect > PAIRING_TOLERANCE:
        raise ConsistencyError(f"Hermitian eigenvalue pairing defect {defect:.3e}")
    return 0.5 * (pairs[..., 0] + pairs[..., 1]), defect


def hermitian_eigenvalues(X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Eigenvalues of X + iY from the doubled spectrum of the real embedding.

    Returns:
        Tuple[np.ndarray, float]: eigenvalues (..., N) ascending, pairing defect

    Raises:
        ConsistencyError: If paired eigenvalues differ by more than 1e-9
    """
    return _unpair(jacobi_eigenvalues(embed_hermitian(X, Y)), X.shape[-1])


def hermitian_path_top(X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Top eigenvalue along matrix paths X + iY of shape (B, steps, N, N).

    Each step is diagonalized starting from the previous step's eigenvectors.

    Returns:
        Tuple[np.ndarray, float]: top eigenvalues (B, steps), worst pairing defect
    """
    top = np.zeros(X.shape[:2])
    worst = 0.0
    basis = None
    for k in range(X.shape[1]):
        top[:, k], defect, basis = _warm_top(X[:, k], Y[:, k], basis)
        worst = max(worst, defect)
    return top, worst


def _warm_top(X: np.ndarray, Y: np.ndarray, basis: Optional[np.ndarray]):
    doubled, basis = jacobi_eigh(embed_hermitian(X, Y), basis)
    eigenvalues, defect = _unpair(doubled, X.shape[-1])
    return eigenvalues[..., -1], defect, basis


def _bridge_coefficients(times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # B(t1) = decay * B(t0) + spread * Z for a bridge pinned at t = 1
    t0, t1 = times[:-2], times[1:-1]
    decay = (1.0 - t1) / (1.0 - t0)
    spread = np.sqrt((t1 - t0) * decay)
    return decay, spread


def _bridge_paths(N: int, times: np.ndarray, seed: int, start: int, stop: int) -> np.ndarray:
    """
    Top-bridge paths for samples start..stop-1, marched forward in time.

    Each sample draws its normals from its own stream in blocks of
    PATH_NORMAL_BLOCK steps.
    """
    gens = [RngStream(seed, i).generator() for i in range(start, stop)]
    decay, spread = _bridge_coefficients(times)
    paths = np.zeros((stop - start, times.size))
    state = np.zeros((stop - start, N * N))
    basis = None

    for lo in range(0, decay.size, PATH_NORMAL_BLOCK):
        hi = min(lo + PATH_NORMAL_BLOCK, decay.size)
        Z = np.stack([gen.standard_normal((hi - lo, N * N)) for gen in gens], axis=1)
        for k in range(lo, hi):
            state = decay[k] * state + spread[k] * Z[k - lo]
            X, Y = _hermitian_from_normals(N, state)
            paths[:, k + 1], _, basis = _warm_top(X, Y, basis)
    return paths


def bridge_top_path(N: int, grid: PathGrid, stream: RngStream) -> np.ndarray:
    """Top-bridge heights B_N(t_k) on the grid (zero at both ends)."""
    N = _check_N(N)
    return _bridge_paths(N, grid.array, stream.seed, stream.index, stream.index + 1)[0]


def sample_bridges_max(N: int, grid: PathGrid, stream: RngStream) -> float:
    """
    One draw of max_k B_N(t_k) over the grid.

    Args:
        N (int): Number of bridges
        grid (PathGrid): Time grid
        stream (RngStream): Source of randomness

    Returns:
        float: Grid maximum of the top bridge
    """
    return float(np.max(bridge_top_path(N, grid, stream)))


def _near_max_segments(
    paths: np.ndarray, dt: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    maxima = np.max(paths, axis=1)
    a = paths[:, :-1]
    b = paths[:, 1:]
    exponent = 2.0 * (maxima[:, None] - a) * (maxima[:, None] - b) / dt[None, :]
    rows, cols = np.nonzero(exponent < CROSSING_CUTOFF)
    return rows, a[rows, cols], b[rows, cols], dt[cols]


def _bridge_chunk(N: int, times: np.ndarray, seed: int, start: int, stop: int, crossing: bool):
    paths = _bridge_paths(N, times, seed, start, stop)
    maxima = np.max(paths, axis=1)
    if not crossing:
        return maxima, None
    rows, a, b, dt = _near_max_segments(paths, np.diff(times))
    return maxima, (rows + start, a, b, dt)


def sample_bridges(
    N: int,
    n: int,
    seed: int = DEFAULT_SEED,
    grid: Optional[PathGrid] = None,
    workers: Optional[int] = None,
    scale: float = 1.0,
) -> SampleSummary:
    """
    n independent grid maxima of the top bridge, multiplied by ``scale``.

    With ``grid.crossing`` set, the summary's CDF applies the per-segment
    bridge crossing correction 1 - exp(-2 (m - a)(m - b) / dt).

    Returns:
        SampleSummary: Label "bridges-N<N>-K<K>"
    """
    N = _check_N(N)
    if n < 1:
        raise ArgumentError(f"sample count must be >= 1, got {n}")
    RngStream(seed, 0)
    grid = grid or PathGrid.uniform_in_s()
    times = grid.array

    size = max(1, CHUNK_FLOAT_BUDGET // (grid.K + 1 + PATH_NORMAL_BLOCK * N * N))
    jobs = [(N, times, seed, a, b, grid.crossing) for a, b in _chunks(n, size)]
    results = _run_chunks(_bridge_chunk, jobs, workers)

    maxima = np.concatenate([r[0] for r in results])
    crossing = None
    if grid.crossing:
        owner, a, b, dt = (np.concatenate(parts) for parts in zip(*(r[1] for r in results)))
        crossing = CrossingCorrection(maxima, owner, a, b, dt, scale)

    return SampleSummary(
        f"bridges-N{N}-K{grid.K}", np.sort(scale * maxima), seed, crossing
    )


def sample_gue_top(N: int, stream: RngStream, scale: float = 1.0) -> float:
    """
    Top eigenvalue of a Hermitian Gaussian matrix, times ``scale``.

    Diagonal entries N(0, 1), off-diagonal real and imaginary parts N(0, 1/2):
    the law of W(1) for the matrix Brownian motion driving the bridges.
    """
    N = _check_N(N)
    X, Y = _hermitian_from_normals(N, stream.generator().standard_normal((1, N * N)))
    eigenvalues, _ = hermitian_eigenvalues(X, Y)
    return scale * float(eigenvalues[0, -1])


def grid_refinement_study(
    N: int,
    K_list: Sequence[int] = (500, 1000, 2000, 4000),
    n: int = 2000,
    seed: int = DEFAULT_SEED,
    workers: Optional[int] = None,
) -> RefinementStudy:
    """
    Mean grid maximum for increasing K on uniform-in-t grids.

    ``shifts`` are the increases between consecutive K. ``extrapolated``
    assumes the grid error scales like sqrt(dt) and extrapolates the last
    pair (a heuristic, not a proven rate).
    """
    Ks = tuple(int(K) for K in K_list)
    if len(Ks) < 2 or any(b <= a for a, b in zip(Ks, Ks[1:])):
        raise ArgumentError("K_list needs at least two increasing entries")

    means = tuple(
        float(np.mean(sample_bridges(N, n, seed, PathGrid.uniform_in_t(K, False), workers).samples))
        for K in Ks
    )
    shifts = tuple(b - a for a, b in zip(means, means[1:]))
    ratio = math.sqrt(Ks[-1] / Ks[-2])
    extrapolated = means[-1] + shifts[-1] / (ratio - 1.0)
    return RefinementStudy(Ks, means, shifts, extrapolated)


# -------------------- TIME CHANGE --------------------

def time_change_to_dyson(t, B) -> Tuple[np.ndarray, np.ndarray]:
    """
    Map bridge coordinates (t, B) to Dyson coordinates (s, lambda).

    s = log(t / (1 - t)) / 2, lambda = B / sqrt(2 t (1 - t)).

    Raises:
        DomainError: If any t is outside the open interval (0, 1)
    """
    t = np.asarray(t, dtype=float)
    B = np.asarray(B, dtype=float)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise DomainError("time change is defined for t in (0, 1) only")
    s = 0.5 * np.log(t / (1.0 - t))
    lam = B / np.sqrt(2.0 * t * (1.0 - t))
    return s, lam


def dyson_to_bridge(s, lam) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of time_change_to_dyson."""
    s = np.asarray(s, dtype=float)
    lam = np.asarray(lam, dtype=float)
    t = 0.5 * (1.0 + np.tanh(s))
    B = lam / (math.sqrt(2.0) * np.cosh(s))
    return t, B


def height_event(path: np.ndarray, r: float) -> bool:
    """Indicator of max_k sqrt(2) B(t_k) <= r."""
    return bool(np.max(math.sqrt(2.0) * np.asarray(path)) <= r)


def barrier_event(grid: PathGrid, path: np.ndarray, r: float) -> bool:
    """
    Indicator of lambda(s_k) <= r cosh(s_k) at every mapped interior grid point.

    The pinned endpoints contribute the condition r >= 0.
    """
    if r < 0:
        return False
    s, lam = time_change_to_dyson(grid.array[1:-1], np.asarray(path)[1:-1])
    return bool(np.all(lam <= r * np.cosh(s)))


# -------------------- SCORING --------------------

def ks_statistic(summary: SampleSummary, cdf: CDF) -> float:
    """
    Kolmogorov-Smirnov distance between a summary and a model CDF.

    Plain summaries use scipy's one-sample statistic (both one-sided gaps
    at the sample points). Crossing-corrected summaries have a continuous
    estimate, compared on 1024 sample quantiles.

    Args:
        summary (SampleSummary): Samples (n >= 10)
        cdf (Callable[[float], float]): Model CDF

    Returns:
        float: sup |F_emp - F|
    """
    if summary.n < 10:
        raise ArgumentError(f"KS statistic needs n >= 10, got {summary.n}")

    if summary.crossing is None:
        return float(stats.kstest(summary.samples, as_array_cdf(cdf)).statistic)

    points = np.quantile(summary.samples, np.linspace(0.0, 1.0, KS_CORRECTED_POINTS))
    model = as_array_cdf(cdf)(points)
    return float(np.max(np.abs(summary.cdf(points) - model)))
