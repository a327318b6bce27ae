"""Problem-independent level-to-level map.

The column-orthonormal matrix closest (in Frobenius norm) to the 0/1 superset
matrix has entries that depend only on the overlap between the target
(i+1)-set and source i-set, ``U[r, beta] = a[|r & beta|]``.  Orthonormality
of the columns reduces to ``i + 1`` quadratic equations in ``a_0..a_i``, solved
here by damped Newton iteration.  An SVD of the dense matrix serves as an
independent check for small N.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import binomial, level_masks, level_size

TOL = 1e-12
MAX_ITER = 200
MAX_DENSE_ENTRIES = 50_000_000


class CoefficientError(RuntimeError):
    def __init__(self, msg: str, residual: float = float("nan")):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class MapCoefficients:
    N: int
    i: int
    a: tuple[float, ...]
    residual: float = 0.0

    @property
    def array(self) -> np.ndarray:
        return np.array(self.a)


@dataclass(frozen=True)
class DenseLevelMap:
    N: int
    i: int
    entries: np.ndarray  # level_size(N, i+1) x level_size(N, i)


def check_levels(N: int, i: int) -> None:
    if i < 0 or i + 1 > N - i:
        raise ValueError(
            f"map from level {i} needs i + 1 <= N - i (fewer target than source sets at N={N})"
        )


def overlap_count_nk(N: int, i: int, k: int) -> int:
    """Number of (i+1)-sets meeting a fixed i-set in exactly ``k`` items."""
    return binomial(i, k) * binomial(N - i, i + 1 - k)


def pair_overlap_count(N: int, i: int, p: int, j: int, k: int) -> int:
    """Number of (i+1)-sets r with |r & alpha| = k and |r & beta| = j, given |alpha & beta| = p."""
    total = 0
    for x in range(0, min(j, k, p) + 1):
        total += (
            binomial(i - p, k - x)
            * binomial(p, x)
            * binomial(i - p, j - x)
            * binomial(N - 2 * i + p, i + 1 - j - k + x)
        ) if N - 2 * i + p >= 0 else 0
    return total


@lru_cache(maxsize=None)
def _system(N: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.array([overlap_count_nk(N, i, k) for k in range(i + 1)], dtype=float)
    Q = np.array(
        [
            [[pair_overlap_count(N, i, p, j, k) for k in range(i + 1)] for j in range(i + 1)]
            for p in range(i)
        ],
        dtype=float,
    ).reshape(i, i + 1, i + 1)
    return n, Q


def unitarity_residuals(N: int, i: int, a) -> np.ndarray:
    """Residuals of the column-norm equation followed by one orthogonality equation per overlap p < i."""
    a = np.asarray(a, dtype=float)
    n, Q = _system(N, i)
    norm = np.dot(n, a * a) - 1.0
    ortho = np.einsum("pjk,j,k->p", Q, a, a)
    return np.concatenate([[norm], ortho])


def _jacobian(n: np.ndarray, Q: np.ndarray, a: np.ndarray) -> np.ndarray:
    rows = [2.0 * n * a]
    for Qp in Q:
        rows.append((Qp + Qp.T) @ a)
    return np.array(rows)


def superset_distance(N: int, i: int, a) -> float:
    """Squared Frobenius distance per column to the 0/1 superset matrix."""
    a = np.asarray(a, dtype=float)
    n, _ = _system(N, i)
    return float(n[i] * (a[i] - 1.0) ** 2 + np.dot(n[:i], a[:i] ** 2))


def _newton(N: int, i: int, a0: np.ndarray) -> tuple[np.ndarray, float]:
    n, Q = _system(N, i)
    a = a0.copy()
    F = unitarity_residuals(N, i, a)
    res = np.max(np.abs(F))
    for _ in range(MAX_ITER):
        if res <= TOL:
            break
        try:
            step = np.linalg.solve(_jacobian(n, Q, a), -F)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            trial = a + lam * step
            Ft = unitarity_residuals(N, i, trial)
            rt = np.max(np.abs(Ft))
            if rt < res:
                break
            lam *= 0.5
        else:
            break
        a, F, res = trial, Ft, rt
    # a couple of undamped polish steps once inside the basin
    for _ in range(3):
        try:
            step = np.linalg.solve(_jacobian(n, Q, a), -F)
        except np.linalg.LinAlgError:
            break
        trial = a + step
        Ft = unitarity_residuals(N, i, trial)
        rt = np.max(np.abs(Ft))
        if rt >= res:
            break
        a, F, res = trial, Ft, rt
    return a, float(res)


def ideal_start(N: int, i: int) -> np.ndarray:
    a = np.zeros(i + 1)
    a[i] = 1.0 / np.sqrt(N - i)
    return a


_cache_lock = threading.Lock()


@lru_cache(maxsize=None)
def _solve_cached(N: int, i: int) -> MapCoefficients:
    starts = [ideal_start(N, i)]
    rng = np.random.default_rng([N, i])
    base = starts[0]
    for _ in range(4):
        starts.append(base * (1.0 + 0.2 * rng.standard_normal(i + 1)) + 0.05 * base[i] * rng.standard_normal(i + 1))
    best, best_res, best_dist = None, np.inf, np.inf
    worst = np.inf
    for a0 in starts:
        a, res = _newton(N, i, a0)
        worst = min(worst, res)
        if res > TOL:
            continue
        dist = superset_distance(N, i, a)
        if dist < best_dist - 1e-12:
            best, best_res, best_dist = a, res, dist
    if best is None:
        raise CoefficientError(f"no convergence for N={N}, i={i}", worst)
    return MapCoefficients(N, i, tuple(float(v) for v in best), best_res)


def solve_coefficients(N: int, i: int) -> MapCoefficients:
    """Coefficients ``a_0..a_i`` of the unitary map from level ``i`` to ``i + 1``.

    Among the real roots of the orthonormality system the one closest to the
    superset map is returned.  Results are cached per ``(N, i)``.
    """
    check_levels(N, i)
    with _cache_lock:
        return _solve_cached(N, i)


def _check_dense(N: int, i: int) -> tuple[int, int]:
    rows, cols = level_size(N, i + 1), level_size(N, i)
    if rows * cols > MAX_DENSE_ENTRIES:
        raise ValueError(f"dense map {rows}x{cols} exceeds {MAX_DENSE_ENTRIES} entries")
    return rows, cols


def overlap_matrix(N: int, i: int) -> np.ndarray:
    _check_dense(N, i)
    tgt = level_masks(N, i + 1)
    src = level_masks(N, i)
    return np.bitwise_count(tgt[:, None] & src[None, :])


def build_dense_map(coeffs: MapCoefficients) -> DenseLevelMap:
    ov = overlap_matrix(coeffs.N, coeffs.i)
    return DenseLevelMap(coeffs.N, coeffs.i, coeffs.array[ov])


def superset_matrix(N: int, i: int) -> np.ndarray:
    """0/1 matrix with entry 1 iff the column set is contained in the row set."""
    return (overlap_matrix(N, i) == i).astype(float)


def svd_closest_unitary(N: int, i: int) -> DenseLevelMap:
    check_levels(N, i)
    M = superset_matrix(N, i)
    W, S, Vt = np.linalg.svd(M, full_matrices=False)
    if S.min() <= 1e-10 * S.max():
        raise np.linalg.LinAlgError(f"superset matrix for N={N}, i={i} is rank deficient")
    return DenseLevelMap(N, i, W @ Vt)


def scaled_b(coeffs: MapCoefficients) -> list[float]:
    N, i, a = coeffs.N, coeffs.i, coeffs.a
    return [
        (-1) ** k * a[i - k] * np.sqrt(overlap_count_nk(N, i, i - k)) for k in range(i + 1)
    ]


def coefficients_from_dense(dense: DenseLevelMap) -> tuple[np.ndarray, np.ndarray]:
    """Classify dense entries by overlap; returns (mean, spread) per overlap class."""
    ov = overlap_matrix(dense.N, dense.i)
    means, spreads = [], []
    for k in range(dense.i + 1):
        vals = dense.entries[ov == k]
        means.append(vals.mean())
        spreads.append(vals.max() - vals.min())
    return np.array(means), np.array(spreads)
