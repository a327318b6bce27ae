"""Classical simulation of the lattice quantum search.

Only the amplitudes of the active lattice level are stored.  Each step applies
phases to nogood sets and then the level map ``psi'[r] = sum_a U[r, a] psi[a]``
with ``U[r, a] = a_{|r & a|}``.

Two propagation routes share one contract:

* ``direct``: the double loop over (target, source) pairs, vectorised in
  chunks, classifying every pair by the popcount of the intersection.
* ``shadow``: writes ``U`` as a combination of "sum over t-subsets of the
  intersection" operators, ``C(|r & a|, t)``, each of which factors into
  one-step down and up moves through the lattice.  Cost is roughly
  ``N * 2^N`` per level instead of ``N_i * N_{i+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .coefficients import MapCoefficients, solve_coefficients
from .lattice import binomial, down, level_masks, rank_masks, up
from .problems import Problem, enumerate_solutions

DIRECT_CHUNK = 1 << 22
AUTO_DIRECT_LIMIT = 4_000_000
NORM_DRIFT_LIMIT = 1e-6


class SimulationError(RuntimeError):
    pass


@dataclass
class LevelState:
    N: int
    level: int
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class PhasePolicy:
    """How nogood amplitudes are rotated before each step.

    ``invert`` multiplies by -1, ``random`` by exp(i theta) with a fresh
    uniform theta per nogood set and level, ``fixed`` by exp(i theta) for the
    given theta.
    """

    variant: str = "invert"
    theta: float = math.pi

    def __post_init__(self):
        if self.variant not in ("invert", "random", "fixed"):
            raise ValueError(f"unknown phase policy {self.variant!r}")

    @property
    def real(self) -> bool:
        if self.variant == "invert":
            return True
        if self.variant == "fixed":
            return math.sin(self.theta) == 0.0 or self.theta in (0.0, math.pi)
        return False

    def factors(self, count: int, rng: Optional[np.random.Generator]):
        if self.variant == "invert":
            return -1.0
        if self.variant == "fixed":
            if self.real:
                return math.cos(self.theta)
            return np.exp(1j * self.theta)
        if rng is None:
            raise ValueError("random phases need a generator")
        return np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=count))


def phase_rng(seed: int, level: int) -> np.random.Generator:
    """Independent stream per (seed, level) so trials reproduce and parallelise."""
    return np.random.default_rng([seed, level])


@dataclass(frozen=True)
class TrialResult:
    p_soln: float
    goods_prob_by_level: tuple[float, ...]  # levels K..L
    norm_residual: float
    seed: int
    K: int = 0

    def goods_prob(self, level: int) -> float:
        return self.goods_prob_by_level[level - self.K]


def initial_state(p: Problem, real: bool = True) -> LevelState:
    masks = level_masks(p.N, p.K)
    good = ~p.nogood_mask(masks)
    G = int(good.sum())
    if G == 0:
        raise SimulationError(f"no good sets at start level {p.K}")
    psi = np.zeros(len(masks), dtype=float if real else complex)
    psi[good] = 1.0 / math.sqrt(G)
    return LevelState(p.N, p.K, psi)


def apply_phase(
    state: LevelState, p: Problem, policy: PhasePolicy, rng: Optional[np.random.Generator] = None
) -> LevelState:
    bad = p.nogood_mask(level_masks(state.N, state.level))
    count = int(bad.sum())
    psi = state.amplitudes
    if count == 0:
        return LevelState(state.N, state.level, psi.copy())
    f = policy.factors(count, rng)
    if np.iscomplexobj(f) and not np.iscomplexobj(psi):
        psi = psi.astype(complex)
    else:
        psi = psi.copy()
    psi[bad] *= f
    return LevelState(state.N, state.level, psi)


def _direct(psi: np.ndarray, N: int, i: int, a: np.ndarray) -> np.ndarray:
    src = level_masks(N, i)
    tgt = level_masks(N, i + 1)
    cplx = np.iscomplexobj(psi)
    X = np.stack([psi.real, psi.imag], axis=1) if cplx else psi
    out = np.empty((len(tgt), 2) if cplx else len(tgt))
    rows = max(1, DIRECT_CHUNK // max(1, len(src)))
    for lo in range(0, len(tgt), rows):
        block = tgt[lo : lo + rows]
        ov = np.bitwise_count(block[:, None] & src[None, :])
        out[lo : lo + rows] = a[ov] @ X
    return out[:, 0] + 1j * out[:, 1] if cplx else out


def shadow_weights(a: np.ndarray) -> np.ndarray:
    """Weights e_t with U = sum_t e_t * u^(i+1-t) d^(i-t) / (i-t)!, via binomial inversion."""
    i = len(a) - 1
    e = np.empty(i + 1)
    for t in range(i + 1):
        w = sum((-1) ** (t - k) * math.comb(t, k) * a[k] for k in range(t + 1))
        e[t] = w / math.factorial(i + 1 - t)
    return e


def _shadow(psi: np.ndarray, N: int, i: int, a: np.ndarray) -> np.ndarray:
    e = shadow_weights(a)
    # z[t][tau] = sum of psi over level-i supersets of tau
    z = [None] * (i + 1)
    z[i] = psi
    for t in range(i, 0, -1):
        z[t - 1] = down(z[t], N, t - 1) / (i - t + 1)
    y = e[0] * z[0]
    for t in range(1, i + 1):
        y = up(y, N, t - 1) + e[t] * z[t]
    return up(y, N, i)


def propagate(state: LevelState, coeffs: MapCoefficients, method: str = "auto") -> LevelState:
    """Map the level-i state to level i+1 with the overlap-structured unitary."""
    N, i = state.N, state.level
    if coeffs.N != N or coeffs.i != i:
        raise ValueError(f"coefficients for ({coeffs.N}, {coeffs.i}) applied at ({N}, {i})")
    a = coeffs.array
    if method == "auto":
        method = "direct" if binomial(N, i) * binomial(N, i + 1) <= AUTO_DIRECT_LIMIT else "shadow"
    if method == "direct":
        out = _direct(state.amplitudes, N, i, a)
    elif method == "shadow":
        out = _shadow(state.amplitudes, N, i, a)
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    return LevelState(N, i + 1, out)


def _goods_prob(state: LevelState, p: Problem) -> float:
    good = ~p.nogood_mask(level_masks(state.N, state.level))
    return float(np.sum(np.abs(state.amplitudes[good]) ** 2))


def solution_ranks(p: Problem, solutions=None) -> np.ndarray:
    if solutions is None:
        solutions = enumerate_solutions(p)
    return rank_masks(np.array([s.bits for s in solutions], dtype=np.int64), p.N)


def run_trial(
    p: Problem,
    policy: PhasePolicy,
    seed: int = 0,
    method: str = "auto",
    solutions=None,
    on_level: Optional[Callable[[LevelState], None]] = None,
) -> TrialResult:
    state = initial_state(p, real=policy.real)
    goods = [_goods_prob(state, p)]
    if on_level:
        on_level(state)
    for j in range(p.K, p.L):
        state = apply_phase(state, p, policy, phase_rng(seed, j) if policy.variant == "random" else None)
        state = propagate(state, solve_coefficients(p.N, j), method)
        drift = abs(1.0 - state.norm)
        if drift > NORM_DRIFT_LIMIT:
            raise SimulationError(f"norm drift {drift:.3g} after level {j + 1}")
        goods.append(_goods_prob(state, p))
        if on_level:
            on_level(state)
    idx = solution_ranks(p, solutions)
    p_soln = float(np.sum(np.abs(state.amplitudes[idx]) ** 2)) if len(idx) else 0.0
    return TrialResult(p_soln, tuple(goods), abs(1.0 - state.norm), seed, p.K)


@dataclass
class IdealMapRecord:
    """Per-level amplitude summary of the unnormalised superset map, levels 0..L."""

    seed: int
    good_mean: list[float] = field(default_factory=list)  # mean |psi| over goods
    good_min: list[float] = field(default_factory=list)
    good_max: list[float] = field(default_factory=list)
    nogood_mean: list[float] = field(default_factory=list)  # r_j: mean |psi| over nogoods
    nogood_rms: list[float] = field(default_factory=list)


def run_ideal_map(p: Problem, seed: int = 0, top: Optional[int] = None) -> IdealMapRecord:
    """Superset-only 0/1 map from the empty set with random phases on nogoods.

    Not unitary; used to study how random phases cancel amplitude in nogoods.
    """
    top = p.L if top is None else top
    rec = IdealMapRecord(seed)
    psi = np.ones(1, dtype=complex)
    for j in range(top + 1):
        bad = p.nogood_mask(level_masks(p.N, j))
        mag = np.abs(psi)
        nan = float("nan")
        g, b = mag[~bad], mag[bad]
        rec.good_mean.append(float(g.mean()) if len(g) else nan)
        rec.good_min.append(float(g.min()) if len(g) else nan)
        rec.good_max.append(float(g.max()) if len(g) else nan)
        rec.nogood_mean.append(float(b.mean()) if len(b) else nan)
        rec.nogood_rms.append(float(np.sqrt(np.mean(b * b))) if len(b) else nan)
        if j == top:
            break
        count = int(bad.sum())
        if count:
            psi = psi.copy()
            psi[bad] *= np.exp(1j * phase_rng(seed, j).uniform(0.0, 2.0 * math.pi, size=count))
        psi = up(psi, p.N, j)
    return rec
