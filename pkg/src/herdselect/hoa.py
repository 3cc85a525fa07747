"""Continuous horse-herd optimization: age-class partition, the six
behavior terms, velocity composition, and the sorted-population loop.

Cost is minimized.  Each horse draws from an independent random stream
keyed by (seed, iteration, horse index), so results do not depend on
evaluation order.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class AgeClass(enum.IntEnum):
    ALPHA = 0
    BETA = 1
    GAMMA = 2
    DELTA = 3


@dataclass(frozen=True)
class BehaviorCoeffs:
    """Initial behavior coefficients and their per-iteration decay."""

    g0: float = 1.5
    h0: float = 0.9
    s0: float = 0.2
    i0: float = 0.3
    d0: float = 0.2
    r0: float = 0.1
    omega_g: float = 0.9
    omega_h: float = 0.9
    omega_s: float = 0.9
    omega_i: float = 0.9
    omega_d: float = 0.9
    omega_r: float = 0.9
    u_check: float = 1.05
    l_check: float = 0.95
    p_frac: float = 0.1
    q_frac: float = 0.2

    def __post_init__(self):
        for name in ("omega_g", "omega_h", "omega_s", "omega_i",
                     "omega_d", "omega_r"):
            w = getattr(self, name)
            if not 0 < w <= 1:
                raise ValueError(f"{name} must be in (0, 1]")
        if not 0 < self.p_frac < 1 or not 0 < self.q_frac < 1:
            raise ValueError("p_frac and q_frac must be in (0, 1)")

    def at_iteration(self, iteration: int):
        """Coefficient values used at 1-based `iteration` (decay applies
        after each iteration, so iteration 1 uses the initial values)."""
        e = iteration - 1
        return (self.g0 * self.omega_g ** e,
                self.h0 * self.omega_h ** e,
                self.s0 * self.omega_s ** e,
                self.i0 * self.omega_i ** e,
                self.d0 * self.omega_d ** e,
                self.r0 * self.omega_r ** e)


@dataclass(frozen=True)
class HoaConfig:
    dim: int
    n_horses: int = 35
    max_iter: int = 100
    lower: float = -100.0
    upper: float = 100.0
    coeffs: BehaviorCoeffs = field(default_factory=BehaviorCoeffs)
    seed: int = 0

    def __post_init__(self):
        if self.n_horses < 4:
            raise ValueError("need at least 4 horses (one per age class)")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")


@dataclass
class HerdState:
    positions: np.ndarray
    velocities: np.ndarray
    costs: np.ndarray
    age_class: np.ndarray
    best_position: np.ndarray
    best_cost: float


def age_class_counts(n: int):
    """Sizes (alpha, beta, gamma, delta): floors of 10/20/30%, remainder to
    delta; the single best horse is promoted to alpha if its floor is 0."""
    na = math.floor(0.1 * n)
    nb = math.floor(0.2 * n)
    ng = math.floor(0.3 * n)
    if na == 0:
        na = 1
    nd = n - na - nb - ng
    return na, nb, ng, nd


def assign_age_classes(sorted_rank, n: int) -> np.ndarray:
    """Map per-horse ranks (0 = best) to age classes."""
    sorted_rank = np.asarray(sorted_rank)
    if sorted(sorted_rank.tolist()) != list(range(n)):
        raise ValueError("ranks must be a permutation of [0, n)")
    na, nb, ng, _ = age_class_counts(n)
    classes = np.empty(n, dtype=np.int64)
    classes[sorted_rank < na] = AgeClass.ALPHA
    classes[(sorted_rank >= na) & (sorted_rank < na + nb)] = AgeClass.BETA
    classes[(sorted_rank >= na + nb) & (sorted_rank < na + nb + ng)] = AgeClass.GAMMA
    classes[sorted_rank >= na + nb + ng] = AgeClass.DELTA
    return classes


# -- behavior terms --------------------------------------------------------

def grazing_term(x_prev, g, p, u_check=1.05, l_check=0.95):
    """g * (u + P*l) * x, elementwise; P is uniform in [0, 1]."""
    return g * (u_check + np.asarray(p) * l_check) * np.asarray(x_prev)


def hierarchy_term(x_prev, best_position, h):
    return h * (np.asarray(best_position) - np.asarray(x_prev))


def sociability_term(x_prev, mean_position, s):
    return s * (np.asarray(mean_position) - np.asarray(x_prev))


def imitation_term(x_prev, best_group_mean, i):
    return i * (np.asarray(best_group_mean) - np.asarray(x_prev))


def defense_term(x_prev, worst_group_mean, d):
    return -d * (np.asarray(worst_group_mean) - np.asarray(x_prev))


def roaming_term(x_prev, r, p):
    return r * np.asarray(p) * np.asarray(x_prev)


# age class -> which terms contribute to the velocity
_TERMS_BY_CLASS = {
    AgeClass.ALPHA: ("G", "D"),
    AgeClass.BETA: ("G", "H", "S", "D"),
    AgeClass.GAMMA: ("G", "H", "S", "I", "D", "R"),
    AgeClass.DELTA: ("G", "I", "R"),
}


def horse_velocity(x_prev, age, coeff_values, best_position, mean_position,
                   best_group_mean, worst_group_mean, rng, coeffs):
    """Velocity of a single horse per its age class.

    coeff_values is the (g, h, s, i, d, r) tuple already decayed to the
    current iteration.  The rng supplies the per-dimension uniform draws
    for grazing and roaming.
    """
    g, h, s, i, d, r = coeff_values
    dim = len(x_prev)
    active = _TERMS_BY_CLASS[AgeClass(int(age))]
    v = np.zeros(dim)
    v += grazing_term(x_prev, g, rng.random(dim), coeffs.u_check, coeffs.l_check)
    if "H" in active:
        v += hierarchy_term(x_prev, best_position, h)
    if "S" in active:
        v += sociability_term(x_prev, mean_position, s)
    if "I" in active:
        v += imitation_term(x_prev, best_group_mean, i)
    if "D" in active:
        v += defense_term(x_prev, worst_group_mean, d)
    if "R" in active:
        v += roaming_term(x_prev, r, rng.random(dim))
    return v


def group_means(positions, costs, p_frac, q_frac):
    """(overall mean, mean of the pN best, mean of the qN worst)."""
    n = len(costs)
    order = np.argsort(costs, kind="stable")
    pn = max(1, math.floor(p_frac * n))
    qn = max(1, math.floor(q_frac * n))
    mean_pos = positions.mean(axis=0)
    best_mean = positions[order[:pn]].mean(axis=0)
    worst_mean = positions[order[-qn:]].mean(axis=0)
    return mean_pos, best_mean, worst_mean


def velocity_update(state: HerdState, iteration: int, cfg: HoaConfig) -> np.ndarray:
    """Compute all horse velocities for one iteration."""
    coeff_values = cfg.coeffs.at_iteration(iteration)
    mean_pos, best_mean, worst_mean = group_means(
        state.positions, state.costs, cfg.coeffs.p_frac, cfg.coeffs.q_frac)
    velocities = np.empty_like(state.positions)
    for i in range(cfg.n_horses):
        rng = np.random.default_rng((cfg.seed, iteration, i))
        velocities[i] = horse_velocity(
            state.positions[i], state.age_class[i], coeff_values,
            state.best_position, mean_pos, best_mean, worst_mean,
            rng, cfg.coeffs)
    return velocities


def optimize(cost_fn, cfg: HoaConfig):
    """Run the herd loop; returns (best_position, best_cost, trace).

    trace[i] is the incumbent cost after iteration i (trace[0] covers the
    initial random herd), so it is monotone non-increasing.
    """
    rng0 = np.random.default_rng((cfg.seed, 0))
    positions = rng0.uniform(cfg.lower, cfg.upper, (cfg.n_horses, cfg.dim))
    costs = np.array([cost_fn(x) for x in positions], dtype=np.float64)
    best_idx = int(np.argmin(costs))
    best_position = positions[best_idx].copy()
    best_cost = float(costs[best_idx])
    trace = [best_cost]

    state = HerdState(positions=positions, velocities=np.zeros_like(positions),
                      costs=costs, age_class=np.zeros(cfg.n_horses, dtype=np.int64),
                      best_position=best_position, best_cost=best_cost)

    for iteration in range(1, cfg.max_iter + 1):
        order = np.argsort(state.costs, kind="stable")
        ranks = np.empty(cfg.n_horses, dtype=np.int64)
        ranks[order] = np.arange(cfg.n_horses)
        state.age_class = assign_age_classes(ranks, cfg.n_horses)

        state.velocities = velocity_update(state, iteration, cfg)
        state.positions = np.clip(state.positions + state.velocities,
                                  cfg.lower, cfg.upper)
        state.costs = np.array([cost_fn(x) for x in state.positions])

        it_best = int(np.argmin(state.costs))
        if state.costs[it_best] < state.best_cost:
            state.best_cost = float(state.costs[it_best])
            state.best_position = state.positions[it_best].copy()
        trace.append(state.best_cost)

    return state.best_position, state.best_cost, trace


# -- benchmark cost functions ----------------------------------------------

def sphere(x):
    x = np.asarray(x)
    return float(np.sum(x * x))


def rastrigin(x):
    x = np.asarray(x)
    return float(10 * x.size + np.sum(x * x - 10 * np.cos(2 * np.pi * x)))
