"""Velocity-to-bit machinery: the eight classic transfer functions, the
paired-sigmoid X transfer, bit-update rules, and single-point crossover
repair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, expit

from .dataset import GeneMask
from .errors import LengthMismatch, NonFiniteVelocity, TooShort

S_FAMILY = ("s1", "s2", "s3", "s4")
V_FAMILY = ("v1", "v2", "v3", "v4")
TF_TAGS = S_FAMILY + V_FAMILY + ("x",)

_SQRT_PI_2 = np.sqrt(np.pi) / 2


@dataclass(frozen=True)
class BitUpdateOutcome:
    new_bits: GeneMask
    evaluations_used: int
    path: str  # "direct_accept" | "crossover_repair"


def tf_value(kind: str, v):
    """Map velocity to a probability in [0, 1].

    For the S and V families returns T(v); for "x" returns the pair
    (W1, W2) with W1 + W2 == 1.
    """
    if kind not in TF_TAGS:
        raise ValueError(f"unknown transfer function {kind!r}")
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NonFiniteVelocity("velocity contains NaN or Inf")
    if kind == "s1":
        return expit(2 * v)
    if kind == "s2":
        return expit(v)
    if kind == "s3":
        return expit(v / 2)
    if kind == "s4":
        return expit(v / 3)
    if kind == "v1":
        return np.abs(erf(_SQRT_PI_2 * v))
    if kind == "v2":
        return np.abs(np.tanh(v))
    if kind == "v3":
        return np.abs(v / np.sqrt(1 + v * v))
    if kind == "v4":
        return np.abs(2 / np.pi * np.arctan(np.pi / 2 * v))
    return expit(v), expit(-v)


def binarize_s(bits_prev: GeneMask, velocities, kind: str, rng) -> GeneMask:
    """S-family set rule: bit j becomes 1 with probability T(v_j)."""
    velocities = np.asarray(velocities, dtype=np.float64)
    if len(bits_prev) != velocities.size:
        raise LengthMismatch("velocity length must match the mask length")
    prob = tf_value(kind, velocities)
    return GeneMask(rng.random(velocities.size) < prob)


def binarize_v(bits_prev: GeneMask, velocities, kind: str, rng) -> GeneMask:
    """V-family flip rule: bit j flips with probability T(v_j)."""
    velocities = np.asarray(velocities, dtype=np.float64)
    if len(bits_prev) != velocities.size:
        raise LengthMismatch("velocity length must match the mask length")
    prob = tf_value(kind, velocities)
    flip = rng.random(velocities.size) < prob
    return GeneMask(np.where(flip, ~bits_prev.bits, bits_prev.bits))


def single_point_crossover(a: GeneMask, b: GeneMask, rng):
    """Cut uniformly on an interior position and swap tails."""
    if len(a) != len(b):
        raise LengthMismatch("parents must have equal length")
    if len(a) < 2:
        raise TooShort("crossover needs length >= 2")
    cut = int(rng.integers(1, len(a)))
    child1 = np.concatenate([a.bits[:cut], b.bits[cut:]])
    child2 = np.concatenate([b.bits[:cut], a.bits[cut:]])
    return GeneMask(child1), GeneMask(child2)


def x_shaped_update(bits_prev: GeneMask, velocities, fitness_fn,
                    rng) -> BitUpdateOutcome:
    """Paired-sigmoid bit update with crossover repair (fitness maximized).

    Two candidates are drawn: D sets bit j when rand1 < W1(v_j) and G sets
    bit j when rand2 > W2(v_j).  The fitter of the two replaces the current
    position outright if it improves on it; otherwise the fitter child of a
    single-point crossover with the current position is taken.
    """
    velocities = np.asarray(velocities, dtype=np.float64)
    m = velocities.size
    if len(bits_prev) != m:
        raise LengthMismatch("velocity length must match the mask length")
    w1, w2 = tf_value("x", velocities)
    d_mask = GeneMask(rng.random(m) < w1)
    g_mask = GeneMask(rng.random(m) > w2)

    evals = 0
    f_d = fitness_fn(d_mask)
    f_g = fitness_fn(g_mask)
    evals += 2
    z, f_z = (d_mask, f_d) if f_d > f_g else (g_mask, f_g)

    f_prev = fitness_fn(bits_prev)
    evals += 1
    if f_z > f_prev:
        return BitUpdateOutcome(new_bits=z, evaluations_used=evals,
                                path="direct_accept")
    if m < 2:
        return BitUpdateOutcome(new_bits=bits_prev, evaluations_used=evals,
                                path="crossover_repair")
    child1, child2 = single_point_crossover(z, bits_prev, rng)
    f1 = fitness_fn(child1)
    f2 = fitness_fn(child2)
    evals += 2
    winner = child1 if f1 >= f2 else child2
    return BitUpdateOutcome(new_bits=winner, evaluations_used=evals,
                            path="crossover_repair")
