"""Software fuzzy relations: the crossbar's learning rule without the circuit.

A relation is a non-negative matrix ``mu`` (in ohm, matching the crossbar's
stored-value units) over output rows x input columns. Each training pair of
fuzzy numbers deposits ``f(input_grade + output_grade)`` at every cell, where

    f(nu) = r_off - sqrt(r_off**2 - beta * t0 * nu)

is the increment one write pulse of duration ``t0`` leaves on a pristine
device seeing the summed grade as its drive voltage.

Two accumulation modes exist. ``additive`` sums the per-pulse increments
(the mathematical idealization); ``hardware`` chains the device state
through the pulses exactly like a crossbar does, which is equivalent to
applying f to the per-cell total of the summed grades. f is convex, so
hardware accumulation runs slightly ahead of additive; the two agree to
first order while stored values stay far below r_off.

Inference is a plain matrix-vector product: output grades = mu @ input
grades. No normalization is applied; centroid defuzzification ignores
scale anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import MemristorParams, beta
from .fuzzy import FuzzyNumber, Universe

__all__ = ["ImplicationParams", "Relation", "implication_f", "relation_from_sets"]

RELATION_MODES = ("additive", "hardware")


@dataclass(frozen=True)
class ImplicationParams:
    """Device constants plus the write-pulse duration."""

    device: MemristorParams
    t0: float  # seconds

    def __post_init__(self) -> None:
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")


def implication_f(nu, params: ImplicationParams):
    """Stored-value increment for a summed membership grade ``nu``.

    Strictly increasing and convex in nu; saturates at ``r_off - r_on`` once
    the pulse would clamp the device. Accepts scalars or arrays.
    """
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise ValueError("summed grades must be non-negative")
    r_off = params.device.r_off
    floor = params.device.r_on**2
    arg = r_off * r_off - beta(params.device) * params.t0 * nu
    out = r_off - np.sqrt(np.maximum(arg, floor))
    return float(out) if out.ndim == 0 else out


class Relation:
    def __init__(
        self,
        input_universe: Universe,
        output_universe: Universe,
        mode: str = "hardware",
        mu: np.ndarray | None = None,
    ):
        if mode not in RELATION_MODES:
            raise ValueError(f"mode must be one of {RELATION_MODES}, got {mode!r}")
        self.input_universe = input_universe
        self.output_universe = output_universe
        self.mode = mode
        shape = (output_universe.count, input_universe.count)
        if mu is None:
            mu = np.zeros(shape)
        else:
            mu = np.array(mu, dtype=float)
            if mu.shape != shape:
                raise ValueError(f"mu shape {mu.shape} != {shape}")
            if mu.min() < 0:
                raise ValueError("mu must be non-negative")
        self.mu = mu

    def _check_pair(self, a: FuzzyNumber, b: FuzzyNumber) -> None:
        if a.universe != self.input_universe:
            raise ValueError("input fuzzy number lives on the wrong universe")
        if b.universe != self.output_universe:
            raise ValueError("output fuzzy number lives on the wrong universe")

    def accumulate(self, a: FuzzyNumber, b: FuzzyNumber, params: ImplicationParams) -> None:
        """Fold one training pair (input a, output b) into the relation."""
        self._check_pair(a, b)
        nu = a.grades[None, :] + b.grades[:, None]
        if self.mode == "additive":
            self.mu = self.mu + implication_f(nu, params)
        else:
            # Chain the device state: the current mu is a memristance drop,
            # so continue the flux integration from r_off - mu. Zero summed
            # grade means zero drift: keep those cells bit-identical.
            r_off = params.device.r_off
            floor = params.device.r_on**2
            m_sq = (r_off - self.mu) ** 2 - beta(params.device) * params.t0 * nu
            self.mu = np.where(
                nu > 0, r_off - np.sqrt(np.maximum(m_sq, floor)), self.mu
            )

    def infer(self, a: FuzzyNumber) -> FuzzyNumber:
        """Compose an input fuzzy number with the relation."""
        if a.universe != self.input_universe:
            raise ValueError("input fuzzy number lives on the wrong universe")
        return FuzzyNumber(self.output_universe, self.mu @ a.grades)


def relation_from_sets(
    a: FuzzyNumber, b: FuzzyNumber, params: ImplicationParams, mode: str = "hardware"
) -> Relation:
    """Relation written by a single pulse pairing fuzzy sets a (input) and b (output)."""
    rel = Relation(a.universe, b.universe, mode=mode)
    rel.accumulate(a, b, params)
    return rel
