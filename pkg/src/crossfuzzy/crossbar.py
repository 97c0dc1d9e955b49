"""Crossbar of linear-drift memristors with summing-amplifier read-out.

Writes: a pulse drives the columns with one grade vector and the rows with
the negated other, so the cell at (row i, column j) sees the voltage
``col[j] + row[i]`` for ``t0`` seconds and integrates that flux per the
device closed form. Stuck cells (fault mask) ignore writes and always hold
``r_off``.

Reads: the row amplifiers sum cell currents against an ``r_off`` feedback
resistor, and a compensation row cancels the raw input sum, leaving

    exact:  y_i = -(sum_j x_j * r_off / M_ij  -  sum_j x_j)
    ideal:  y_i = -(1 / r_off) * sum_j (r_off - M_ij) * x_j

The ideal form is the first-order limit of the exact one for stored values
much smaller than ``r_off`` and is exactly a matrix-vector product with the
stored-value matrix. Reads never disturb the stored state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import MemristorParams, beta

__all__ = ["ReadConfig", "Crossbar", "save_delta_csv", "load_delta_csv"]

READ_MODES = ("exact", "ideal")


@dataclass(frozen=True)
class ReadConfig:
    mode: str = "exact"
    r_c: float | None = None  # compensation-row resistance; recorded, not used

    def __post_init__(self) -> None:
        if self.mode not in READ_MODES:
            raise ValueError(f"read mode must be one of {READ_MODES}, got {self.mode!r}")


class Crossbar:
    """An m x n grid of memristors plus a stuck-at-r_off fault mask."""

    def __init__(
        self,
        rows: int,
        cols: int,
        params: MemristorParams,
        memristance: np.ndarray | None = None,
        fault_mask: np.ndarray | None = None,
    ):
        if rows < 1 or cols < 1:
            raise ValueError(f"crossbar needs positive dimensions, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.params = params
        if memristance is None:
            memristance = np.full((rows, cols), float(params.r_off))
        else:
            memristance = np.array(memristance, dtype=float)
            if memristance.shape != (rows, cols):
                raise ValueError(
                    f"memristance shape {memristance.shape} != ({rows}, {cols})"
                )
            if memristance.min() < params.r_on or memristance.max() > params.r_off:
                raise ValueError("memristance outside [r_on, r_off]")
        self.memristance = memristance
        if fault_mask is None:
            fault_mask = np.zeros((rows, cols), dtype=bool)
        else:
            fault_mask = np.array(fault_mask, dtype=bool)
            if fault_mask.shape != (rows, cols):
                raise ValueError(f"fault mask shape {fault_mask.shape} != ({rows}, {cols})")
        self.fault_mask = fault_mask
        self.memristance[self.fault_mask] = params.r_off
        self.saturation_count = 0

    @classmethod
    def from_delta(cls, delta: np.ndarray, params: MemristorParams) -> "Crossbar":
        """Build a crossbar holding the given stored-value matrix (ohm)."""
        delta = np.asarray(delta, dtype=float)
        return cls(delta.shape[0], delta.shape[1], params, memristance=params.r_off - delta)

    # -- writes ---------------------------------------------------------

    def write_pulse(self, col_grades, row_grades, t0: float) -> None:
        """Program all cells at once for ``t0`` seconds.

        Cell (i, j) integrates flux ``(col_grades[j] + row_grades[i]) * t0``.
        Stuck cells are skipped; clamp events add to ``saturation_count``.
        """
        col = np.asarray(col_grades, dtype=float)
        row = np.asarray(row_grades, dtype=float)
        if col.shape != (self.cols,):
            raise ValueError(f"column grades shape {col.shape} != ({self.cols},)")
        if row.shape != (self.rows,):
            raise ValueError(f"row grades shape {row.shape} != ({self.rows},)")
        for name, g in (("column", col), ("row", row)):
            if g.min() < 0.0 or g.max() > 1.0:
                raise ValueError(f"{name} grades must lie in [0, 1]")
        if t0 <= 0:
            raise ValueError(f"t0 must be positive, got {t0}")
        flux = (col[None, :] + row[:, None]) * t0
        m_sq = self.memristance**2 - beta(self.params) * flux
        floor = self.params.r_on**2
        clamped = m_sq < floor
        new_m = np.sqrt(np.maximum(m_sq, floor))
        # Zero flux means zero drift: keep those cells bit-identical.
        new_m = np.where(flux > 0.0, new_m, self.memristance)
        live = ~self.fault_mask
        self.saturation_count += int(np.count_nonzero(clamped & live))
        self.memristance = np.where(live, new_m, self.memristance)

    def inject_faults(self, fraction: float, seed: int) -> None:
        """Mark ``floor(fraction * m * n)`` distinct cells stuck at r_off.

        Cell choice is uniform and fully determined by the seed. Already
        stored values at the chosen cells are lost (the film reads r_off).
        """
        if not (0.0 <= fraction <= 1.0):
            raise ValueError(f"fault fraction must lie in [0, 1], got {fraction}")
        n_faults = int(fraction * self.rows * self.cols)
        rng = np.random.default_rng(seed)
        flat = rng.choice(self.rows * self.cols, size=n_faults, replace=False)
        mask = np.zeros(self.rows * self.cols, dtype=bool)
        mask[flat] = True
        mask = mask.reshape(self.rows, self.cols)
        self.fault_mask |= mask
        self.memristance[self.fault_mask] = self.params.r_off

    # -- reads (side-effect free) ----------------------------------------

    def read_exact(self, x) -> np.ndarray:
        """Full amplifier algebra, using the true memristance of every cell."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ValueError(f"input shape {x.shape} != ({self.cols},)")
        return -((self.params.r_off / self.memristance) @ x - x.sum())

    def read_ideal(self, x) -> np.ndarray:
        """First-order read-out: -(1/r_off) times stored-value matrix times x."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ValueError(f"input shape {x.shape} != ({self.cols},)")
        alpha = -1.0 / self.params.r_off
        return alpha * ((self.params.r_off - self.memristance) @ x)

    def read(self, x, config: ReadConfig) -> np.ndarray:
        return self.read_exact(x) if config.mode == "exact" else self.read_ideal(x)

    def snapshot_delta(self) -> np.ndarray:
        """Stored-value matrix r_off - M (ohm); zero at stuck cells."""
        return self.params.r_off - self.memristance


def save_delta_csv(path, delta: np.ndarray, r_off: float) -> None:
    """Row-major CSV dump of a stored-value (or relation) surface."""
    delta = np.asarray(delta, dtype=float)
    rows, cols = delta.shape
    with open(path, "w") as fh:
        fh.write(f"# rows={rows} cols={cols} r_off={r_off}\n")
        for i in range(rows):
            fh.write(",".join(repr(float(v)) for v in delta[i]) + "\n")


def load_delta_csv(path) -> tuple[np.ndarray, float]:
    """Inverse of :func:`save_delta_csv`; returns (matrix, r_off)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing header line")
        fields = dict(kv.split("=") for kv in header.lstrip("# ").split())
        rows, cols, r_off = int(fields["rows"]), int(fields["cols"]), float(fields["r_off"])
        delta = np.loadtxt(fh, delimiter=",", ndmin=2)
    if delta.shape != (rows, cols):
        raise ValueError(f"{path}: data shape {delta.shape} does not match header")
    return delta, r_off
