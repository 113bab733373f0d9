"""Finite-run simulation: sampling, counting, and bootstrap errors.

Randomness is derived from numpy SeedSequence streams so results are
independent of evaluation order: `sample` uses spawn key (0,) and one
child stream per cell in row-major order (plus one leading stream for
the random setting order), `bootstrap_report` uses spawn key (1,) and
one child stream per cell, drawing all resamples of that cell in a
single vectorized call.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scenario import ProbabilityTable
from .witness import (
    DET_CLASSICAL_BOUND,
    I_DW_CLASSICAL_BOUND,
    WitnessReport,
    det_witness,
    dimension_witness,
    retrocausality,
)

ROUND_ROBIN = "round-robin"
RANDOM_PER_TRIAL = "random-per-trial"

_SAMPLE_KEY = 0
_BOOTSTRAP_KEY = 1


class InsufficientStatisticsError(ValueError):
    """A postselected cell has no detected events to normalize by."""


@dataclass(frozen=True)
class CountTable:
    """Per-setting event counts, integer arrays of shape (n_prep, n_meas)."""

    n_e: np.ndarray
    n_d: np.ndarray
    n_none: np.ndarray

    def __post_init__(self):
        n_e = np.asarray(self.n_e, dtype=np.int64)
        n_d = np.asarray(self.n_d, dtype=np.int64)
        n_none = np.asarray(self.n_none, dtype=np.int64)
        if n_e.shape != n_d.shape or n_e.shape != n_none.shape or n_e.ndim != 2:
            raise ValueError("count arrays must share one 2-d shape")
        if n_e.min() < 0 or n_d.min() < 0 or n_none.min() < 0:
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "n_e", n_e)
        object.__setattr__(self, "n_d", n_d)
        object.__setattr__(self, "n_none", n_none)

    @property
    def n_prep(self) -> int:
        return self.n_e.shape[0]

    @property
    def n_meas(self) -> int:
        return self.n_e.shape[1]

    @property
    def n_trials(self) -> np.ndarray:
        return self.n_e + self.n_d + self.n_none

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["i", "j", "n_e", "n_d", "n_none"])
            for i in range(self.n_prep):
                for j in range(self.n_meas):
                    writer.writerow(
                        [i, j, int(self.n_e[i, j]), int(self.n_d[i, j]), int(self.n_none[i, j])]
                    )

    @classmethod
    def from_csv(cls, path: str | Path) -> "CountTable":
        cells: dict[tuple[int, int], tuple[int, int, int]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"i", "j", "n_e", "n_d", "n_none"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ValueError(f"counts CSV must have columns {sorted(required)}")
            for row in reader:
                key = (int(row["i"]), int(row["j"]))
                if key in cells:
                    raise ValueError(f"duplicate cell {key} in counts CSV")
                cells[key] = (int(row["n_e"]), int(row["n_d"]), int(row["n_none"]))
        if not cells:
            raise ValueError("counts CSV contains no rows")
        n_prep = max(i for i, _ in cells) + 1
        n_meas = max(j for _, j in cells) + 1
        if len(cells) != n_prep * n_meas:
            raise ValueError("counts CSV does not cover a complete (i, j) grid")
        n_e = np.zeros((n_prep, n_meas), dtype=np.int64)
        n_d = np.zeros_like(n_e)
        n_none = np.zeros_like(n_e)
        for (i, j), (e, d, none) in cells.items():
            n_e[i, j], n_d[i, j], n_none[i, j] = e, d, none
        return cls(n_e, n_d, n_none)


@dataclass(frozen=True)
class RunPlan:
    """How many trials to draw per setting and in what order."""

    trials_per_setting: int
    seed: int = 0
    setting_order: str = ROUND_ROBIN

    def __post_init__(self):
        if self.trials_per_setting < 1:
            raise ValueError("trials_per_setting must be >= 1")
        if self.setting_order not in (ROUND_ROBIN, RANDOM_PER_TRIAL):
            raise ValueError(
                f"setting_order must be {ROUND_ROBIN!r} or {RANDOM_PER_TRIAL!r}, "
                f"got {self.setting_order!r}"
            )

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunPlan":
        return cls(
            trials_per_setting=int(d["trials_per_setting"]),
            seed=int(d.get("seed", 0)),
            setting_order=str(d.get("setting_order", ROUND_ROBIN)),
        )


def _cell_pvals(t: ProbabilityTable, i: int, j: int) -> np.ndarray:
    p = np.array([t.p_e[i, j], t.p_d[i, j], t.p_none[i, j]])
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample(t: ProbabilityTable, plan: RunPlan) -> CountTable:
    """Draw per-cell multinomial counts; deterministic for a fixed seed."""
    n_cells = t.n_prep * t.n_meas
    root = np.random.SeedSequence(plan.seed, spawn_key=(_SAMPLE_KEY,))
    streams = root.spawn(n_cells + 1)

    if plan.setting_order == RANDOM_PER_TRIAL:
        order_rng = np.random.default_rng(streams[0])
        total = plan.trials_per_setting * n_cells
        cell_trials = order_rng.multinomial(total, np.full(n_cells, 1.0 / n_cells))
    else:
        cell_trials = np.full(n_cells, plan.trials_per_setting, dtype=np.int64)

    n_e = np.zeros((t.n_prep, t.n_meas), dtype=np.int64)
    n_d = np.zeros_like(n_e)
    n_none = np.zeros_like(n_e)
    for i in range(t.n_prep):
        for j in range(t.n_meas):
            idx = i * t.n_meas + j
            rng = np.random.default_rng(streams[idx + 1])
            draw = rng.multinomial(int(cell_trials[idx]), _cell_pvals(t, i, j))
            n_e[i, j], n_d[i, j], n_none[i, j] = draw
    return CountTable(n_e, n_d, n_none)


def estimate(c: CountTable, fair_sampling: bool) -> ProbabilityTable:
    """Relative frequencies; with fair sampling, per detected trial."""
    trials = c.n_trials
    if trials.min() <= 0:
        raise ValueError("every cell needs at least one trial")
    if fair_sampling:
        detected = c.n_e + c.n_d
        if detected.min() <= 0:
            bad = np.argwhere(detected == 0)[0]
            raise InsufficientStatisticsError(
                f"cell (i={bad[0]}, j={bad[1]}) has no detected events to postselect on"
            )
        return ProbabilityTable(
            c.n_e / detected, c.n_d / detected, np.zeros(detected.shape)
        )
    return ProbabilityTable(c.n_e / trials, c.n_d / trials, c.n_none / trials)


def _witness_arrays(
    n_e: np.ndarray, n_d: np.ndarray, n_none: np.ndarray, fair_sampling: bool
) -> tuple[np.ndarray | None, np.ndarray]:
    """(|det W|, I_DW) per resample from stacked counts (B, n_prep, n_meas)."""
    if fair_sampling:
        denom = n_e + n_d
        if denom.min() <= 0:
            raise InsufficientStatisticsError(
                "a bootstrap resample emptied a postselected cell"
            )
    else:
        denom = n_e + n_d + n_none
    p_e = n_e / denom
    p_d = n_d / denom
    det_abs = None
    if p_d.shape[1] >= 4:
        w00 = p_d[:, 0, 0] - p_d[:, 1, 0]
        w01 = p_d[:, 0, 1] - p_d[:, 1, 1]
        w10 = p_d[:, 2, 0] - p_d[:, 3, 0]
        w11 = p_d[:, 2, 1] - p_d[:, 3, 1]
        det_abs = np.abs(w00 * w11 - w01 * w10)
    dv = p_e - p_d
    i_dw = dv[:, 0, 0] + dv[:, 0, 1] + dv[:, 1, 0] - dv[:, 1, 1] - dv[:, 2, 0]
    return det_abs, i_dw


def bootstrap_report(
    c: CountTable, resamples: int, seed: int, fair_sampling: bool
) -> WitnessReport:
    """Witness report with parametric-bootstrap standard errors.

    Each resample redraws every cell from a multinomial at the observed
    raw frequencies and recomputes the witnesses; reported values are
    the plug-in estimates, uncertainties are resample standard
    deviations, and sigma_* are violations of the classical bounds.
    """
    if resamples < 100:
        raise ValueError(f"resamples must be >= 100, got {resamples}")
    observed = estimate(c, fair_sampling)
    point_det = det_witness(observed) if observed.n_prep >= 4 else None
    point_idw = dimension_witness(observed)

    trials = c.n_trials
    root = np.random.SeedSequence(seed, spawn_key=(_BOOTSTRAP_KEY,))
    streams = root.spawn(c.n_prep * c.n_meas)
    shape = (resamples, c.n_prep, c.n_meas)
    n_e = np.empty(shape)
    n_d = np.empty(shape)
    n_none = np.empty(shape)
    for i in range(c.n_prep):
        for j in range(c.n_meas):
            rng = np.random.default_rng(streams[i * c.n_meas + j])
            freqs = np.array([c.n_e[i, j], c.n_d[i, j], c.n_none[i, j]], dtype=float)
            draws = rng.multinomial(int(trials[i, j]), freqs / freqs.sum(), size=resamples)
            n_e[:, i, j], n_d[:, i, j], n_none[:, i, j] = draws[:, 0], draws[:, 1], draws[:, 2]

    det_samples, idw_samples = _witness_arrays(n_e, n_d, n_none, fair_sampling)
    r_samples = np.maximum((idw_samples - I_DW_CLASSICAL_BOUND) / 4.0, 0.0)

    uncertainties = {
        "i_dw": float(np.std(idw_samples, ddof=1)),
        "r": float(np.std(r_samples, ddof=1)),
    }
    sigma_idw = None
    if uncertainties["i_dw"] > 0.0:
        sigma_idw = max((point_idw - I_DW_CLASSICAL_BOUND) / uncertainties["i_dw"], 0.0)
    sigma_det = None
    if det_samples is not None:
        uncertainties["det_abs"] = float(np.std(det_samples, ddof=1))
        if uncertainties["det_abs"] > 0.0:
            sigma_det = max(
                (point_det - DET_CLASSICAL_BOUND) / uncertainties["det_abs"], 0.0
            )
    return WitnessReport(
        i_dw=point_idw,
        det_abs=point_det,
        sigma_det=sigma_det,
        sigma_idw=sigma_idw,
        uncertainties=uncertainties,
        r=retrocausality(point_idw),
    )
