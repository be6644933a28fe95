"""Seeded Monte Carlo experiments: single trials, phase sweeps, result emission.

One trial samples a source, draws the measurement pair, forms w, separates,
and compares the recovered vector to the truth.  A phase sweep runs one cell
per compression rate R (k = floor(R * n)) and reports the empirical success
rate next to two exact finite-n oracles: the success oracle
P[|spt| <= s_bar], valid whenever k >= s_bar + 1, and the converse error
floor P[|spt| > k].

Seed derivation is counter based: trial (c, t) of a sweep with master seed m
uses the three streams spawned from SeedSequence(m, spawn_key=(c, t)), in
order source, A, B.  Trials are therefore independent of execution order and
safe to run concurrently.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .measure import EnsembleA, build_A, build_B
from .separator import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    CandidateSet,
    SeparatorTolerances,
    separate,
)
from .sources import MixedSourceSpec, sample_source, split_point, support_cap, support_size_distribution

__all__ = [
    "ExperimentConfig",
    "SweepCell",
    "ExperimentRecord",
    "trial_streams",
    "run_single_trial",
    "predict_success",
    "predict_error_floor",
    "run_phase_sweep",
    "emit_results",
    "RECORD_COLUMNS",
]

RECORD_COLUMNS = (
    "n", "ell", "R", "k", "s_bar", "trials", "successes", "error_rate",
    "oracle_success", "oracle_error_lb", "seed", "wall_time_ms",
)

RECOVERY_TOL = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description: source, sizes, support-cap policy, ensembles, seeds.

    cap_mode selects how s_bar is set per cell: "fixed" uses s_bar as given,
    "kappa" derives it from the threshold plus kappa, and "track" sets
    s_bar = max(0, k - 1) per cell, the largest cap for which the success
    oracle stays exact at that rate.
    """

    source: MixedSourceSpec
    n: int
    rates: tuple
    cap_mode: str = "track"
    s_bar: int | None = None
    kappa: float | None = None
    ensembleA: EnsembleA = field(default_factory=EnsembleA)
    kindB: str = "normal"
    trials: int = 400
    master_seed: int = 0
    budget: int = DEFAULT_BUDGET
    tolerances: SeparatorTolerances = field(default_factory=SeparatorTolerances)
    timing: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        rates = tuple(float(r) for r in self.rates)
        if len(rates) == 0 or any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError("rates must be nonempty and within [0, 1]")
        if sorted(rates) != list(rates):
            raise ValueError("rates must be sorted ascending")
        if self.cap_mode not in ("fixed", "kappa", "track"):
            raise ValueError(f"unknown cap_mode {self.cap_mode!r}")
        if self.cap_mode == "fixed" and self.s_bar is None:
            raise ValueError("cap_mode 'fixed' requires s_bar")
        if self.cap_mode == "kappa" and self.kappa is None:
            raise ValueError("cap_mode 'kappa' requires kappa")
        if self.kindB not in ("normal", "identity"):
            raise ValueError("sweeps support kindB 'normal' or 'identity'")
        object.__setattr__(self, "rates", rates)

    @property
    def ell(self) -> int:
        return split_point(self.n, self.source.lam)

    def cell(self, index: int) -> "SweepCell":
        R = self.rates[index]
        k = int(np.floor(R * self.n))
        if self.cap_mode == "fixed":
            s_bar = int(self.s_bar)
        elif self.cap_mode == "kappa":
            s_bar = support_cap(self.source, self.n, self.kappa)
        else:
            s_bar = max(0, k - 1)
        s_bar = min(max(s_bar, 0), self.n)
        skipped = self.kindB == "identity" and k < self.ell
        return SweepCell(index=index, R=R, k=k, s_bar=s_bar, skipped=skipped)

    def cells(self) -> list:
        return [self.cell(i) for i in range(len(self.rates))]

    def to_json_dict(self) -> dict:
        return {
            "source": self.source.to_json_dict(),
            "n": self.n,
            "rates": list(self.rates),
            "cap_mode": self.cap_mode,
            "s_bar": self.s_bar,
            "kappa": self.kappa,
            "ensembleA": self.ensembleA.to_json_dict(),
            "kindB": self.kindB,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "budget": self.budget,
            "timing": self.timing,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            source=MixedSourceSpec.from_json_dict(d["source"]),
            n=int(d["n"]),
            rates=tuple(d["rates"]),
            cap_mode=d.get("cap_mode", "track"),
            s_bar=d.get("s_bar"),
            kappa=d.get("kappa"),
            ensembleA=EnsembleA.from_json_dict(d.get("ensembleA", {})),
            kindB=d.get("kindB", "normal"),
            trials=int(d.get("trials", 400)),
            master_seed=int(d.get("master_seed", 0)),
            budget=int(d.get("budget", DEFAULT_BUDGET)),
            timing=bool(d.get("timing", False)),
        )


@dataclass(frozen=True)
class SweepCell:
    """One rate cell: k = floor(R * n), its support cap, and the skip flag."""

    index: int
    R: float
    k: int
    s_bar: int
    skipped: bool = False


@dataclass(frozen=True)
class ExperimentRecord:
    """Aggregated result of one cell; trials counts successes plus errors only."""

    n: int
    ell: int
    R: float
    k: int
    s_bar: int
    trials: int
    successes: int
    error_rate: float
    oracle_success: float | None
    oracle_error_lb: float
    seed: int
    wall_time_ms: int
    budget_exceeded: int = 0
    skipped: bool = False

    def csv_row(self) -> str:
        def fmt(v):
            if v is None:
                return "nan"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        vals = (self.n, self.ell, self.R, self.k, self.s_bar, self.trials,
                self.successes, self.error_rate, self.oracle_success,
                self.oracle_error_lb, self.seed, self.wall_time_ms)
        return ",".join(fmt(v) for v in vals)

    def to_json_dict(self) -> dict:
        error_rate = None if math.isnan(self.error_rate) else self.error_rate
        return {
            "n": self.n, "ell": self.ell, "R": self.R, "k": self.k,
            "s_bar": self.s_bar, "trials": self.trials, "successes": self.successes,
            "error_rate": error_rate, "oracle_success": self.oracle_success,
            "oracle_error_lb": self.oracle_error_lb, "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
        }


def trial_streams(master_seed: int, cell_index: int, trial_index: int):
    """The (source, A, B) generators for one trial of one cell."""
    root = np.random.SeedSequence(master_seed, spawn_key=(cell_index, trial_index))
    return tuple(np.random.default_rng(s) for s in root.spawn(3))


def run_single_trial(config: ExperimentConfig, cell: SweepCell, trial_index: int) -> str:
    """One end-to-end draw; returns "success", "error", or "budget"."""
    if cell.skipped:
        raise ValueError("cannot run a skipped cell")
    rng_x, rng_a, rng_b = trial_streams(config.master_seed, cell.index, trial_index)
    src = sample_source(config.source, config.n, rng_x)
    m = config.n - src.ell
    A = build_A(cell.k, m, config.ensembleA, rng_a)
    B = build_B(config.kindB, cell.k, src.ell, rng_b)
    H = np.hstack([A, B])
    w = H @ src.x
    cand = CandidateSet.from_source_spec(config.source, config.n, src.ell, cell.s_bar)
    try:
        outcome = separate(H, w, cand, config.tolerances, budget=config.budget)
    except BudgetExceededError:
        return "budget"
    if outcome.status != "Unique":
        return "error"
    err = float(np.linalg.norm(outcome.x_hat - src.x))
    ok = err <= RECOVERY_TOL * (1.0 + float(np.linalg.norm(src.x)))
    return "success" if ok else "error"


def predict_success(config: ExperimentConfig, cell: SweepCell) -> float | None:
    """P[|spt| <= s_bar] via the exact convolution; None unless k >= s_bar + 1."""
    if cell.k < cell.s_bar + 1:
        return None
    pmf = support_size_distribution(config.source, config.n)
    return float(np.sum(pmf[: cell.s_bar + 1]))


def predict_error_floor(config: ExperimentConfig, cell: SweepCell) -> float:
    """P[|spt| > k]: the converse lower bound on the error rate."""
    pmf = support_size_distribution(config.source, config.n)
    if cell.k >= config.n:
        return 0.0
    return float(np.sum(pmf[cell.k + 1 :]))


def run_phase_sweep(config: ExperimentConfig) -> list:
    """One ExperimentRecord per rate cell, in rate order."""
    records = []
    for cell in config.cells():
        start = time.perf_counter()
        successes = 0
        errors = 0
        budget_exceeded = 0
        if not cell.skipped:
            for t in range(config.trials):
                result = run_single_trial(config, cell, t)
                if result == "success":
                    successes += 1
                elif result == "error":
                    errors += 1
                else:
                    budget_exceeded += 1
        counted = successes + errors
        error_rate = (1.0 - successes / counted) if counted else float("nan")
        elapsed_ms = int(round((time.perf_counter() - start) * 1000.0)) if config.timing else 0
        records.append(ExperimentRecord(
            n=config.n,
            ell=config.ell,
            R=cell.R,
            k=cell.k,
            s_bar=cell.s_bar,
            trials=counted,
            successes=successes,
            error_rate=error_rate,
            oracle_success=predict_success(config, cell),
            oracle_error_lb=predict_error_floor(config, cell),
            seed=config.master_seed,
            wall_time_ms=elapsed_ms,
            budget_exceeded=budget_exceeded,
            skipped=cell.skipped,
        ))
    return records


def emit_results(records, format: str, path) -> None:
    """Write records as CSV (fixed column set) or JSON; bytes are reproducible."""
    if not records:
        raise ValueError("no records to emit")
    if format == "csv":
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(RECORD_COLUMNS) + "\n")
            for rec in records:
                fh.write(rec.csv_row() + "\n")
    elif format == "json":
        payload = [rec.to_json_dict() for rec in records]
        with open(path, "w", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {format!r}")
