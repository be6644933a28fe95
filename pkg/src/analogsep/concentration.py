"""Small-ball concentration bound checks and transversality rank tests.

The bound under test: for A with k rows i.i.d. uniform on the n-ball of
radius r and any u != 0, v, the probability P[||A u + v|| < delta] is at most
C(n, k, r) * delta^k / ||u||^k with C(n, k, r) = (2r)^(k(n-1)) * 2^k
divided by alpha(n, r)^k, where alpha is the ball volume.  Transversality
turns the kernel-avoidance requirement into exact column-subset rank
tests: a matrix is s-transversal when every s-column subset has numerical
rank s.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .measure import RankDeficiencyError, numerical_rank

__all__ = [
    "BoundReport",
    "BoundGrid",
    "ball_volume",
    "small_ball_constant",
    "empirical_small_ball_prob",
    "check_small_ball_bound",
    "write_bound_reports_csv",
    "default_bound_grid",
    "sparse_transversality",
    "mixed_transversality",
    "BOUND_REPORT_COLUMNS",
]

RANK_TOL = 1e-10

BOUND_REPORT_COLUMNS = ("n", "k", "r", "delta", "u_norm", "empirical", "stderr", "bound", "holds")


@dataclass(frozen=True)
class BoundReport:
    """One grid cell of the small-ball bound check."""

    n: int
    k: int
    r: float
    delta: float
    u: np.ndarray
    v: np.ndarray
    empirical_prob: float
    stderr: float
    bound_value: float
    holds: bool

    def csv_row(self) -> str:
        u_norm = float(np.linalg.norm(self.u))
        vals = (self.n, self.k, repr(self.r), repr(self.delta), repr(u_norm),
                repr(self.empirical_prob), repr(self.stderr), repr(self.bound_value),
                str(self.holds).lower())
        return ",".join(str(v) for v in vals)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "r": self.r, "delta": self.delta,
            "u_norm": float(np.linalg.norm(self.u)),
            "empirical": self.empirical_prob, "stderr": self.stderr,
            "bound": self.bound_value, "holds": self.holds,
        }


@dataclass(frozen=True)
class BoundGrid:
    """Cell list for check_small_ball_bound; each cell is (n, k, r, u, v, delta)."""

    cells: tuple

    def __len__(self) -> int:
        return len(self.cells)


def ball_volume(n: int, r: float) -> float:
    """alpha(n, r) = pi^(n/2) r^n / Gamma(n/2 + 1)."""
    if n < 1 or not r > 0.0:
        raise ValueError("require n >= 1 and r > 0")
    return math.pi ** (n / 2.0) * r ** n / math.gamma(n / 2.0 + 1.0)


def small_ball_constant(n: int, k: int, r: float) -> float:
    """C(n, k, r) = (2r)^(k(n-1)) * 2^k / alpha(n, r)^k, computed in log space."""
    if n < 1 or k < 1 or not r > 0.0:
        raise ValueError("require n >= 1, k >= 1, r > 0")
    log_alpha = (n / 2.0) * math.log(math.pi) + n * math.log(r) - math.lgamma(n / 2.0 + 1.0)
    log_c = k * (n - 1) * math.log(2.0 * r) + k * math.log(2.0) - k * log_alpha
    return math.exp(log_c)


def _ball_rows(trials: int, k: int, n: int, r: float, rng: np.random.Generator) -> np.ndarray:
    """(trials, k, n) stack of rows i.i.d. uniform on the n-ball of radius r."""
    rows = rng.standard_normal((trials, k, n))
    norms = np.linalg.norm(rows, axis=2, keepdims=True)
    while np.any(norms == 0.0):
        bad = norms[:, :, 0] == 0.0
        rows[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(rows, axis=2, keepdims=True)
    radii = r * rng.random((trials, k, 1)) ** (1.0 / n)
    return rows / norms * radii


def empirical_small_ball_prob(n: int, k: int, r: float, u, v, delta: float,
                              trials: int, rng: np.random.Generator):
    """Monte Carlo estimate of P[||A u + v|| < delta] with its binomial stderr."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (n,) or v.shape != (k,):
        raise ValueError("u must have length n and v length k")
    if np.linalg.norm(u) == 0.0:
        raise ValueError("u must be nonzero; the bound requires u != 0")
    if trials < 1 or not delta > 0.0:
        raise ValueError("require trials >= 1 and delta > 0")
    hits = 0
    chunk = 200_000 // max(k * n, 1) + 1
    remaining = trials
    while remaining > 0:
        batch = min(chunk, remaining)
        A = _ball_rows(batch, k, n, r, rng)
        img = A @ u + v
        hits += int(np.sum(np.linalg.norm(img, axis=1) < delta))
        remaining -= batch
    p_hat = hits / trials
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return p_hat, stderr


def check_small_ball_bound(grid: BoundGrid, trials: int, rng: np.random.Generator) -> list:
    """One BoundReport per cell; per-cell streams derive from rng by spawning."""
    children = rng.spawn(len(grid.cells))
    reports = []
    for (n, k, r, u, v, delta), child in zip(grid.cells, children):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        p_hat, stderr = empirical_small_ball_prob(n, k, r, u, v, delta, trials, child)
        bound = small_ball_constant(n, k, r) * delta ** k / float(np.linalg.norm(u)) ** k
        reports.append(BoundReport(
            n=n, k=k, r=r, delta=delta, u=u, v=v,
            empirical_prob=p_hat, stderr=stderr, bound_value=bound,
            holds=p_hat <= bound + 3.0 * stderr,
        ))
    return reports


def default_bound_grid() -> BoundGrid:
    """Full product grid n x k x delta x ||u|| at r = 1, v = 0, u along e1."""
    cells = []
    for n in (2, 3, 5):
        for k in (1, 2, 3):
            for delta in (0.02, 0.05, 0.1):
                for u_norm in (0.5, 1.0, 2.0):
                    u = np.zeros(n)
                    u[0] = u_norm
                    cells.append((n, k, 1.0, u, np.zeros(k), delta))
    return BoundGrid(cells=tuple(cells))


def write_bound_reports_csv(path, reports) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(BOUND_REPORT_COLUMNS) + "\n")
        for rep in reports:
            fh.write(rep.csv_row() + "\n")


def sparse_transversality(A, s: int, tol: float = RANK_TOL) -> bool:
    """True iff every s-column subset of A has numerical rank s."""
    A = np.asarray(A, dtype=float)
    k, m = A.shape
    if not 1 <= s <= min(k, m):
        raise ValueError(f"require 1 <= s <= min(k, m) = {min(k, m)}")
    for subset in itertools.combinations(range(m), s):
        if numerical_rank(A[:, subset], tol) < s:
            return False
    return True


def mixed_transversality(A, B, s: int, tol: float = RANK_TOL) -> bool:
    """Transversality of the concatenation [A B]; B must have full column rank."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if B.shape[1] > 0 and numerical_rank(B, tol) < B.shape[1]:
        raise RankDeficiencyError("B must have full column rank")
    return sparse_transversality(np.hstack([A, B]), s, tol)
