"""Set-intersection separation from a noiseless linear observation.

Given w = H x and a candidate set U of vectors whose generalized support has
size at most s_bar, the separator enumerates every support pattern T with
|T| <= s_bar together with every atom assignment on the complement, solves
the restricted least-squares problem per pattern, and keeps the consistent
candidates.  Exactly one survivor means unique recovery; two distinct
survivors certify ambiguity; none means the observation is infeasible for U.
Patterns with more than k free components are skipped as underdetermined by
construction; if the true support exceeds k the instance therefore cannot be
recovered, matching the converse counting argument.

Two interchangeable kernels drive the enumeration: a compiled extension
(analogsep._sepcore) and a vectorized pure-Python fallback.  Selection
happens at import; set ANALOGSEP_BACKEND=c or =py to force one.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _sepcore_py
from .sources import MixedSourceSpec

__all__ = [
    "CandidateSet",
    "SeparatorTolerances",
    "SeparationOutcome",
    "BudgetExceededError",
    "PatternSolution",
    "solve_on_pattern",
    "enumerate_solutions",
    "separate",
    "enumeration_size",
    "BACKEND",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10_000_000

try:
    from . import _sepcore as _compiled
except ImportError:
    _compiled = None

_forced = os.environ.get("ANALOGSEP_BACKEND")
if _forced not in (None, "", "c", "py"):
    raise ImportError(f"ANALOGSEP_BACKEND must be 'c' or 'py', got {_forced!r}")
if _forced == "c" and _compiled is None:
    raise ImportError("ANALOGSEP_BACKEND=c but the compiled kernel is not built")
BACKEND = "c" if (_compiled is not None and _forced != "py") else "py"


class BudgetExceededError(RuntimeError):
    """The pattern-assignment enumeration is larger than the configured budget."""


@dataclass(frozen=True)
class CandidateSet:
    """The set U of vectors with generalized support of size at most s_bar."""

    s_bar: int
    atoms1: tuple
    atoms2: tuple
    n: int
    ell: int

    def __post_init__(self):
        if not 0 <= self.s_bar <= self.n:
            raise ValueError("require 0 <= s_bar <= n")
        if not 0 <= self.ell <= self.n:
            raise ValueError("require 0 <= ell <= n")
        if len(self.atoms1) == 0 or len(self.atoms2) == 0:
            raise ValueError("atom lists must be nonempty")
        object.__setattr__(self, "atoms1", tuple(float(v) for v in self.atoms1))
        object.__setattr__(self, "atoms2", tuple(float(v) for v in self.atoms2))

    @classmethod
    def from_source_spec(cls, spec: MixedSourceSpec, n: int, ell: int, s_bar: int) -> "CandidateSet":
        return cls(
            s_bar=s_bar,
            atoms1=tuple(v for v, _ in spec.atoms1),
            atoms2=tuple(v for v, _ in spec.atoms2),
            n=n,
            ell=ell,
        )


@dataclass(frozen=True)
class SeparatorTolerances:
    """Scaled tolerances: residual acceptance and candidate deduplication."""

    residual: float = 1e-8
    dedup: float = 1e-6


@dataclass(frozen=True)
class SeparationOutcome:
    """Separator verdict with recovery witness(es) and enumeration accounting."""

    status: str
    x_hat: np.ndarray | None
    witnesses: tuple
    patterns_examined: int
    residual: float

    def to_json_dict(self) -> dict:
        out = {"status": self.status}
        if self.x_hat is not None:
            out["x_hat"] = [float(v) for v in self.x_hat]
        if self.witnesses:
            out["witnesses"] = [[float(v) for v in wit] for wit in self.witnesses]
        out["patterns_examined"] = self.patterns_examined
        out["residual"] = self.residual
        return out


@dataclass(frozen=True)
class PatternSolution:
    """Result of the restricted least-squares solve on one pattern."""

    feasible: bool
    candidate: np.ndarray | None
    residual: float
    nonunique: bool
    null_direction: np.ndarray | None


def solve_on_pattern(H, w, free, fixed_values, residual_tol: float) -> PatternSolution:
    """Solve for the components in `free` with the complement pinned to atoms.

    `fixed_values` aligns with the ascending complement of `free`.  The solve
    is rank revealing: a rank-deficient restricted block yields the
    minimum-norm solution with nonunique=True and a unit kernel direction.
    Patterns with more than k free components violate the precondition.
    """
    H = np.asarray(H, dtype=float)
    w = np.asarray(w, dtype=float)
    k, n = H.shape
    free = np.asarray(sorted(int(i) for i in free), dtype=np.intp)
    if free.size > k:
        raise ValueError(f"pattern has {free.size} free components, more than k={k}")
    comp = np.setdiff1d(np.arange(n), free, assume_unique=True)
    fixed_values = np.asarray(fixed_values, dtype=float)
    if fixed_values.shape != (comp.size,):
        raise ValueError("fixed_values must cover exactly the complement of free")
    wprime = w - H[:, comp] @ fixed_values
    u, residual, nonunique, null = _sepcore_py.solve_pattern_robust(H[:, free], wprime)
    rtol_abs = residual_tol * (1.0 + float(np.linalg.norm(w)))
    if residual > rtol_abs:
        return PatternSolution(False, None, residual, nonunique, null)
    vec = np.empty(n)
    vec[comp] = fixed_values
    vec[free] = u
    return PatternSolution(True, vec, residual, nonunique, null)


def enumeration_size(cand: CandidateSet, k: int) -> int:
    """Exact number of pattern-assignment pairs the enumeration evaluates."""
    n1 = cand.n - cand.ell
    n2 = cand.ell
    a1, a2 = len(cand.atoms1), len(cand.atoms2)
    total = 0
    for s in range(0, min(cand.s_bar, k, cand.n) + 1):
        for t1 in range(max(0, s - n2), min(s, n1) + 1):
            t2 = s - t1
            total += (
                math.comb(n1, t1) * math.comb(n2, t2)
                * a1 ** (n1 - t1) * a2 ** (n2 - t2)
            )
    return total


def _run_kernel(H, w, cand, tols, cap, backend):
    rtol_abs = tols.residual * (1.0 + float(np.linalg.norm(w)))
    n1 = cand.n - cand.ell
    atoms1 = list(cand.atoms1)
    atoms2 = list(cand.atoms2)
    if backend == "py" or _compiled is None:
        return _sepcore_py.fast_enumerate(
            H, w, n1, atoms1, atoms2, cand.s_bar, rtol_abs, tols.dedup, cap
        )
    base = np.empty(cand.n)
    base[:n1] = atoms1[0]
    base[n1:] = atoms2[0]
    HT = np.ascontiguousarray(H.T)
    wc = np.ascontiguousarray(w - H @ base)
    G = np.ascontiguousarray(H.T @ H)
    hw_adj = np.ascontiguousarray(H.T @ wc)
    cands, residuals, examined, min_res, needs_robust = _compiled.enumerate_kernel(
        HT, wc, G, hw_adj, base,
        np.asarray(atoms1, dtype=float), np.asarray(atoms2, dtype=float),
        n1, min(cand.s_bar, cand.n), rtol_abs, tols.dedup, cap,
    )
    if needs_robust:
        return _sepcore_py.robust_enumerate(
            H, w, n1, atoms1, atoms2, cand.s_bar, rtol_abs, tols.dedup, cap
        )
    return list(cands), list(residuals), int(examined), float(min_res)


def _prepare(H, w, cand, budget):
    H = np.ascontiguousarray(H, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    k, n = H.shape
    if n != cand.n:
        raise ValueError(f"H has {n} columns, candidate set expects {cand.n}")
    if w.shape != (k,):
        raise ValueError(f"w has shape {w.shape}, expected ({k},)")
    total = enumeration_size(cand, k)
    if total > budget:
        raise BudgetExceededError(
            f"enumeration needs {total} pattern-assignment pairs, budget is {budget}"
        )
    return H, w


def enumerate_solutions(H, w, cand: CandidateSet, tols: SeparatorTolerances | None = None,
                        cap: int = 2, budget: int = DEFAULT_BUDGET,
                        backend: str | None = None) -> list[np.ndarray]:
    """All deduplicated consistent candidates up to cap, in enumeration order."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    tols = tols or SeparatorTolerances()
    H, w = _prepare(H, w, cand, budget)
    cands, _, _, _ = _run_kernel(H, w, cand, tols, cap, backend or BACKEND)
    return cands


def separate(H, w, cand: CandidateSet, tols: SeparatorTolerances | None = None,
             budget: int = DEFAULT_BUDGET, backend: str | None = None) -> SeparationOutcome:
    """Return the unique consistent candidate in U, or report Ambiguous/Infeasible."""
    tols = tols or SeparatorTolerances()
    H, w = _prepare(H, w, cand, budget)
    cands, residuals, examined, min_res = _run_kernel(H, w, cand, tols, 2, backend or BACKEND)
    if len(cands) == 0:
        return SeparationOutcome("Infeasible", None, (), examined, float(min_res))
    if len(cands) == 1:
        return SeparationOutcome("Unique", cands[0], (), examined, float(residuals[0]))
    return SeparationOutcome(
        "Ambiguous", None, (cands[0], cands[1]), examined, float(residuals[0])
    )
