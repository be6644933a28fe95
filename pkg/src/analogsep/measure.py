"""Measurement matrices and the noiseless linear observation w = A y + B z.

A is a random k x (n - ell) matrix drawn from an absolutely continuous
ensemble (standard normal entries, or rows i.i.d. uniform on the ball of
radius r).  B is k x ell and certified to have numerical rank min(k, ell);
the identity-padded kind stacks the ell x ell identity over zero rows and so
requires k >= ell, while the seeded dense kind is generic at any shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EnsembleA",
    "MeasurementSystem",
    "RankDeficiencyError",
    "sample_ball_uniform",
    "build_A",
    "build_B",
    "measure",
    "numerical_rank",
    "save_matrix_csv",
    "load_matrix_csv",
]

RANK_TOL = 1e-10


class RankDeficiencyError(ValueError):
    """B fails the full-rank certification."""


@dataclass(frozen=True)
class EnsembleA:
    """Row law for A: "normal" entries, or "ball" rows uniform on B(0, r)."""

    kind: str = "normal"
    r: float = 1.0

    def validate(self) -> "EnsembleA":
        if self.kind not in ("normal", "ball"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "ball" and not self.r > 0.0:
            raise ValueError("ball radius must be > 0")
        return self

    def to_json_dict(self) -> dict:
        if self.kind == "normal":
            return {"kind": "normal"}
        return {"kind": "ball", "r": self.r}

    @classmethod
    def from_json_dict(cls, d: dict) -> "EnsembleA":
        return cls(d.get("kind", "normal"), float(d.get("r", 1.0))).validate()


@dataclass(frozen=True)
class MeasurementSystem:
    """The pair (A, B) with its provenance; H is the concatenation [A B]."""

    A: np.ndarray
    B: np.ndarray
    ensembleA: EnsembleA
    kindB: str
    k: int
    n: int
    ell: int
    seed: int = 0
    H: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.A.shape != (self.k, self.n - self.ell):
            raise ValueError("A has wrong shape")
        if self.B.shape != (self.k, self.ell):
            raise ValueError("B has wrong shape")
        if not (0 <= self.ell <= self.n and self.k <= self.n):
            raise ValueError("require 0 <= ell <= n and k <= n")
        if numerical_rank(self.B, RANK_TOL) != min(self.k, self.ell):
            raise RankDeficiencyError("B is rank deficient")
        object.__setattr__(self, "H", np.hstack([self.A, self.B]))


def sample_ball_uniform(n: int, r: float, rng: np.random.Generator) -> np.ndarray:
    """One vector uniform on the n-ball of radius r: direction times r * U^(1/n)."""
    if n < 1 or not r > 0.0:
        raise ValueError("require n >= 1 and r > 0")
    direction = rng.standard_normal(n)
    norm = np.linalg.norm(direction)
    while norm == 0.0:
        direction = rng.standard_normal(n)
        norm = np.linalg.norm(direction)
    radius = r * rng.random() ** (1.0 / n)
    return direction * (radius / norm)


def build_A(k: int, m: int, ensembleA: EnsembleA, rng: np.random.Generator) -> np.ndarray:
    """k x m matrix with rows drawn per the ensemble; k = 0 or m = 0 give an empty matrix."""
    if k < 0 or m < 0:
        raise ValueError("require k, m >= 0")
    ensembleA.validate()
    if ensembleA.kind == "normal":
        return rng.standard_normal((k, m))
    if m == 0:
        return np.zeros((k, 0))
    rows = rng.standard_normal((k, m))
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        rows[bad] = rng.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
    radii = ensembleA.r * rng.random(k) ** (1.0 / m)
    return rows / norms * radii[:, None]


def build_B(kindB: str, k: int, ell: int, rng_or_payload) -> np.ndarray:
    """k x ell matrix of certified numerical rank min(k, ell).

    kindB "identity" stacks I_ell over k - ell zero rows (requires k >= ell);
    "normal" draws seeded standard normal entries; "user" takes an explicit
    payload matrix and raises RankDeficiencyError if certification fails.
    """
    if k < 0 or ell < 0:
        raise ValueError("require k, ell >= 0")
    if kindB == "identity":
        if k < ell:
            raise ValueError("identity-padded B requires k >= ell")
        B = np.zeros((k, ell))
        B[:ell, :] = np.eye(ell)
    elif kindB == "normal":
        B = rng_or_payload.standard_normal((k, ell))
    elif kindB == "user":
        B = np.array(rng_or_payload, dtype=float)
        if B.shape != (k, ell):
            raise ValueError(f"user B has shape {B.shape}, expected {(k, ell)}")
    else:
        raise ValueError(f"unknown B kind {kindB!r}")
    if numerical_rank(B, RANK_TOL) != min(k, ell):
        raise RankDeficiencyError(f"B of kind {kindB!r} failed rank certification")
    return B


def measure(system: MeasurementSystem, x) -> np.ndarray:
    """Apply the observation map: w = A y + B z = [A B] x."""
    vec = x.x if hasattr(x, "x") else np.asarray(x, dtype=float)
    if vec.shape != (system.n,):
        raise ValueError(f"x has shape {vec.shape}, expected ({system.n},)")
    return system.H @ vec


def numerical_rank(M: np.ndarray, tol: float) -> int:
    """Number of singular values above tol times the largest; 0 for empty or zero M."""
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def save_matrix_csv(path, M: np.ndarray) -> None:
    """Row-major CSV whose one-line header holds the dimensions "k,m"."""
    M = np.asarray(M, dtype=float)
    k, m = M.shape
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{k},{m}\n")
        if m > 0:
            for row in M:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        try:
            k, m = (int(t) for t in header.split(","))
        except ValueError:
            raise ValueError(f"matrix CSV header must be 'k,m' integers, got {header!r}")
        rows = [line.strip() for line in fh if line.strip()]
    if k == 0 or m == 0:
        return np.zeros((k, m))
    if len(rows) != k:
        raise ValueError(f"matrix CSV has {len(rows)} data rows, header says {k}")
    M = np.array([[float(t) for t in line.split(",")] for line in rows])
    if M.shape != (k, m):
        raise ValueError(f"matrix CSV body is {M.shape}, header says {(k, m)}")
    return M
