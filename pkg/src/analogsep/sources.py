"""Mixed discrete-continuous source construction and generalized support statistics.

A source vector x of length n is split at ell = floor(lambda * n): the first
n - ell components are i.i.d. draws from the mixture
(1 - rho1) * mu_d1 + rho1 * mu_c1 and the last ell components from
(1 - rho2) * mu_d2 + rho2 * mu_c2, where mu_d is a finite atomic law and mu_c
is absolutely continuous.  The generalized support spt(x) collects the indices
whose component is not an atom of its block's discrete law; for a sampled
vector it coincides almost surely with the set of continuous draws, which the
sampler records directly so no floating-point comparison governs correctness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ContinuousLaw",
    "MixedSourceSpec",
    "SourceVector",
    "validate_spec",
    "sample_source",
    "generalized_support",
    "support_cap",
    "support_size_distribution",
]

_WEIGHT_TOL = 1e-12


class SpecError(ValueError):
    """A MixedSourceSpec invariant is violated."""


@dataclass(frozen=True)
class ContinuousLaw:
    """Absolutely continuous component law: standard normal or uniform on [lo, hi]."""

    kind: str = "normal"
    lo: float = 0.0
    hi: float = 1.0

    def validate(self) -> "ContinuousLaw":
        if self.kind not in ("normal", "uniform"):
            raise SpecError(f"unknown continuous law kind {self.kind!r}")
        if self.kind == "uniform" and not self.lo < self.hi:
            raise SpecError("uniform law requires lo < hi")
        return self

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "normal":
            return rng.standard_normal(size)
        return rng.uniform(self.lo, self.hi, size)

    def to_json_dict(self) -> dict:
        if self.kind == "normal":
            return {"kind": "normal"}
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ContinuousLaw":
        if d.get("kind") == "uniform":
            return cls("uniform", float(d["lo"]), float(d["hi"])).validate()
        return cls(d.get("kind", "normal")).validate()


@dataclass(frozen=True)
class MixedSourceSpec:
    """Parameters of the two constituent mixtures.

    ``lam`` is the block-fraction parameter (serialized under the key
    "lambda"); ``rho1``/``rho2`` are the continuous-mixture weights; ``atoms1``
    and ``atoms2`` are (value, weight) lists describing the discrete laws;
    ``cont1``/``cont2`` are the continuous laws.  Defaults give the sparse
    case: a single atom at 0 with standard normal continuous parts.
    """

    lam: float = 0.5
    rho1: float = 0.5
    rho2: float = 0.5
    atoms1: tuple = ((0.0, 1.0),)
    atoms2: tuple = ((0.0, 1.0),)
    cont1: ContinuousLaw = field(default_factory=ContinuousLaw)
    cont2: ContinuousLaw = field(default_factory=ContinuousLaw)

    def __post_init__(self):
        object.__setattr__(self, "atoms1", tuple((float(v), float(w)) for v, w in self.atoms1))
        object.__setattr__(self, "atoms2", tuple((float(v), float(w)) for v, w in self.atoms2))

    def atom_values(self, block: int) -> np.ndarray:
        atoms = self.atoms1 if block == 1 else self.atoms2
        return np.array([v for v, _ in atoms])

    def atom_weights(self, block: int) -> np.ndarray:
        atoms = self.atoms1 if block == 1 else self.atoms2
        return np.array([w for _, w in atoms])

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "rho1": self.rho1,
            "rho2": self.rho2,
            "atoms1": [list(a) for a in self.atoms1],
            "atoms2": [list(a) for a in self.atoms2],
            "cont1": self.cont1.to_json_dict(),
            "cont2": self.cont2.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MixedSourceSpec":
        spec = cls(
            lam=float(d["lambda"]),
            rho1=float(d["rho1"]),
            rho2=float(d["rho2"]),
            atoms1=tuple((float(v), float(w)) for v, w in d.get("atoms1", [[0.0, 1.0]])),
            atoms2=tuple((float(v), float(w)) for v, w in d.get("atoms2", [[0.0, 1.0]])),
            cont1=ContinuousLaw.from_json_dict(d.get("cont1", {})),
            cont2=ContinuousLaw.from_json_dict(d.get("cont2", {})),
        )
        return validate_spec(spec)


@dataclass(frozen=True)
class SourceVector:
    """A realized source: the vector, its split point, and its generation-time support."""

    x: np.ndarray
    n: int
    ell: int
    support: np.ndarray

    @property
    def y(self) -> np.ndarray:
        return self.x[: self.n - self.ell]

    @property
    def z(self) -> np.ndarray:
        return self.x[self.n - self.ell :]


def validate_spec(spec: MixedSourceSpec) -> MixedSourceSpec:
    """Check every MixedSourceSpec invariant; raise SpecError on the first violation."""
    for name, val in (("lambda", spec.lam), ("rho1", spec.rho1), ("rho2", spec.rho2)):
        if not 0.0 <= val <= 1.0:
            raise SpecError(f"{name} out of range [0, 1]: {val}")
    for label, atoms in (("atoms1", spec.atoms1), ("atoms2", spec.atoms2)):
        if len(atoms) == 0:
            raise SpecError(f"{label} is empty")
        values = [v for v, _ in atoms]
        if len(set(values)) != len(values):
            raise SpecError(f"{label} has a duplicate atom value")
        for _, w in atoms:
            if not w > 0.0:
                raise SpecError(f"{label} has a non-positive weight")
        total = math.fsum(w for _, w in atoms)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise SpecError(f"{label} weights sum to {total}, not 1")
    spec.cont1.validate()
    spec.cont2.validate()
    return spec


def split_point(n: int, lam: float) -> int:
    return int(math.floor(lam * n))


def sample_source(spec: MixedSourceSpec, n: int, rng: np.random.Generator) -> SourceVector:
    """Draw one source vector of length n.

    Each component independently takes an atom of its block's discrete law
    (chosen by weight) with probability 1 - rho, and a draw from the block's
    continuous law with probability rho.  The stream is consumed in a fixed
    bulk order (mixture flags, atom indices per block, continuous draws per
    block) so identical (spec, n, seed) reproduce the vector bitwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ell = split_point(n, spec.lam)
    n1 = n - ell
    mix = rng.random(n)
    rho = np.concatenate([np.full(n1, spec.rho1), np.full(ell, spec.rho2)])
    continuous = mix < rho

    x = np.empty(n)
    for block, lo, hi in ((1, 0, n1), (2, n1, n)):
        values = spec.atom_values(block)
        weights = spec.atom_weights(block)
        count = hi - lo
        if len(values) == 1:
            x[lo:hi] = values[0]
        else:
            idx = rng.choice(len(values), size=count, p=weights)
            x[lo:hi] = values[idx]
    cont_draws = np.concatenate(
        [spec.cont1.sample(n1, rng), spec.cont2.sample(ell, rng)]
    )
    x = np.where(continuous, cont_draws, x)
    return SourceVector(x=x, n=n, ell=ell, support=np.nonzero(continuous)[0])


def generalized_support(x: np.ndarray, spec: MixedSourceSpec, n: int, ell: int) -> np.ndarray:
    """Indices whose component is not an atom of its block, by exact equality."""
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"x has length {x.shape}, expected ({n},)")
    if not 0 <= ell <= n:
        raise ValueError("ell out of range")
    n1 = n - ell
    off = np.zeros(n, dtype=bool)
    for v in spec.atom_values(1):
        off[:n1] |= x[:n1] == v
    for v in spec.atom_values(2):
        off[n1:] |= x[n1:] == v
    return np.nonzero(~off)[0]


def support_cap(spec: MixedSourceSpec, n: int, kappa: float) -> int:
    """Largest support size admitted to the candidate set: ceil((threshold + kappa) * n) - 1."""
    if not kappa > 0.0:
        raise ValueError("kappa must be > 0")
    threshold = (1.0 - spec.lam) * spec.rho1 + spec.lam * spec.rho2
    return math.ceil((threshold + kappa) * n) - 1


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    """Binomial(n, p) pmf, computed in log space for stability at large n."""
    if n == 0:
        return np.ones(1)
    pmf = np.zeros(n + 1)
    if p == 0.0:
        pmf[0] = 1.0
        return pmf
    if p == 1.0:
        pmf[n] = 1.0
        return pmf
    logs = np.array(
        [math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
         + j * math.log(p) + (n - j) * math.log1p(-p) for j in range(n + 1)]
    )
    return np.exp(logs)


def support_size_distribution(spec: MixedSourceSpec, n: int) -> np.ndarray:
    """Exact law of |spt(x)|: the convolution Binomial(n-ell, rho1) * Binomial(ell, rho2).

    Returns a vector of length n + 1 whose masses sum to 1 within 1e-12.
    """
    validate_spec(spec)
    ell = split_point(n, spec.lam)
    pmf = np.convolve(_binomial_pmf(n - ell, spec.rho1), _binomial_pmf(ell, spec.rho2))
    out = np.zeros(n + 1)
    out[: pmf.size] = pmf
    return out
