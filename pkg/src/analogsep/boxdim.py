"""Covering numbers and Minkowski (box-counting) dimension estimation.

Balls of radius eps are replaced by axis-aligned grid cells of side 2*eps
anchored at the origin; this changes the covering number by at most a
dimension-dependent constant factor and leaves the log-log slope (the
dimension) unchanged.  The dimension estimate is the least-squares slope of
log N against log(1/eps) over a dyadic scale sequence eps_m = eps0 * 2^-m,
fitted on a configurable window that by default drops the coarsest and the
finest scale, where finite samples bias the counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScaleSpec",
    "DimensionEstimate",
    "covering_number",
    "estimate_dimension",
    "mixed_rate",
]


@dataclass(frozen=True)
class ScaleSpec:
    """Dyadic scale schedule: eps0 (None means bbox diagonal / 4), count, window drops."""

    eps0: float | None = None
    n_scales: int = 8
    drop_coarse: int = 1
    drop_fine: int = 1

    def validate(self) -> "ScaleSpec":
        if self.eps0 is not None and not self.eps0 > 0.0:
            raise ValueError("eps0 must be > 0")
        if self.n_scales < 2:
            raise ValueError("need at least 2 scales in the dyadic sequence")
        if self.drop_coarse < 0 or self.drop_fine < 0:
            raise ValueError("window drops must be >= 0")
        if self.n_scales - self.drop_coarse - self.drop_fine < 2:
            raise ValueError("fit window must keep at least 2 scales")
        return self


@dataclass(frozen=True)
class DimensionEstimate:
    """Fitted covering-number growth exponent over a dyadic scale window."""

    scales: np.ndarray
    counts: np.ndarray
    slope: float
    fit_window: tuple
    residual: float
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {
            "scales": [float(s) for s in self.scales],
            "counts": [int(c) for c in self.counts],
            "slope": self.slope,
            "fit_window": list(self.fit_window),
            "residual": self.residual,
            "degenerate": self.degenerate,
        }


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a nonempty (count, dim) array")
    return pts


def covering_number(points, eps: float) -> int:
    """Occupied cells of the origin-anchored grid with cell side 2*eps.

    A point sitting exactly on a positive grid line is charged to the cell
    below it, so a set like [0, 1] at side 0.5 occupies 2 cells, matching the
    closed-cover count.
    """
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    pts = _as_points(points)
    side = 2.0 * eps
    idx = np.floor(pts / side)
    on_line = (pts == idx * side) & (idx > 0)
    idx = (idx - on_line).astype(np.int64)
    return len(np.unique(idx, axis=0))


def estimate_dimension(points, scale_spec: ScaleSpec | None = None) -> DimensionEstimate:
    """Least-squares slope of log N versus log(1/eps) over the fit window."""
    spec = (scale_spec or ScaleSpec()).validate()
    pts = _as_points(points)
    if spec.eps0 is None:
        diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        if diag == 0.0:
            # single distinct point: every scale counts one cell
            scales = 2.0 ** (-np.arange(spec.n_scales, dtype=float))
            counts = np.ones(spec.n_scales, dtype=np.int64)
            window = (spec.drop_coarse, spec.n_scales - spec.drop_fine)
            return DimensionEstimate(scales, counts, 0.0, window, 0.0, degenerate=True)
        eps0 = diag / 4.0
    else:
        eps0 = spec.eps0
    scales = eps0 * 2.0 ** (-np.arange(spec.n_scales, dtype=float))
    counts = np.array([covering_number(pts, e) for e in scales], dtype=np.int64)
    window = (spec.drop_coarse, spec.n_scales - spec.drop_fine)
    lo, hi = window
    x = np.log(1.0 / scales[lo:hi])
    y = np.log(counts[lo:hi].astype(float))
    if np.all(counts[lo:hi] == counts[lo]):
        return DimensionEstimate(scales, counts, 0.0, window, 0.0, degenerate=True)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    residual = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return DimensionEstimate(scales, counts, float(slope), window, residual)


def mixed_rate(lam: float, rho1: float, rho2: float) -> float:
    """Closed-form dimension compression rate of a mixed source: (1-lam)*rho1 + lam*rho2."""
    for name, val in (("lambda", lam), ("rho1", rho1), ("rho2", rho2)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} out of range [0, 1]: {val}")
    return (1.0 - lam) * rho1 + lam * rho2
