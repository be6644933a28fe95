"""Pure-Python enumeration kernels for the set-intersection separator.

Both backends honor one enumeration contract so their outcomes agree:
support patterns are visited by size ascending, sizes above k are skipped as
underdetermined by construction, patterns of one size follow lexicographic
order, and atom assignments on the complement cycle the last position
fastest.  The examined counter advances once per (pattern, assignment) pair
and stops at the pair that produced the cap-th distinct candidate.

The fast path batches the single-atom case per size class with a vectorized
Cholesky on the pattern Gram matrices; patterns whose pivot collapses are
re-solved by the rank-revealing path, which emits the minimum-norm solution
plus a second witness along a kernel direction when a feasible pattern is
rank deficient (such a pattern carries an affine family of candidates, so
two witnesses certify ambiguity).
"""

from __future__ import annotations

import itertools

import numpy as np

# relative pivot floor on the Gram scale (squares the 1e-10 rank tolerance)
PIVOT_RTOL = 1e-20
# relative singular-value cutoff for the rank-revealing solves
LSTSQ_RCOND = 1e-12


def normalized_null_direction(cols: np.ndarray) -> np.ndarray:
    """Smallest right singular vector of cols, sign-fixed for determinism."""
    _, _, VT = np.linalg.svd(cols, full_matrices=True)
    null = VT[-1]
    pivot = np.argmax(np.abs(null))
    if null[pivot] < 0:
        null = -null
    return null


def solve_pattern_robust(cols: np.ndarray, wprime: np.ndarray):
    """Rank-revealing least squares on one pattern.

    Returns (u, residual, nonunique, null_dir): the minimum-norm solution,
    its explicit residual, whether the column block is rank deficient, and a
    unit kernel direction when it is.
    """
    s = cols.shape[1]
    if s == 0:
        return np.zeros(0), float(np.linalg.norm(wprime)), False, None
    u, _, rank, _ = np.linalg.lstsq(cols, wprime, rcond=LSTSQ_RCOND)
    residual = float(np.linalg.norm(cols @ u - wprime))
    if rank < s:
        return u, residual, True, normalized_null_direction(cols)
    return u, residual, False, None


class _Collector:
    """Accumulates deduplicated candidates and tracks the early-exit point."""

    def __init__(self, cap: int, dedup_tol: float):
        self.cap = cap
        self.dedup_tol = dedup_tol
        self.candidates: list[np.ndarray] = []
        self.residuals: list[float] = []

    def offer(self, vec: np.ndarray, residual: float) -> bool:
        """Add vec unless a kept candidate matches it; return True when cap is hit."""
        for kept in self.candidates:
            if np.max(np.abs(vec - kept)) <= self.dedup_tol * (1.0 + np.max(np.abs(kept))):
                return False
        self.candidates.append(vec)
        self.residuals.append(residual)
        return len(self.candidates) >= self.cap

    @property
    def full(self) -> bool:
        return len(self.candidates) >= self.cap


def _batched_cholesky(G: np.ndarray):
    """Lower Cholesky factors of a (P, s, s) stack; flags members with tiny pivots."""
    P, s, _ = G.shape
    L = np.zeros_like(G)
    diag = G[:, np.arange(s), np.arange(s)]
    floor = PIVOT_RTOL * np.maximum(diag.max(axis=1), 1e-300)
    bad = np.zeros(P, dtype=bool)
    for j in range(s):
        d = G[:, j, j] - np.einsum("pt,pt->p", L[:, j, :j], L[:, j, :j])
        bad |= d <= floor
        d = np.where(d <= floor, 1.0, d)
        L[:, j, j] = np.sqrt(d)
        if j + 1 < s:
            off = G[:, j + 1 :, j] - np.einsum("pit,pt->pi", L[:, j + 1 :, :j], L[:, j, :j])
            L[:, j + 1 :, j] = off / L[:, j, j][:, None]
    return L, bad


def _batched_cholesky_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L L^T u = b for a (P, s, s) stack of factors."""
    P, s, _ = L.shape
    y = np.zeros_like(b)
    for j in range(s):
        y[:, j] = (b[:, j] - np.einsum("pt,pt->p", L[:, j, :j], y[:, :j])) / L[:, j, j]
    u = np.zeros_like(b)
    for j in range(s - 1, -1, -1):
        u[:, j] = (y[:, j] - np.einsum("pt,pt->p", L[:, j + 1 :, j], u[:, j + 1 :])) / L[:, j, j]
    return u


def _patterns_of_size(n: int, s: int) -> np.ndarray:
    if s == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), s)),
        dtype=np.intp,
    ).reshape(-1, s)


def fast_enumerate(H, w, n1, atoms1, atoms2, s_bar, rtol_abs, dedup_tol, cap):
    """Batched kernel for single-atom sources; defers multi-atom specs to the robust loop."""
    if len(atoms1) > 1 or len(atoms2) > 1:
        return robust_enumerate(H, w, n1, atoms1, atoms2, s_bar, rtol_abs, dedup_tol, cap)
    k, n = H.shape
    base = np.empty(n)
    base[:n1] = atoms1[0]
    base[n1:] = atoms2[0]
    c_all = H @ base
    G = H.T @ H
    hw_adj = H.T @ (w - c_all)

    collector = _Collector(cap, dedup_tol)
    examined = 0
    min_residual = np.inf
    for s in range(0, min(s_bar, k, n) + 1):
        pats = _patterns_of_size(n, s)
        if s == 0:
            residual = float(np.linalg.norm(w - c_all))
            examined += 1
            min_residual = min(min_residual, residual)
            if residual <= rtol_abs and collector.offer(base.copy(), residual):
                return collector.candidates, collector.residuals, examined, min_residual
            continue
        P = pats.shape[0]
        GT = G[pats[:, :, None], pats[:, None, :]]
        aT = base[pats]
        # rhs of the normal equations: H_T^T (w - c_all + H_T a_T)
        bT = hw_adj[pats] + np.einsum("pij,pj->pi", GT, aT)
        L, bad = _batched_cholesky(GT)
        u = _batched_cholesky_solve(L, bT)
        HcT = H.T[pats]
        pred = np.einsum("psk,ps->pk", HcT, u - aT)
        res = np.linalg.norm((w - c_all)[None, :] - pred, axis=1)

        robust: dict[int, tuple] = {}
        for i in np.nonzero(bad)[0]:
            cols = H[:, pats[i]]
            wprime = w - c_all + cols @ aT[i]
            robust[int(i)] = solve_pattern_robust(cols, wprime)
            res[i] = robust[int(i)][1]

        hits = np.nonzero(res <= rtol_abs)[0]
        stop_at = None
        for i in hits:
            i = int(i)
            if i in robust:
                ui, residual, nonunique, null = robust[i]
            else:
                ui, residual, nonunique, null = u[i], float(res[i]), False, None
            vec = base.copy()
            vec[pats[i]] = ui
            done = collector.offer(vec, residual)
            if not done and nonunique:
                shift = 1.0 + float(np.max(np.abs(ui), initial=0.0))
                vec2 = base.copy()
                vec2[pats[i]] = ui + shift * null
                done = collector.offer(vec2, residual)
            if done:
                stop_at = i
                break
        if stop_at is not None:
            examined += stop_at + 1
            min_residual = min(min_residual, float(res[: stop_at + 1].min()))
            return collector.candidates, collector.residuals, examined, min_residual
        examined += P
        if P:
            min_residual = min(min_residual, float(res.min()))
    return collector.candidates, collector.residuals, examined, min_residual


def robust_enumerate(H, w, n1, atoms1, atoms2, s_bar, rtol_abs, dedup_tol, cap):
    """Reference kernel: every pair solved by the rank-revealing path."""
    k, n = H.shape
    atoms_for = [atoms1 if i < n1 else atoms2 for i in range(n)]
    collector = _Collector(cap, dedup_tol)
    examined = 0
    min_residual = np.inf
    for s in range(0, min(s_bar, k, n) + 1):
        for pat in itertools.combinations(range(n), s):
            pat = np.array(pat, dtype=np.intp)
            comp = np.setdiff1d(np.arange(n), pat, assume_unique=True)
            cols = H[:, pat]
            for digits in itertools.product(*(range(len(atoms_for[i])) for i in comp)):
                assign = np.array(
                    [atoms_for[i][d] for i, d in zip(comp, digits)], dtype=float
                )
                wprime = w - H[:, comp] @ assign
                ui, residual, nonunique, null = solve_pattern_robust(cols, wprime)
                examined += 1
                min_residual = min(min_residual, residual)
                if residual <= rtol_abs:
                    vec = np.empty(n)
                    vec[comp] = assign
                    vec[pat] = ui
                    done = collector.offer(vec, residual)
                    if not done and nonunique:
                        shift = 1.0 + float(np.max(np.abs(ui), initial=0.0))
                        vec2 = vec.copy()
                        vec2[pat] = ui + shift * null
                        done = collector.offer(vec2, residual)
                    if done:
                        return collector.candidates, collector.residuals, examined, min_residual
    return collector.candidates, collector.residuals, examined, min_residual
