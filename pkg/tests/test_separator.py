import itertools
import math

import numpy as np
import pytest

import analogsep.separator as sep
from analogsep.measure import EnsembleA, build_A, build_B
from analogsep.separator import (
    BudgetExceededError,
    CandidateSet,
    SeparatorTolerances,
    enumerate_solutions,
    enumeration_size,
    separate,
    solve_on_pattern,
)
from analogsep.sources import MixedSourceSpec, sample_source
from analogsep.experiments import trial_streams

SPARSE = MixedSourceSpec(lam=0.5, rho1=0.3, rho2=0.3)

BACKENDS = ["py"] + (["c"] if sep._compiled is not None else [])


def _planted_instance(n, k, spt, seed=0, values=None):
    """Deterministic H and w with the true vector supported on spt."""
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((k, n))
    x = np.zeros(n)
    x[list(spt)] = values if values is not None else rng.standard_normal(len(spt)) + 1.0
    return H, x, H @ x


@pytest.mark.parametrize("backend", BACKENDS)
def test_unique_recovery_on_planted_support(backend):
    n, k = 10, 5
    H, x, w = _planted_instance(n, k, [1, 6], seed=2)
    cand = CandidateSet.from_source_spec(SPARSE, n, 5, 3)
    out = separate(H, w, cand, backend=backend)
    assert out.status == "Unique"
    assert np.linalg.norm(out.x_hat - x) <= 1e-8 * (1 + np.linalg.norm(x))
    assert out.residual <= 1e-8 * (1 + np.linalg.norm(w))


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_measurement_returns_all_atoms_vector(backend):
    n, k = 8, 4
    rng = np.random.default_rng(5)
    H = rng.standard_normal((k, n))
    cand = CandidateSet.from_source_spec(SPARSE, n, 4, 2)
    out = separate(H, np.zeros(k), cand, backend=backend)
    assert out.status == "Unique"
    assert np.array_equal(out.x_hat, np.zeros(n))


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_when_no_pattern_fits(backend):
    n, k = 8, 4
    H, x, w = _planted_instance(n, k, [0, 2, 5], seed=7)
    cand = CandidateSet.from_source_spec(SPARSE, n, 4, 1)  # cap below |spt|
    out = separate(H, w, cand, backend=backend)
    assert out.status == "Infeasible"
    assert out.x_hat is None
    assert out.residual > 1e-4  # best residual reported for diagnostics
    assert out.patterns_examined == enumeration_size(cand, k)


@pytest.mark.parametrize("backend", BACKENDS)
def test_ambiguous_reports_two_distinct_witnesses(backend):
    # k=2 observations cannot pin down one of many size-2 supports
    n, k = 8, 2
    H, x, w = _planted_instance(n, k, [0, 3], seed=9)
    cand = CandidateSet.from_source_spec(SPARSE, n, 4, 2)
    out = separate(H, w, cand, backend=backend)
    assert out.status == "Ambiguous"
    assert len(out.witnesses) == 2
    a, b = out.witnesses
    tol = 1e-6 * (1.0 + max(np.abs(a).max(), np.abs(b).max()))
    assert np.abs(a - b).max() > tol
    for wit in out.witnesses:
        assert np.linalg.norm(H @ wit - w) <= 1e-8 * (1 + np.linalg.norm(w))


@pytest.mark.parametrize("backend", BACKENDS)
def test_supports_wider_than_k_are_skipped(backend):
    # true support size 3 > k=2, no consistent candidate remains
    n, k = 8, 2
    H, x, w = _planted_instance(n, k, [0, 3, 6], seed=13)
    cand = CandidateSet.from_source_spec(SPARSE, n, 4, 3)
    out = separate(H, w, cand, backend=backend)
    assert out.status in ("Infeasible", "Ambiguous")
    if out.status == "Ambiguous":
        for wit in out.witnesses:
            spt = np.nonzero(wit)[0]
            assert len(spt) <= k


def test_enumeration_size_matches_brute_force_count():
    cand = CandidateSet(s_bar=2, atoms1=(0.0, 1.0), atoms2=(0.0,), n=5, ell=2)
    k = 3
    n1 = 3
    total = 0
    for s in range(0, min(cand.s_bar, k) + 1):
        for T in itertools.combinations(range(5), s):
            comp = [i for i in range(5) if i not in T]
            arity = [2 if i < n1 else 1 for i in comp]
            total += math.prod(arity)
    assert enumeration_size(cand, k) == total


def test_enumeration_size_truncates_at_k():
    cand = CandidateSet(s_bar=4, atoms1=(0.0,), atoms2=(0.0,), n=6, ell=3)
    # sizes 3 and 4 are skipped once k=2
    assert enumeration_size(cand, 2) == 1 + 6 + 15


def test_static_budget_check_raises_before_enumerating():
    n, k = 12, 6
    H, x, w = _planted_instance(n, k, [0], seed=1)
    cand = CandidateSet.from_source_spec(SPARSE, n, 6, 5)
    with pytest.raises(BudgetExceededError):
        separate(H, w, cand, budget=100)
    # budget equal to the exact count is enough
    out = separate(H, w, cand, budget=enumeration_size(cand, k))
    assert out.status == "Unique"


@pytest.mark.parametrize("backend", BACKENDS)
def test_duplicate_candidates_are_merged(backend):
    # x = 0 on a two-atom alphabet: many patterns produce the same vector
    n, k = 6, 3
    rng = np.random.default_rng(21)
    H = rng.standard_normal((k, n))
    w = H @ np.zeros(n)
    cand = CandidateSet(s_bar=1, atoms1=(0.0,), atoms2=(0.0,), n=n, ell=3)
    cands = enumerate_solutions(H, w, cand, cap=5, backend=backend)
    assert len(cands) == 1  # all size-1 patterns collapse onto the zero vector


@pytest.mark.parametrize("backend", BACKENDS)
def test_multi_atom_alphabets(backend):
    spec = MixedSourceSpec(lam=0.5, rho1=0.3, rho2=0.3,
                           atoms1=((0.0, 0.5), (1.0, 0.5)),
                           atoms2=((0.0, 0.5), (-1.0, 0.5)))
    n = 10
    rng_x, rng_a, rng_b = trial_streams(77, 0, 0)
    src = sample_source(spec, n, rng_x)
    A = build_A(6, n - src.ell, EnsembleA(), rng_a)
    B = build_B("normal", 6, src.ell, rng_b)
    H = np.hstack([A, B])
    cand = CandidateSet.from_source_spec(spec, n, src.ell, 4)
    if len(src.support) > 4:
        pytest.skip("draw exceeded the candidate cap")
    out = separate(H, H @ src.x, cand, backend=backend)
    assert out.status == "Unique"
    assert np.linalg.norm(out.x_hat - src.x) <= 1e-8 * (1 + np.linalg.norm(src.x))


@pytest.mark.parametrize("backend", BACKENDS)
def test_k_zero_admits_only_the_atom_vector(backend):
    cand = CandidateSet(s_bar=2, atoms1=(1.5,), atoms2=(0.0,), n=6, ell=3)
    out = separate(np.zeros((0, 6)), np.zeros(0), cand, backend=backend)
    assert out.status == "Unique"
    assert np.array_equal(out.x_hat, np.array([1.5, 1.5, 1.5, 0.0, 0.0, 0.0]))
    assert out.patterns_examined == 1


@pytest.mark.parametrize("backend", BACKENDS)
def test_rank_deficient_pattern_yields_witness_pair(backend):
    n, k = 8, 4
    rng = np.random.default_rng(3)
    H = rng.standard_normal((k, n))
    H[:, 1] = H[:, 0]  # duplicated column makes size-2 patterns singular
    x = np.zeros(n)
    x[0] = 2.0
    cand = CandidateSet.from_source_spec(SPARSE, n, 4, 2)
    out = separate(H, H @ x, cand, backend=backend)
    assert out.status == "Ambiguous"


def test_solve_on_pattern_contract():
    n, k = 6, 3
    H, x, w = _planted_instance(n, k, [2], seed=4, values=[1.3])
    comp = [0, 1, 3, 4, 5]
    sol = solve_on_pattern(H, w, [2], np.zeros(len(comp)), 1e-8)
    assert sol.feasible and not sol.nonunique
    assert np.allclose(sol.candidate, x)
    # inconsistent pattern: wrong fixed values leave a residual
    bad = solve_on_pattern(H, w, [4], np.zeros(5), 1e-8)
    assert not bad.feasible and bad.residual > 1e-3
    with pytest.raises(ValueError):
        solve_on_pattern(H, w, [0, 1, 2, 3], np.zeros(2), 1e-8)  # 4 free > k


def test_solve_on_pattern_rank_deficient_reports_null_direction():
    H = np.zeros((3, 4))
    H[:, 0] = [1.0, 0.0, 0.0]
    H[:, 1] = [1.0, 0.0, 0.0]
    w = np.array([2.0, 0.0, 0.0])
    sol = solve_on_pattern(H, w, [0, 1], np.zeros(2), 1e-8)
    assert sol.feasible and sol.nonunique
    assert sol.null_direction is not None
    # moving along the kernel direction preserves the measurement
    shifted = sol.candidate.copy()
    shifted[[0, 1]] += sol.null_direction
    assert np.linalg.norm(H @ shifted - w) < 1e-10


def test_enumerate_solutions_cap_semantics():
    n, k = 8, 2
    H, x, w = _planted_instance(n, k, [0, 3], seed=9)
    cand = CandidateSet.from_source_spec(SPARSE, n, 4, 2)
    one = enumerate_solutions(H, w, cand, cap=1)
    three = enumerate_solutions(H, w, cand, cap=3)
    assert len(one) == 1
    assert len(three) == 3
    with pytest.raises(ValueError):
        enumerate_solutions(H, w, cand, cap=0)


def test_shape_validation():
    cand = CandidateSet.from_source_spec(SPARSE, 6, 3, 2)
    with pytest.raises(ValueError):
        separate(np.zeros((2, 5)), np.zeros(2), cand)  # 5 columns vs n=6
    with pytest.raises(ValueError):
        separate(np.zeros((2, 6)), np.zeros(3), cand)


@pytest.mark.skipif(sep._compiled is None, reason="compiled kernel not built")
def test_backend_parity_on_random_instances():
    """Both kernels must agree on status, counters, and vectors."""
    spec = MixedSourceSpec(lam=0.5, rho1=0.35, rho2=0.35)
    for seed in range(20):
        rng_x, rng_a, rng_b = trial_streams(seed, 0, 0)
        n = 10
        src = sample_source(spec, n, rng_x)
        k = 4 + seed % 3
        A = build_A(k, n - src.ell, EnsembleA(), rng_a)
        B = build_B("normal", k, src.ell, rng_b)
        H = np.hstack([A, B])
        w = H @ src.x
        cand = CandidateSet.from_source_spec(spec, n, src.ell, 4)
        out_c = separate(H, w, cand, backend="c")
        out_p = separate(H, w, cand, backend="py")
        assert out_c.status == out_p.status
        assert out_c.patterns_examined == out_p.patterns_examined
        if out_c.x_hat is not None:
            assert np.allclose(out_c.x_hat, out_p.x_hat, atol=1e-10)
        for wc, wp in zip(out_c.witnesses, out_p.witnesses):
            assert np.allclose(wc, wp, atol=1e-8)
        assert math.isclose(out_c.residual, out_p.residual, abs_tol=1e-10)


@pytest.mark.parametrize("backend", BACKENDS)
def test_separation_is_deterministic(backend):
    n, k = 10, 5
    H, x, w = _planted_instance(n, k, [1, 6], seed=2)
    cand = CandidateSet.from_source_spec(SPARSE, n, 5, 3)
    a = separate(H, w, cand, backend=backend)
    b = separate(H, w, cand, backend=backend)
    assert a.status == b.status
    assert a.patterns_examined == b.patterns_examined
    assert np.array_equal(a.x_hat, b.x_hat)
    assert a.residual == b.residual
