import numpy as np
import pytest

from analogsep.measure import (
    EnsembleA,
    MeasurementSystem,
    RankDeficiencyError,
    build_A,
    build_B,
    load_matrix_csv,
    measure,
    numerical_rank,
    sample_ball_uniform,
    save_matrix_csv,
)
from analogsep.sources import MixedSourceSpec, sample_source


def test_build_A_normal():
    rng = np.random.default_rng(0)
    A = build_A(3, 5, EnsembleA(), rng)
    assert A.shape == (3, 5)
    B = build_A(3, 5, EnsembleA(), np.random.default_rng(0))
    assert np.array_equal(A, B)


def test_build_A_ball_rows_stay_inside_radius():
    rng = np.random.default_rng(7)
    A = build_A(50, 4, EnsembleA("ball", r=0.5), rng)
    norms = np.linalg.norm(A, axis=1)
    assert np.all(norms <= 0.5 + 1e-12)
    assert norms.max() > 0.3  # mass concentrates near the shell


def test_build_A_degenerate_sizes():
    rng = np.random.default_rng(1)
    assert build_A(0, 4, EnsembleA(), rng).shape == (0, 4)
    assert build_A(3, 0, EnsembleA(), rng).shape == (3, 0)


def test_sample_ball_uniform_radius_and_determinism():
    a = sample_ball_uniform(3, 2.0, np.random.default_rng(5))
    b = sample_ball_uniform(3, 2.0, np.random.default_rng(5))
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) <= 2.0


def test_build_B_identity_layout():
    B = build_B("identity", 5, 3, None)
    assert B.shape == (5, 3)
    assert np.array_equal(B[:3], np.eye(3))
    assert np.all(B[3:] == 0.0)
    with pytest.raises(ValueError):
        build_B("identity", 2, 3, None)  # needs k >= ell


def test_build_B_normal_certifies_rank():
    B = build_B("normal", 4, 6, np.random.default_rng(2))
    assert B.shape == (4, 6)
    assert numerical_rank(B, 1e-10) == 4


def test_build_B_user_payload_certification():
    good = np.eye(3)
    assert np.array_equal(build_B("user", 3, 3, good), good)
    bad = np.zeros((3, 3))
    with pytest.raises(RankDeficiencyError):
        build_B("user", 3, 3, bad)
    with pytest.raises(ValueError):
        build_B("user", 3, 3, np.eye(4))


def _system(A, B, **kw):
    k, m = A.shape
    ell = B.shape[1]
    return MeasurementSystem(A=A, B=B, ensembleA=EnsembleA(), kindB="normal",
                             k=k, n=m + ell, ell=ell, **kw)


def test_measurement_system_certifies_and_measures():
    rng = np.random.default_rng(9)
    A = build_A(4, 6, EnsembleA(), rng)
    B = build_B("normal", 4, 2, rng)
    sys = _system(A, B)
    assert sys.H.shape == (4, 8)
    spec = MixedSourceSpec(lam=0.25, rho1=0.5, rho2=0.5)
    src = sample_source(spec, 8, np.random.default_rng(3))
    w = measure(sys, src)
    assert np.allclose(w, A @ src.y + B @ src.z)
    assert np.array_equal(w, measure(sys, src.x))
    with pytest.raises(ValueError):
        measure(sys, np.zeros(9))


def test_measurement_system_rejects_rank_deficient_B():
    with pytest.raises(RankDeficiencyError):
        _system(np.eye(3), np.zeros((3, 2)))


def test_measurement_system_rejects_shape_mismatch():
    B = np.vstack([np.eye(2), np.zeros((1, 2))])
    with pytest.raises(ValueError, match="wrong shape"):
        MeasurementSystem(A=np.eye(3), B=B, ensembleA=EnsembleA(), kindB="user",
                          k=3, n=6, ell=2)  # A should be 3 x 4


def test_numerical_rank():
    assert numerical_rank(np.zeros((3, 3)), 1e-10) == 0
    assert numerical_rank(np.zeros((0, 3)), 1e-10) == 0
    assert numerical_rank(np.eye(4), 1e-10) == 4
    M = np.diag([1.0, 1e-14])
    assert numerical_rank(M, 1e-10) == 1
    with pytest.raises(ValueError):
        numerical_rank(np.eye(2), 0.0)


def test_matrix_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    M = rng.standard_normal((3, 5))
    path = tmp_path / "m.csv"
    save_matrix_csv(path, M)
    header = path.read_text().splitlines()[0]
    assert header == "3,5"
    back = load_matrix_csv(path)
    assert np.array_equal(M, back)  # repr round trip is exact


@pytest.mark.parametrize("shape", [(0, 4), (3, 0), (0, 0)])
def test_matrix_csv_empty_shapes(tmp_path, shape):
    path = tmp_path / "e.csv"
    save_matrix_csv(path, np.zeros(shape))
    back = load_matrix_csv(path)
    assert back.shape == shape
