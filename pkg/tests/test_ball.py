"""Inclusion-property tests for ball arithmetic.

Monte Carlo member sampling uses 80-bit extended precision (np.longdouble)
for the oracle products, whose residual error is ~2^-64 per flop -- three
orders of magnitude below the certified radii, so a containment failure
can only come from a genuine soundness bug.
"""

import io

import mpmath
import numpy as np
import pytest

from speccert.ball import (
    BallArithmeticError,
    BallMatrix,
    BallScalar,
    BallVector,
    _buffer_roundtrip,
    ball_add,
    ball_matmul,
    ball_sub,
    cabs_up,
    dump_ballmatrix,
    l1_col_norm_upper,
    l1_norm_from_l2,
    load_ballmatrix,
    spectral_norm_upper,
)

mpmath.mp.dps = 60
rng = np.random.default_rng(20240811)


def random_ball(n, m, scale=1.0, rad=None):
    c = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) * scale
    if rad is None:
        r = rng.uniform(0, 1e-6, (n, m)) * scale
    else:
        r = np.full((n, m), rad)
    return BallMatrix(c, r)


def sample_member(A: BallMatrix) -> np.ndarray:
    """A uniformly-random member matrix, biased to include boundary points."""
    n, m = A.shape
    phase = np.exp(2j * np.pi * rng.random((n, m)))
    mag = np.where(rng.random((n, m)) < 0.3, 1.0, np.sqrt(rng.random((n, m))))
    # pull strictly inside by a hair so float placement error cannot escape the disk
    return A.centers + A.radii * (0.999999 * mag) * phase


def _contains_ld(ball: BallMatrix, exact_re, exact_im, oracle_err) -> bool:
    dre = np.asarray(exact_re - ball.centers.real, dtype=np.float64)
    dim = np.asarray(exact_im - ball.centers.imag, dtype=np.float64)
    dist = np.sqrt(dre * dre + dim * dim)
    return bool(np.all(dist <= ball.radii + oracle_err + 1e-300))


# ---------------------------------------------------------------------------
# addition
# ---------------------------------------------------------------------------

def test_add_zero_ball_with_small_inflation():
    A = random_ball(4, 4)
    Z = BallMatrix(np.zeros((4, 4), dtype=complex))
    S = ball_add(A, Z)
    assert np.array_equal(S.centers, A.centers)
    assert np.all(S.radii <= A.radii * (1 + 1e-14))
    assert np.all(S.radii >= A.radii)


def test_add_exact_integers_zero_radii():
    A = BallMatrix(np.array([[1, 2], [3, 4]], dtype=complex))
    B = BallMatrix(np.array([[10, 20], [30, 40]], dtype=complex))
    S = ball_add(A, B)
    assert np.array_equal(S.centers, np.array([[11, 22], [33, 44]], dtype=complex))
    assert np.all(S.radii == 0.0)


def test_add_monte_carlo_inclusion():
    for shape in [(2, 3), (8, 8), (17, 5)]:
        A = random_ball(*shape)
        B = random_ball(*shape)
        S = ball_add(A, B)
        for _ in range(300):
            a = sample_member(A).astype(np.clongdouble)
            b = sample_member(B).astype(np.clongdouble)
            e = a + b
            assert _contains_ld(S, e.real, e.imag, 1e-17)


def test_sub_monte_carlo_inclusion():
    A = random_ball(6, 6)
    B = random_ball(6, 6)
    S = ball_sub(A, B)
    for _ in range(200):
        e = sample_member(A).astype(np.clongdouble) - sample_member(B).astype(np.clongdouble)
        assert _contains_ld(S, e.real, e.imag, 1e-17)


def test_shape_mismatch_raises():
    with pytest.raises(BallArithmeticError):
        ball_add(random_ball(2, 2), random_ball(2, 3))
    with pytest.raises(BallArithmeticError):
        ball_matmul(random_ball(2, 3), random_ball(2, 3))


def test_non_finite_rejected():
    with pytest.raises(BallArithmeticError):
        BallMatrix(np.array([[np.inf + 0j]]))
    with pytest.raises(BallArithmeticError):
        BallMatrix(np.array([[0j]]), np.array([[np.nan]]))
    with pytest.raises(BallArithmeticError):
        BallMatrix(np.array([[0j]]), np.array([[-1.0]]))


# ---------------------------------------------------------------------------
# matmul
# ---------------------------------------------------------------------------

def test_matmul_identity_case():
    A = random_ball(5, 5)
    I = BallMatrix.identity(5)
    P = ball_matmul(I, A)
    assert np.allclose(P.centers, A.centers, rtol=0, atol=0)
    slack = np.abs(A.centers) * 1e-13 + 1e-300
    assert np.all(P.radii <= A.radii * (1 + 1e-12) + slack)


def test_matmul_small_integers():
    A = BallMatrix(np.array([[1, 2], [3, 4]], dtype=complex))
    B = BallMatrix(np.array([[5, 6], [7, 8]], dtype=complex))
    P = ball_matmul(A, B)
    assert np.array_equal(P.centers, np.array([[19, 22], [43, 50]], dtype=complex))
    assert np.all(P.radii <= 1e-12)


def test_matmul_monte_carlo_inclusion():
    for shape in [(3, 4, 2), (16, 16, 16), (7, 9, 11)]:
        n, k, m = shape
        A = random_ball(n, k)
        B = random_ball(k, m)
        P = ball_matmul(A, B)
        for _ in range(120):
            a = sample_member(A).astype(np.clongdouble)
            b = sample_member(B).astype(np.clongdouble)
            e = a @ b
            # longdouble oracle residual ~ k * 2^-64 * (|A||B|)
            err = float(np.max(np.abs(A.centers) @ np.abs(B.centers) + 1.0)) * k * 2.0 ** -63
            assert _contains_ld(P, e.real, e.imag, err)


def test_matmul_exact_oracle_small():
    A = random_ball(3, 3, rad=1e-8)
    B = random_ball(3, 3, rad=1e-8)
    P = ball_matmul(A, B)
    for _ in range(25):
        a, b = sample_member(A), sample_member(B)
        am = mpmath.matrix([[mpmath.mpc(x) for x in row] for row in a])
        bm = mpmath.matrix([[mpmath.mpc(x) for x in row] for row in b])
        em = am * bm
        for i in range(3):
            for j in range(3):
                d = abs(em[i, j] - mpmath.mpc(P.centers[i, j]))
                assert d <= mpmath.mpf(P.radii[i, j])


def test_matmul_deterministic_bytes():
    A = random_ball(40, 40)
    B = random_ball(40, 40)
    P1 = ball_matmul(A, B)
    P2 = ball_matmul(A, B)
    assert P1.centers.tobytes() == P2.centers.tobytes()
    assert P1.radii.tobytes() == P2.radii.tobytes()


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def test_perron_identity():
    b = spectral_norm_upper(BallMatrix.identity(6))
    assert 1.0 <= b <= 1.0 + 1e-12


def test_perron_diagonal_tight():
    A = BallMatrix(np.diag([1.0, 2.0, 3.0]).astype(complex))
    b = spectral_norm_upper(A)
    assert 3.0 <= b <= 3.0 + 1e-12


def test_perron_all_ones():
    A = BallMatrix(np.ones((2, 2), dtype=complex))
    b = spectral_norm_upper(A)
    assert 2.0 <= b <= 2.0 + 1e-12


def test_perron_dominates_oracle_norm():
    for n in (2, 5, 12, 20):
        A = random_ball(n, n, scale=3.0)
        oracle = np.linalg.norm(A.centers, 2)
        assert spectral_norm_upper(A) >= oracle * (1 - 1e-12)
        # a near-Perron weight still dominates and is usually sharper
        babs = np.abs(A.centers) + A.radii
        v = np.maximum(np.linalg.svd(babs)[2][0], 1e-3)
        v = np.abs(np.linalg.svd(babs)[2][0]) + 1e-6
        assert spectral_norm_upper(A, v) >= oracle * (1 - 1e-12)


def test_perron_rejects_bad_weight():
    with pytest.raises(BallArithmeticError):
        spectral_norm_upper(BallMatrix.identity(3), np.array([1.0, 0.0, 1.0]))


def test_l1_from_l2_values():
    assert l1_norm_from_l2(1.0, 1) == 1.0
    assert abs(l1_norm_from_l2(2.0, 4) - 4.0) <= 4e-16
    with pytest.raises(BallArithmeticError):
        l1_norm_from_l2(-1.0, 3)


def test_l1_column_convention_vs_l2():
    for _ in range(20):
        A = random_ball(5, 5, scale=2.0, rad=0.0)
        col = l1_col_norm_upper(A)
        # fixed convention: max over columns of sum of moduli down the column
        direct = float(np.max(np.sum(np.abs(A.centers), axis=0)))
        assert col >= direct * (1 - 1e-13)
        assert direct <= l1_norm_from_l2(spectral_norm_upper(A), 5) * (1 + 1e-13)


# ---------------------------------------------------------------------------
# scalars, vectors, persistence
# ---------------------------------------------------------------------------

def test_scalar_ops_contain_samples():
    a = BallScalar(1.5 - 0.5j, 1e-3)
    b = BallScalar(-0.25 + 2j, 1e-4)
    s, p = a + b, a * b
    inv = b.inverse()
    for _ in range(400):
        xa = a.center + a.radius * 0.999 * np.exp(2j * np.pi * rng.random())
        xb = b.center + b.radius * 0.999 * np.exp(2j * np.pi * rng.random())
        assert s.contains(xa + xb)
        assert p.contains(xa * xb)
        assert inv.contains(1.0 / xb)


def test_scalar_inverse_of_zero_ball_fails():
    with pytest.raises(BallArithmeticError):
        BallScalar(1e-6 + 0j, 1e-3).inverse()


def test_scalar_abs_bounds():
    b = BallScalar(3 + 4j, 0.5)
    lo, hi = b.abs_bounds()
    assert lo <= 4.5 and hi >= 5.5
    assert hi - 5.5 <= 1e-14 and 4.5 - lo <= 1e-14


def test_vector_scalar_roundtrip():
    v = BallVector(np.array([1 + 1j, 2.0, 3j]), np.array([0.0, 0.1, 0.2]))
    back = BallVector.from_scalars(v.to_scalars())
    assert np.array_equal(back.centers, v.centers)
    assert np.array_equal(back.radii, v.radii)


def test_dump_load_bit_identical(tmp_path):
    A = random_ball(9, 5)
    B = _buffer_roundtrip(A)
    assert A.centers.tobytes() == B.centers.tobytes()
    assert A.radii.tobytes() == B.radii.tobytes()
    p = tmp_path / "m.ball"
    dump_ballmatrix(A, p)
    C = load_ballmatrix(p)
    assert A.centers.tobytes() == C.centers.tobytes()
    # identical dumps are byte-identical (no timestamps in the format)
    buf1, buf2 = io.BytesIO(), io.BytesIO()
    dump_ballmatrix(A, buf1)
    dump_ballmatrix(A, buf2)
    assert buf1.getvalue() == buf2.getvalue()


def test_cabs_up_is_upper_bound():
    z = (rng.standard_normal(1000) + 1j * rng.standard_normal(1000)) * 10.0 ** rng.integers(-100, 100, 1000)
    hi = cabs_up(z)
    assert np.all(hi >= np.abs(z))
