"""Schur certification: defect bounds against extended-precision oracles,
resolvent transfer soundness, and the pseudospectrum admissibility gate."""

import math

import mpmath
import numpy as np
import pytest
import scipy.linalg

from speccert.ball import BallArithmeticError, BallMatrix
from speccert.schur import (
    CertifiedSchur,
    Delta0TooSmall,
    EpsilonTooLarge,
    GateFailed,
    certify_schur,
    eigenvalue_disks,
    pseudospectrum_gate,
    resolvent_transfer,
)
from speccert.svd import smallest_sv_lower


def _mp_spectral_norm(a, dps=40):
    with mpmath.workdps(dps):
        m = mpmath.matrix(a.shape[0], a.shape[1])
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                m[i, j] = mpmath.mpc(complex(a[i, j]))
        return max(mpmath.svd(m, compute_uv=False))


def _synthetic_cert(epsilon, c0, n=2):
    return CertifiedSchur(Z=np.eye(n, dtype=complex),
                          T=np.diag(np.linspace(0.1, 0.1 * n, n)).astype(complex),
                          epsilon=epsilon, C0=c0, source="synthetic")


def test_triangular_input_trivial():
    m = np.array([[1.0, 2.0, 3.0],
                  [0.0, 0.5, 1.0],
                  [0.0, 0.0, 0.25]], dtype=complex)
    cs = certify_schur(BallMatrix.exact(m))
    assert cs.epsilon < 1e-12
    assert np.allclose(cs.T, m, atol=1e-12)
    assert cs.source == BallMatrix.exact(m).digest()
    for key in ("e_m", "e_z", "norm_z", "norm_z_inv", "c0_raw", "c0_clamped"):
        assert key in cs.audit
    assert cs.epsilon == max(cs.audit["e_m"], cs.audit["e_z"],
                             cs.audit["norm_z"] - 1.0, cs.audit["norm_z_inv"] - 1.0)


def test_random_matrix_defect_with_member_oracle():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    rad = np.full((8, 8), 1e-14)
    cs = certify_schur(BallMatrix(m, rad))
    assert cs.epsilon <= 1e-10
    ztz = cs.Z @ cs.T @ cs.Z.conj().T
    for _ in range(20):
        pert = rng.uniform(-1, 1, (8, 8)) + 1j * rng.uniform(-1, 1, (8, 8))
        pert *= rad / np.maximum(np.abs(pert), 1.0)
        member = m + pert
        assert _mp_spectral_norm(member - ztz) <= cs.epsilon


def test_recertifying_reconstruction_is_idempotent():
    rng = np.random.default_rng(17)
    for n in (6, 24):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        cs = certify_schur(BallMatrix.exact(m))
        rebuilt = BallMatrix.exact(cs.Z @ cs.T @ cs.Z.conj().T)
        cs2 = certify_schur(rebuilt)
        assert cs2.epsilon <= 2.0 * cs.epsilon


def test_contractive_triangular_clamps_c0():
    cs = certify_schur(BallMatrix.exact(0.5 * np.eye(4, dtype=complex)))
    assert cs.C0 == 1.0
    assert cs.audit["c0_raw"] < 1.0
    assert cs.audit["c0_clamped"] is True


def test_huge_radii_epsilon_too_large():
    m = np.eye(4, dtype=complex)
    with pytest.raises(EpsilonTooLarge):
        certify_schur(BallMatrix(m, np.full((4, 4), 1.0)))


def test_companion_matrix_eigenvalues():
    m = np.array([[3.0, -2.0], [1.0, 0.0]], dtype=complex)  # (z-1)(z-2)
    cs = certify_schur(BallMatrix.exact(m))
    centers = sorted(b.center.real for b in eigenvalue_disks(cs))
    assert abs(centers[0] - 1.0) < 1e-10
    assert abs(centers[1] - 2.0) < 1e-10
    assert all(b.radius == 0.0 for b in eigenvalue_disks(cs))


def test_certificate_validation():
    bad_t = np.array([[1.0, 0.0], [0.5, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        CertifiedSchur(Z=np.eye(2, dtype=complex), T=bad_t,
                       epsilon=1e-10, C0=1.0, source="x")
    with pytest.raises(ValueError):
        _synthetic_cert(1.5, 1.0)
    with pytest.raises(ValueError):
        _synthetic_cert(1e-10, 0.5)
    with pytest.raises(BallArithmeticError):
        certify_schur(BallMatrix.exact(np.ones((2, 3), dtype=complex)))


def test_resolvent_transfer_epsilon_zero():
    cs = _synthetic_cert(0.0, 1.0)
    v = resolvent_transfer(cs, 2.0 + 0.0j, 123.5)
    assert v == pytest.approx(2.0 * 123.5, rel=1e-15)
    assert v >= 2.0 * 123.5


def test_resolvent_transfer_formula_oracle():
    eps, rt = 1e-10, 1e3
    cs = _synthetic_cert(eps, 1.0)
    v = resolvent_transfer(cs, 1.1 + 0.0j, rt)
    with mpmath.workdps(50):
        e = mpmath.mpf(eps)
        exact = 2 * (1 + e) ** 2 * rt / (1 - 2 * e * (1 + e) ** 2 * rt)
    assert exact <= v <= float(exact) * (1 + 1e-12)


def test_resolvent_transfer_gate_failed():
    cs = _synthetic_cert(1e-4, 1.0)
    with pytest.raises(GateFailed):
        resolvent_transfer(cs, 0.0j, 1e4)
    # |z| large enough to trip the gate even though 2 eps r < 1/2
    with pytest.raises(GateFailed):
        resolvent_transfer(cs, 2e3 + 0.0j, 1.3e3)
    with pytest.raises(BallArithmeticError):
        resolvent_transfer(cs, 0.0j, -1.0)


def test_pseudospectrum_gate_values():
    # vanishing-defect limit: delta -> delta0 / 4
    d = pseudospectrum_gate(_synthetic_cert(1e-300, 1.0), 1e-8)
    assert d == pytest.approx(2.5e-9, rel=1e-12)
    # reference evaluation: threshold 2e-9 clears delta0 = 1e-8
    d = pseudospectrum_gate(_synthetic_cert(1e-11, 50.0), 1e-8)
    assert d == pytest.approx(2.5e-9, rel=1e-9)
    # the same delta0 with epsilon one decade larger sits below the
    # admissibility threshold (~2e-8) and must be rejected
    with pytest.raises(Delta0TooSmall):
        pseudospectrum_gate(_synthetic_cert(1e-10, 50.0), 1e-8)
    with pytest.raises(BallArithmeticError):
        pseudospectrum_gate(_synthetic_cert(1e-11, 50.0), -1e-8)


def test_pseudospectrum_gate_never_exceeds_quarter():
    rng = np.random.default_rng(8)
    for _ in range(50):
        eps = 10.0 ** rng.uniform(-15, -2)
        c0 = 10.0 ** rng.uniform(0, 3)
        delta0 = 10.0 ** rng.uniform(-6, 2)
        cs = _synthetic_cert(eps, c0)
        try:
            d = pseudospectrum_gate(cs, delta0)
        except Delta0TooSmall:
            continue
        assert d <= delta0 / 4.0


def test_transfer_bounds_members_on_contour():
    """Sampled members M' and contour points z: the transferred bound always
    dominates the dense-SVD oracle resolvent norm of the member."""
    rng = np.random.default_rng(42)
    m = rng.standard_normal((10, 10)) * 0.3
    m = m.astype(complex)
    rad = np.full((10, 10), 1e-13)
    ball = BallMatrix(m, rad)
    cs = certify_schur(ball)
    n = 10
    eye = np.eye(n)
    checked = 0
    for k in range(40):
        z = 1.8 * np.exp(2j * np.pi * k / 40)   # circle enclosing sigma(M)
        shifted = BallMatrix.exact(z * eye - cs.T)
        r_t = 1.0 / smallest_sv_lower(shifted)
        bound = resolvent_transfer(cs, complex(z), r_t)
        for _ in range(13):
            pert = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
            pert *= rad / np.maximum(np.abs(pert), 1.0)
            member = m + pert
            oracle = 1.0 / np.linalg.svd(z * eye - member, compute_uv=False)[-1]
            assert oracle <= bound
            checked += 1
    assert checked >= 500


@pytest.fixture(scope="module")
def blaschke_128():
    # The boundary sup on the outer circle is ~7e4, so rows near -K carry
    # Laurent sups ~ exp(1430); the fft size must leave the aliasing tail
    # offset (N - 2K) * 2*pi*eta well beyond that or the radii blow up.
    from speccert.galerkin import fourier_matrix
    from speccert.maps import benchmark_blaschke, certify_annulus

    spec = benchmark_blaschke()
    ann = certify_annulus(spec, 0.10094, 0.1309, 1 << 14,
                          max_subdivisions=1 << 14).with_alpha(0.1259)
    op = fourier_matrix(spec, ann, 128, 4096)
    return op, certify_schur(op.matrix)


def test_blaschke_matrix_schur_eigenvalues(blaschke_128):
    from speccert.maps import benchmark_blaschke, blaschke_exact_spectrum

    _, cs = blaschke_128
    assert cs.epsilon < 1e-9
    diag = np.array([b.center for b in eigenvalue_disks(cs)])
    exact = [b.center for b in blaschke_exact_spectrum(benchmark_blaschke(), 1)]
    # 1, mu, mu-bar must each appear on the diagonal to 1e-6
    for target in exact:
        assert np.min(np.abs(diag - target)) < 1e-6


def test_blaschke_gate_passes_with_reference_budget(blaschke_128):
    """The certified defect leaves room for the reference delta budget
    (delta_inv = 2.99e13): delta0 chosen above both the admissibility
    threshold and 4(1+eps)^2 * delta."""
    _, cs = blaschke_128
    delta = 1.0 / 2.99e13
    sq = cs.one_plus_eps_sq_upper()
    inner = cs.epsilon + cs.C0 * sq
    threshold = 4.0 * cs.epsilon * inner * sq
    delta0 = max(threshold * 1.0000001, 4.0 * sq * delta)
    usable = pseudospectrum_gate(cs, delta0)
    assert usable >= delta
    # the contour target this implies stays far above the certified sups
    # of the reference run (max 3.93e6)
    assert 1.0 / delta0 > 1e8
