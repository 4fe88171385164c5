"""Map evaluation enclosures, annulus certification, exact Blaschke spectrum.

High-precision oracles (mpmath at 60 digits) are evaluated independently of
the ball code and frozen into containment assertions: every sampled exact
image must land inside the returned ball.
"""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from speccert.ball import BallArithmeticError
from speccert.maps import (
    AnnulusCertificate,
    Blaschke,
    CertificationFailed,
    GeneralAnalytic,
    PerturbedDoubling,
    benchmark_blaschke,
    benchmark_perturbed_doubling,
    blaschke_exact_spectrum,
    blaschke_expansion_check,
    blaschke_fixed_point,
    certify_annulus,
    complex_exp_ball,
    monomial_map,
    suggest_parameters,
)
from speccert.maps import _expansion_sum_lower

mpmath.mp.dps = 60

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def _mp_blaschke(spec: Blaschke, z) -> mpmath.mpc:
    w = mpmath.mpc(spec.C)
    for a in spec.a:
        am = mpmath.mpc(a)
        w *= (z - am) / (1 - mpmath.conj(am) * z)
    return w


def _mp_pert(spec: PerturbedDoubling, z) -> mpmath.mpc:
    beta = mpmath.mpf(0.5) - mpmath.mpf(spec.b.numerator) / spec.b.denominator * mpmath.pi
    return mpmath.mpc(0, 1) * z * z * mpmath.exp(beta * (z - 1 / z))


def _contains(center, radius, mp_value, slack=1e-12) -> bool:
    """True exact-value membership in the ball, up to a microscopic
    comparison slack (the enclosure itself must do the real work)."""
    d = abs(mp_value - mpmath.mpc(complex(center)))
    return d <= mpmath.mpf(float(radius)) * (1 + mpmath.mpf(slack)) + mpmath.mpf(10) ** -280


def _sample_in_ball(rng, c, r, count):
    u = rng.random(count) * 0.999
    phi = rng.random(count) * TWO_PI
    return c + r * u * np.exp(1j * phi)


# ---------------------------------------------------------------------------
# evaluation enclosures
# ---------------------------------------------------------------------------

def test_blaschke_eval_encloses_exact_values():
    spec = benchmark_blaschke()
    rng = np.random.default_rng(7)
    centers = np.array([0.9 + 0.1j, 1.6, -1.4 + 0.3j, 0.7j, 0.55, -0.61 - 0.2j])
    radii = np.array([1e-12, 1e-9, 1e-6, 1e-4, 1e-3, 1e-2])
    oc, orr = spec.eval_ball(centers, radii)
    for j in range(len(centers)):
        for z in _sample_in_ball(rng, centers[j], radii[j], 40):
            assert _contains(oc[j], orr[j], _mp_blaschke(spec, mpmath.mpc(z)))


def test_perturbed_doubling_eval_encloses_exact_values():
    spec = benchmark_perturbed_doubling()
    rng = np.random.default_rng(8)
    centers = np.array([1.0 + 0.0j, 4.0, 0.25, -0.3 + 1.1j, 2.4 - 2.0j])
    radii = np.array([1e-10, 1e-7, 1e-5, 1e-3, 1e-2])
    oc, orr = spec.eval_ball(centers, radii)
    for j in range(len(centers)):
        for z in _sample_in_ball(rng, centers[j], radii[j], 40):
            assert _contains(oc[j], orr[j], _mp_pert(spec, mpmath.mpc(z)))


def test_deriv_enclosures_match_difference_quotients():
    # derivative balls must enclose the exact derivative (mpmath diff oracle)
    for spec, mp_fn in ((benchmark_blaschke(), _mp_blaschke),
                        (benchmark_perturbed_doubling(), _mp_pert)):
        pts = np.array([1.2 + 0.4j, 0.8 - 0.2j, -1.5 + 0.1j])
        dc, dr = spec.deriv_ball(pts, np.zeros(3))
        for j, z in enumerate(pts):
            exact = mpmath.diff(lambda w: mp_fn(spec, w), mpmath.mpc(z))
            assert _contains(dc[j], dr[j], exact, slack=1e-9)


def test_blaschke_deriv_usable_on_balls_containing_a_zero():
    spec = benchmark_blaschke()
    dc, dr = spec.deriv_ball(np.array([0.0 + 0.0j]), np.array([1e-3]))
    exact = mpmath.diff(lambda w: _mp_blaschke(spec, w), mpmath.mpc(5e-4 + 2e-4j))
    assert _contains(dc[0], dr[0], exact)


def test_complex_exp_ball_membership():
    rng = np.random.default_rng(11)
    c = (rng.standard_normal(120) + 1j * rng.standard_normal(120)) * 2.0
    r = 10.0 ** rng.uniform(-14, -1, 120)
    oc, orr = complex_exp_ball(c, r)
    for j in range(120):
        for z in _sample_in_ball(rng, c[j], r[j], 12):
            assert _contains(oc[j], orr[j], mpmath.exp(mpmath.mpc(z)))


def test_complex_exp_ball_rejects_huge_radius():
    with pytest.raises(BallArithmeticError):
        complex_exp_ball(np.array([0.0 + 0.0j]), np.array([0.7]))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=0.6, allow_nan=False,
                                allow_infinity=False), min_size=1, max_size=3),
    st.complex_numbers(min_magnitude=0.3, max_magnitude=2.5,
                       allow_nan=False, allow_infinity=False),
    st.floats(min_value=1e-12, max_value=1e-3),
    st.integers(min_value=0, max_value=10 ** 6),
)
def test_blaschke_eval_membership_property(zeros, center, radius, seed):
    spec = Blaschke(a=tuple(zeros), C=1.0)
    # keep the ball away from denominator zeros so inversion succeeds
    for a in spec.a:
        if a != 0 and abs(1.0 - np.conj(a) * center) < 0.2:
            return
    rng = np.random.default_rng(seed)
    oc, orr = spec.eval_ball(np.array([center]), np.array([radius]))
    for z in _sample_in_ball(rng, center, radius, 5):
        assert _contains(oc[0], orr[0], _mp_blaschke(spec, mpmath.mpc(z)))


# ---------------------------------------------------------------------------
# spec validation
# ---------------------------------------------------------------------------

def test_blaschke_rejects_bad_parameters():
    with pytest.raises(ValueError):
        Blaschke(a=(), C=1.0)
    with pytest.raises(ValueError):
        Blaschke(a=(0.5,), C=1.1)
    with pytest.raises(ValueError):
        Blaschke(a=(1.0,), C=1.0)


def test_perturbed_doubling_rejects_negative_parameter():
    with pytest.raises(ValueError):
        PerturbedDoubling(Fraction(-1, 4))


def test_perturbed_doubling_beta_ball():
    spec = benchmark_perturbed_doubling()
    beta = spec.beta
    exact = mpmath.mpf(0.5) - mpmath.mpf(23) / 256 * mpmath.pi
    assert _contains(beta.center, beta.radius, mpmath.mpc(exact))
    assert beta.radius < 1e-15


def test_general_analytic_without_derivative_raises():
    g = GeneralAnalytic(eval_ball_fn=lambda c, r: (c, r))
    with pytest.raises(NotImplementedError):
        g.deriv_ball(np.array([1.0 + 0j]), np.array([0.0]))
    with pytest.raises(NotImplementedError):
        g.eval_approx(np.array([1.0 + 0j]))


def test_monomial_map_validation_and_values():
    with pytest.raises(ValueError):
        monomial_map(1)
    dbl = monomial_map(2)
    c, r = dbl.eval_ball(np.array([2.0 + 0.0j]), np.array([0.0]))
    assert c[0] == 4.0 and r[0] <= 1e-14  # a-priori multiply inflation only
    dc, dr = dbl.deriv_ball(np.array([3.0 + 0.0j]), np.array([0.0]))
    assert dc[0] == 6.0 and dr[0] <= 1e-14


def test_fingerprint_distinguishes_maps():
    assert benchmark_blaschke().fingerprint() != benchmark_perturbed_doubling().fingerprint()
    assert monomial_map(2).fingerprint() != monomial_map(3).fingerprint()


# ---------------------------------------------------------------------------
# expansivity check
# ---------------------------------------------------------------------------

def test_expansion_check_benchmark():
    spec = benchmark_blaschke()
    lower = _expansion_sum_lower(spec)
    exact = sum((1 - abs(mpmath.mpc(a))) / (1 + abs(mpmath.mpc(a))) for a in spec.a)
    assert mpmath.mpf(lower) <= exact
    assert 1.30 < lower < 1.3070
    assert blaschke_expansion_check(spec)


def test_expansion_check_rejects_weakly_expanding():
    spec = Blaschke(a=(0.9, 0.9j), C=1.0)
    assert not blaschke_expansion_check(spec)


# ---------------------------------------------------------------------------
# fixed point and exact spectrum
# ---------------------------------------------------------------------------

def test_benchmark_fixed_point_is_exact_zero():
    spec = benchmark_blaschke()
    fp, mult = blaschke_fixed_point(spec)
    assert fp.center == 0.0 and fp.radius == 0.0
    assert mult.center == spec.a[1]     # T'(0) = C * (-a_2) = mu exactly
    assert mult.radius < 1e-13
    assert abs(abs(mult.center) ** 2 - 9.0 / 32.0) < 1e-15


def test_newton_fixed_point_certification():
    # shift the small zero off the origin: fixed point must be found and certified
    spec = Blaschke(a=(0.05 + 0.02j, benchmark_blaschke().a[1]), C=-1.0)
    fp, mult = blaschke_fixed_point(spec)
    assert fp.radius > 0
    zstar = mpmath.findroot(lambda w: _mp_blaschke(spec, w) - w, mpmath.mpc(0))
    assert _contains(fp.center, fp.radius, zstar)
    exact_mult = mpmath.diff(lambda w: _mp_blaschke(spec, w), zstar)
    assert _contains(mult.center, mult.radius, exact_mult, slack=1e-6)
    assert abs(mult.center) + mult.radius < 1.0


def test_exact_spectrum_powers():
    spec = benchmark_blaschke()
    mu = mpmath.mpc(spec.a[1])
    eigs = blaschke_exact_spectrum(spec, 4)
    assert eigs[0].center == 1.0 and eigs[0].radius == 0.0
    # order: 1, mu, conj(mu), mu^2, conj(mu)^2, ...
    assert len(eigs) == 9
    k = 1
    for n in range(1, 5):
        assert _contains(eigs[k].center, eigs[k].radius, mu ** n)
        assert _contains(eigs[k + 1].center, eigs[k + 1].radius, mpmath.conj(mu) ** n)
        k += 2
    moduli = [abs(e.center) for e in eigs]
    assert moduli == sorted(moduli, reverse=True)


def test_exact_spectrum_real_multiplier_deduplicates():
    spec = Blaschke(a=(0.0, 0.5), C=-1.0)    # mu = 0.5 real
    eigs = blaschke_exact_spectrum(spec, 3)
    assert [pytest.approx(abs(e.center)) for e in eigs] == [1.0, 0.5, 0.25, 0.125]


# ---------------------------------------------------------------------------
# annulus certification
# ---------------------------------------------------------------------------

def test_certify_annulus_doubling_basic():
    cert = certify_annulus(monomial_map(2), 0.1, 0.19, 1024)
    assert cert.certified
    assert cert.data["side_out"] == "above" and cert.data["side_in"] == "below"
    assert cert.data["winding_out"] == 2 and cert.data["winding_in"] == 2
    assert cert.zero_free and cert.data["zero_free_method"] == "known_zeros"
    # |T| is exactly e^{4 pi eta} on the outer circle: stats must bracket it
    exact = math.e ** (4.0 * math.pi * 0.1)
    assert cert.data["m_out"] <= exact <= cert.data["M_out"]
    assert cert.data["M_out"] - cert.data["m_out"] < 5e-2
    inner = math.e ** (-4.0 * math.pi * 0.1)
    assert cert.data["m_in"] <= inner <= cert.data["M_in"]


def test_certify_annulus_doubling_failure_carries_arc():
    # rho = 0.21 > 2 eta is impossible for z^2; failure must carry arc data
    with pytest.raises(CertificationFailed) as exc:
        certify_annulus(monomial_map(2), 0.1, 0.21, 64, max_subdivisions=256)
    e = exc.value
    assert e.subdivisions == 256
    assert e.arc_index is not None and e.lo is not None


def test_certify_annulus_parameter_validation():
    with pytest.raises(ValueError):
        certify_annulus(monomial_map(2), 0.2, 0.1, 64)
    with pytest.raises(ValueError):
        certify_annulus(monomial_map(2), -0.1, 0.2, 64)
    with pytest.raises(ValueError):
        certify_annulus(monomial_map(2), 0.1, 0.2, 2)


@pytest.mark.parametrize("rho", [0.12, 0.15, 0.199])
def test_certify_annulus_monotone_in_rho(rho):
    # anything below the achievable 2*eta works for the doubling map
    assert certify_annulus(monomial_map(2), 0.1, rho, 512).certified


def test_certify_annulus_blaschke_wide_annulus_hits_pole():
    # the analytic continuation has a pole at 1/conj(mu), |.| ~ 1.886;
    # parameters demanding an annulus out to e^{2 pi * 0.4915} ~ 21.9 must fail
    with pytest.raises(CertificationFailed) as exc:
        certify_annulus(benchmark_blaschke(), 0.49149149, 0.5, 64,
                        max_subdivisions=64)
    assert "pole" in str(exc.value)


def test_certify_annulus_blaschke_scaled_geometry():
    # same annulus geometry expressed in this package's e^{2 pi x} radii
    eta, rho = 0.49149149 / TWO_PI, 0.5 / TWO_PI
    cert = certify_annulus(benchmark_blaschke(), eta, rho, 4096,
                           max_subdivisions=1 << 14)
    assert cert.certified and cert.zero_free
    assert cert.data["side_out"] == "above" and cert.data["side_in"] == "below"


def test_certify_annulus_blaschke_desk_parameters():
    # near-extremal parameters: pole clears the outer circle by ~2e-5 relative
    cert = certify_annulus(benchmark_blaschke(), 0.10094, 0.1309, 1 << 14,
                           max_subdivisions=1 << 15)
    assert cert.certified and cert.zero_free
    assert min(cert.data["pole_margins"]) > 0


def test_certify_annulus_perturbed_doubling_moderate():
    cert = certify_annulus(benchmark_perturbed_doubling(), 0.22211055, 0.30,
                           4096, max_subdivisions=1 << 14)
    assert cert.certified and cert.zero_free
    assert cert.data["side_out"] == "above" and cert.data["side_in"] == "below"


def test_zero_freeness_winding_fallback():
    pd = benchmark_perturbed_doubling()
    ga = GeneralAnalytic(eval_ball_fn=pd.eval_ball, approx_fn=pd.eval_approx)
    cert = certify_annulus(ga, 0.22211055, 0.30, 4096, max_subdivisions=1 << 13)
    assert cert.data["zero_free_method"] == "winding"
    assert cert.data["winding_out"] == 2 == cert.data["winding_in"]
    assert cert.zero_free


def test_arc_image_balls_cover_whole_arcs():
    # for z^2 the exact image of the arc is known; dense samples must be inside
    from speccert.maps import _circle_image_balls
    n = 256
    ic, ir = _circle_image_balls(monomial_map(2), 0.1, n)
    R = math.e ** (TWO_PI * 0.1)
    for j in (0, 1, 97, 255):
        for t in np.linspace(0, 1, 23):
            theta = TWO_PI * (j + t) / n
            exact = mpmath.mpc(mpmath.mpf(R)) ** 2 * mpmath.exp(2j * mpmath.mpf(theta))
            # R itself is a float stand-in; recompute the exact radius instead
            exact = mpmath.exp(2 * (TWO_PI * mpmath.mpf("0.1"))) * mpmath.exp(
                mpmath.mpc(0, 2) * mpmath.mpf(theta))
            assert _contains(ic[j], ir[j], exact, slack=1e-9)


@pytest.mark.slow
def test_certify_annulus_perturbed_doubling_tight():
    """Tight avoidance parameters (relative margin ~7e-6) need ~2M arcs."""
    cert = certify_annulus(benchmark_perturbed_doubling(), 0.22211055, 0.312891,
                           1 << 21, max_subdivisions=1 << 21)
    assert cert.certified and cert.zero_free


# ---------------------------------------------------------------------------
# certificate plumbing and parameter suggestion
# ---------------------------------------------------------------------------

def test_certificate_alpha_attachment_and_roundtrip():
    cert = certify_annulus(monomial_map(2), 0.1, 0.19, 512)
    cert2 = cert.with_alpha(0.15)
    assert cert2.alpha == 0.15 and cert2.eta == cert.eta
    with pytest.raises(ValueError):
        cert.with_alpha(0.05)
    with pytest.raises(ValueError):
        cert.with_alpha(0.19)
    rt = AnnulusCertificate.from_json_dict(cert2.to_json_dict())
    assert rt == cert2


def test_uncertified_certificate_refuses():
    cert = AnnulusCertificate(eta=0.1, rho=0.2, certified=False)
    with pytest.raises(CertificationFailed):
        cert.require_certified()


def test_suggest_parameters_roundtrip_to_certification():
    spec = benchmark_blaschke()
    got = suggest_parameters(spec, [0.05, 0.07, 0.08, 0.09], samples=2048)
    assert got is not None
    eta, alpha, rho = got
    assert 0 < eta < alpha < rho
    cert = certify_annulus(spec, eta, rho, 4096, max_subdivisions=1 << 15)
    assert cert.certified


def test_suggest_parameters_empty_when_infeasible():
    # eta too large: annulus reaches past the pole, no rho is achievable
    spec = benchmark_blaschke()
    assert suggest_parameters(spec, [0.3, 0.5], samples=512) is None
