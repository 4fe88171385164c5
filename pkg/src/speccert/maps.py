"""Analytic expanding circle maps and certified annulus geometry.

A map spec packages three views of the same map T: a fast nonrigorous numpy
evaluator (plots, parameter search), a vectorized ball evaluator returning
certified enclosures of T over complex disks, and the same for T'.  On top of
the ball evaluator, `certify_annulus` proves the map-analyticity hypothesis
used by everything downstream: T extends analytically to the closed annulus
e^{-2*pi*eta} <= |z| <= e^{2*pi*eta} and pushes both boundary circles
strictly outside the smaller annulus with parameter rho > eta.  Radii are
written as e^{2*pi*x} throughout; all weighted-norm geometry in this package
uses that convention coherently.

The certificate also records certified min/max moduli of T on the boundary
circles and a zero-freeness verdict (via certified winding numbers); the
Fourier-coefficient tail bounds need both.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _rounding as rd
from ._rounding import U, scale_up
from ._trig import circle_arc_anchors
from .ball import (
    BallArithmeticError,
    BallScalar,
    _v_add,
    _v_inv,
    _v_mul,
    _v_scale,
    ball_abs_bounds,
    cabs_down,
    cabs_up,
)

__all__ = [
    "CircleMapSpec",
    "Blaschke",
    "PerturbedDoubling",
    "GeneralAnalytic",
    "monomial_map",
    "benchmark_blaschke",
    "benchmark_perturbed_doubling",
    "AnnulusCertificate",
    "CertificationFailed",
    "certify_annulus",
    "blaschke_expansion_check",
    "blaschke_fixed_point",
    "blaschke_exact_spectrum",
    "suggest_parameters",
    "complex_exp_ball",
]


class CertificationFailed(Exception):
    """An annulus (or fixed-point) certification attempt could not be closed.

    Carries the first offending arc so callers can see how close the attempt
    came; `certify_annulus` retries internally with doubled subdivisions
    before giving up.
    """

    def __init__(self, message, *, circle=None, arc_index=None, center=None,
                 radius=None, lo=None, hi=None, subdivisions=None):
        super().__init__(message)
        self.circle = circle
        self.arc_index = arc_index
        self.center = center
        self.radius = radius
        self.lo = lo
        self.hi = hi
        self.subdivisions = subdivisions


# ---------------------------------------------------------------------------
# certified complex exponential on ball arrays
# ---------------------------------------------------------------------------

def _exp_enclosure_arr(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = np.empty(x.shape)
    hi = np.empty(x.shape)
    flat = x.ravel()
    flo = lo.ravel()
    fhi = hi.ravel()
    for i, v in enumerate(flat):
        flo[i] = rd.exp_down(v)
        fhi[i] = rd.exp_up(v)
    return lo, hi


def _trig_enclosure_arr(y: np.ndarray):
    cl = np.empty(y.shape); ch = np.empty(y.shape)
    sl = np.empty(y.shape); sh = np.empty(y.shape)
    fy, fcl, fch, fsl, fsh = (a.ravel() for a in (y, cl, ch, sl, sh))
    for i, v in enumerate(fy):
        a, b = rd.cos_enclosure(v)
        fcl[i] = a; fch[i] = b
        a, b = rd.sin_enclosure(v)
        fsl[i] = a; fsh[i] = b
    return cl, ch, sl, sh


def _interval_product_hull(mlo, mhi, tlo, thi):
    """Hull of {m*t : m in [mlo,mhi], t in [tlo,thi]} from rounded-to-nearest
    endpoint products, padded by their own rounding error."""
    p1 = mlo * tlo; p2 = mlo * thi; p3 = mhi * tlo; p4 = mhi * thi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    pad = np.maximum(np.abs(lo), np.abs(hi)) * (4.0 * U)
    return lo - pad, hi + pad


def complex_exp_ball(c: np.ndarray, r: np.ndarray):
    """Certified enclosure of exp over complex balls (elementwise).

    The center's exponential is enclosed as e^x * (cos y + i sin y) with
    directed real transcendentals and an interval product hull; the input
    radius spreads by |e^c| (e^r - 1) <= |e^c| r/(1-r), valid for r < 1.
    """
    c = np.asarray(c, dtype=np.complex128)
    r = np.broadcast_to(np.asarray(r, dtype=np.float64), c.shape)
    if np.any(r >= 0.5):
        raise BallArithmeticError("exp of a ball with radius >= 1/2")
    ex_lo, ex_hi = _exp_enclosure_arr(np.ascontiguousarray(c.real))
    cl, ch, sl, sh = _trig_enclosure_arr(np.ascontiguousarray(c.imag))
    re_lo, re_hi = _interval_product_hull(ex_lo, ex_hi, cl, ch)
    im_lo, im_hi = _interval_product_hull(ex_lo, ex_hi, sl, sh)
    cc = 0.5 * (re_lo + re_hi) + 0.5j * (im_lo + im_hi)
    hw_r = 0.5 * (re_hi - re_lo)
    hw_i = 0.5 * (im_hi - im_lo)
    box = (np.sqrt(hw_r * hw_r + hw_i * hw_i) * scale_up(4) + cabs_up(cc) * (2.0 * U)) * scale_up(4)
    spread = ex_hi * (r / (1.0 - r)) * scale_up(6)
    return cc, (box + spread) * scale_up(2)


# ---------------------------------------------------------------------------
# map specs
# ---------------------------------------------------------------------------

class CircleMapSpec:
    """Interface shared by all map variants.

    eval_ball / deriv_ball take (centers, radii) arrays of complex disks and
    return certified (centers, radii) enclosures of the image disks;
    eval_approx is plain numpy with no enclosure claim.
    """

    def eval_ball(self, c, r):
        raise NotImplementedError

    def deriv_ball(self, c, r):
        raise NotImplementedError

    def eval_approx(self, z):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def pole_moduli(self) -> list[complex]:
        """Poles of the analytic continuation, if finitely many are known."""
        return []

    def known_zeros(self) -> list[complex] | None:
        """All zeros of the analytic continuation if known in closed form,
        else None (zero-freeness then falls back to winding numbers)."""
        return None

    def fingerprint(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cplx_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass(frozen=True)
class Blaschke(CircleMapSpec):
    """Finite Blaschke product T(z) = C * prod_i (z - a_i)/(1 - conj(a_i) z).

    The map is defined by the exact double-precision values of `a` and `C`;
    |C| must equal 1 to within 1e-12 (the tiny deviation is simply part of
    the map being certified, nothing is assumed about it).
    """

    a: tuple
    C: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        object.__setattr__(self, "C", complex(self.C))
        if not self.a:
            raise ValueError("need at least one zero")
        if abs(abs(self.C) - 1.0) > 1e-12:
            raise ValueError("front factor must be unimodular")
        if any(abs(v) >= 1.0 for v in self.a):
            raise ValueError("zeros must lie strictly inside the unit disk")

    def describe(self) -> dict:
        return {
            "type": "blaschke",
            "zeros": [_cplx_pair(v) for v in self.a],
            "front": _cplx_pair(self.C),
        }

    def pole_moduli(self) -> list[complex]:
        return [1.0 / np.conj(v) for v in self.a if v != 0]

    def known_zeros(self) -> list[complex] | None:
        return list(self.a)

    def eval_approx(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.full_like(z, self.C)
        for av in self.a:
            out = out * (z - av) / (1.0 - np.conj(av) * z)
        return out

    def eval_ball(self, c, r):
        c = np.asarray(c, dtype=np.complex128)
        r = np.broadcast_to(np.asarray(r, dtype=np.float64), c.shape)
        acc_c = np.full(c.shape, self.C, dtype=np.complex128)
        acc_r = np.zeros(c.shape)
        for av in self.a:
            nc, nr = _v_add(c, r, -av, 0.0)
            acc_c, acc_r = _v_mul(acc_c, acc_r, nc, nr)
            if av != 0:
                sc, sr = _v_scale(c, r, -np.conj(av))
                dc, dr = _v_add(sc, sr, 1.0 + 0.0j, 0.0)
                ic, ir = _v_inv(dc, dr)
                acc_c, acc_r = _v_mul(acc_c, acc_r, ic, ir)
        return acc_c, acc_r

    def _factor_balls(self, c, r):
        """Per-factor u_i and u_i' enclosures; u_i' = (1-|a_i|^2)/(1-conj(a_i)z)^2
        has no singularity at the zeros, so the product-rule derivative below
        stays usable on balls containing an a_i."""
        us, dus = [], []
        for av in self.a:
            nc, nr = _v_add(c, r, -av, 0.0)
            if av != 0:
                sc, sr = _v_scale(c, r, -np.conj(av))
                dc, dr = _v_add(sc, sr, 1.0 + 0.0j, 0.0)
                ic, ir = _v_inv(dc, dr)
                uc, ur = _v_mul(nc, nr, ic, ir)
                sq_c, sq_r = _v_mul(ic, ir, ic, ir)
                f_lo = rd.sub_down(1.0, rd.abs2_up(av.real, av.imag))
                f_hi = rd.sub_up(1.0, rd.abs2_down(av.real, av.imag))
                fc = 0.5 * (f_lo + f_hi)
                fr = rd.sub_up(f_hi, f_lo)
                duc, dur = _v_mul(sq_c, sq_r, fc + 0.0j, fr)
            else:
                uc, ur = nc, nr
                duc = np.ones(np.asarray(c).shape, dtype=np.complex128)
                dur = np.zeros(np.asarray(c).shape)
            us.append((uc, ur))
            dus.append((duc, dur))
        return us, dus

    def deriv_ball(self, c, r):
        c = np.asarray(c, dtype=np.complex128)
        r = np.broadcast_to(np.asarray(r, dtype=np.float64), c.shape)
        us, dus = self._factor_balls(c, r)
        tot_c = np.zeros(c.shape, dtype=np.complex128)
        tot_r = np.zeros(c.shape)
        for j in range(len(self.a)):
            tc, tr = dus[j]
            for i in range(len(self.a)):
                if i != j:
                    tc, tr = _v_mul(tc, tr, *us[i])
            tot_c, tot_r = _v_add(tot_c, tot_r, tc, tr)
        return _v_scale(tot_c, tot_r, self.C)


def _fraction_enclosure(q: Fraction) -> tuple[float, float, float]:
    """(center, lo, hi) floats bracketing the rational q."""
    c = float(q)
    lo = c if Fraction(c) <= q else rd.next_down(c)
    hi = c if Fraction(c) >= q else rd.next_up(c)
    return c, lo, hi


@dataclass(frozen=True)
class PerturbedDoubling(CircleMapSpec):
    """T(z) = i z^2 exp[(1/2 - b*pi)(z - 1/z)] for a rational parameter b >= 0.

    An analytic perturbation of the doubling map; the exponent coefficient
    beta = 1/2 - b*pi is carried as a certified ball.
    """

    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "b", Fraction(self.b))
        if self.b < 0:
            raise ValueError("parameter must be nonnegative")

    @property
    def beta(self) -> BallScalar:
        _, b_lo, b_hi = _fraction_enclosure(self.b)
        hi = rd.sub_up(0.5, rd.mul_down(b_lo, rd.pi_down()))
        lo = rd.sub_down(0.5, rd.mul_up(b_hi, rd.pi_up()))
        ctr = 0.5 * (lo + hi)
        rad = rd.mul_up(rd.sub_up(hi, lo), 0.75)
        return BallScalar(complex(ctr, 0.0), rad)

    def describe(self) -> dict:
        return {"type": "perturbed_doubling",
                "b": [self.b.numerator, self.b.denominator]}

    def known_zeros(self) -> list[complex] | None:
        # z^2 times a zero-free exponential factor
        return [0.0 + 0.0j]

    def eval_approx(self, z):
        z = np.asarray(z, dtype=np.complex128)
        beta = 0.5 - float(self.b) * math.pi
        return 1j * z * z * np.exp(beta * (z - 1.0 / z))

    def _common(self, c, r):
        c = np.asarray(c, dtype=np.complex128)
        r = np.broadcast_to(np.asarray(r, dtype=np.float64), c.shape)
        beta = self.beta
        zz_c, zz_r = _v_mul(c, r, c, r)
        iv_c, iv_r = _v_inv(c, r)
        s_c, s_r = _v_add(c, r, -iv_c, iv_r)
        w_c, w_r = _v_mul(s_c, s_r, beta.center, beta.radius)
        e_c, e_r = complex_exp_ball(w_c, w_r)
        t_c, t_r = _v_mul(zz_c, zz_r, e_c, e_r)
        t_c, t_r = _v_scale(t_c, t_r, 1j)
        return c, r, (iv_c, iv_r), (t_c, t_r), beta

    def eval_ball(self, c, r):
        _, _, _, t, _ = self._common(c, r)
        return t

    def deriv_ball(self, c, r):
        # T'/T = 2/z + beta (1 + 1/z^2); valid since T is zero-free off 0
        c, r, (iv_c, iv_r), (t_c, t_r), beta = self._common(c, r)
        i2_c, i2_r = _v_mul(iv_c, iv_r, iv_c, iv_r)
        p_c, p_r = _v_add(i2_c, i2_r, 1.0 + 0.0j, 0.0)
        p_c, p_r = _v_mul(p_c, p_r, beta.center, beta.radius)
        g_c, g_r = _v_scale(iv_c, iv_r, 2.0 + 0.0j)
        g_c, g_r = _v_add(g_c, g_r, p_c, p_r)
        return _v_mul(t_c, t_r, g_c, g_r)


@dataclass(frozen=True)
class GeneralAnalytic(CircleMapSpec):
    """Map given by user-supplied evaluators with enclosure semantics."""

    eval_ball_fn: Callable
    deriv_ball_fn: Callable | None = None
    approx_fn: Callable | None = None
    description: dict = field(default_factory=dict)
    poles: tuple = ()
    zeros: tuple | None = None

    def describe(self) -> dict:
        return {"type": "general", **self.description}

    def pole_moduli(self) -> list[complex]:
        return [complex(p) for p in self.poles]

    def known_zeros(self) -> list[complex] | None:
        return None if self.zeros is None else [complex(v) for v in self.zeros]

    def eval_ball(self, c, r):
        return self.eval_ball_fn(np.asarray(c, dtype=np.complex128),
                                 np.asarray(r, dtype=np.float64))

    def deriv_ball(self, c, r):
        if self.deriv_ball_fn is None:
            raise NotImplementedError("no derivative evaluator supplied")
        return self.deriv_ball_fn(np.asarray(c, dtype=np.complex128),
                                  np.asarray(r, dtype=np.float64))

    def eval_approx(self, z):
        if self.approx_fn is None:
            raise NotImplementedError("no approximate evaluator supplied")
        return self.approx_fn(np.asarray(z, dtype=np.complex128))


def monomial_map(degree: int, coefficient: complex = 1.0 + 0.0j) -> GeneralAnalytic:
    """T(z) = C z^d (the exact doubling map for d=2, C=1)."""
    if degree < 2:
        raise ValueError("degree must be at least 2")
    C = complex(coefficient)

    def ev(c, r):
        ac, ar = c, np.broadcast_to(r, c.shape)
        for _ in range(degree - 1):
            ac, ar = _v_mul(ac, ar, c, r)
        return _v_scale(ac, ar, C) if C != 1 else (ac, ar)

    def dv(c, r):
        ac = np.ones(c.shape, dtype=np.complex128)
        ar = np.zeros(c.shape)
        for _ in range(degree - 1):
            ac, ar = _v_mul(ac, ar, c, r)
        return _v_scale(ac, ar, degree * C)

    return GeneralAnalytic(
        eval_ball_fn=ev, deriv_ball_fn=dv,
        approx_fn=lambda z: C * z ** degree,
        description={"monomial_degree": degree, "coefficient": _cplx_pair(C)},
        zeros=(0.0 + 0.0j,),
    )


# ---------------------------------------------------------------------------
# expansivity and exact spectrum for Blaschke products
# ---------------------------------------------------------------------------

def blaschke_expansion_check(spec: Blaschke) -> bool:
    """Certified check of sum_i (1-|a_i|)/(1+|a_i|) > 1 (expansivity on the
    circle for the unimodular-front Blaschke family)."""
    return _expansion_sum_lower(spec) > 1.0


def _expansion_sum_lower(spec: Blaschke) -> float:
    total = 0.0
    for av in spec.a:
        m_hi = rd.cabs_up(av.real, av.imag)
        num = rd.sub_down(1.0, m_hi)
        den = rd.add_up(1.0, m_hi)
        total = rd.add_down(total, rd.div_down(num, den))
    return total


def blaschke_fixed_point(spec: Blaschke, *, max_iter: int = 60):
    """Certified attracting fixed point inside the unit disk.

    Returns (fixed_point_ball, multiplier_ball) with the multiplier mu = T'(z*)
    enclosed over the fixed-point ball.  If some zero a_i equals 0 the fixed
    point is exactly 0 and the returned ball has radius 0; otherwise a Newton
    refinement is verified a posteriori by the contraction T(D) subset D,
    sup|T'(D)| < 1 on a small disk D.
    """
    if any(v == 0 for v in spec.a):
        z0 = np.array([0.0 + 0.0j])
        zr = np.array([0.0])
    else:
        z = 0.0 + 0.0j
        for _ in range(max_iter):
            tz = complex(spec.eval_approx(np.array([z]))[0])
            dz = complex(spec.deriv_ball(np.array([z]), np.array([0.0]))[0][0])
            step = (tz - z) / (1.0 - dz)
            z = z + step
            if abs(step) < 1e-15:
                break
        z0 = np.array([z])
        zr = np.array([0.0])
        fc, fr = spec.eval_ball(z0, zr)
        defect = float((cabs_up(fc - z0) + fr)[0] * scale_up(2))
        dc, dr = spec.deriv_ball(z0, np.array([max(defect * 8.0, 4.0 * U)]))
        q = float((cabs_up(dc) + dr)[0] * scale_up(2))
        if q >= 0.9:
            raise CertificationFailed("fixed point is not strongly attracting")
        zr = np.array([rd.div_up(rd.mul_up(defect, 2.0), rd.sub_down(1.0, q))])
    # a-posteriori contraction check on the candidate ball
    fc, fr = spec.eval_ball(z0, zr)
    inside = (cabs_up(fc - z0) + fr) * scale_up(2) <= zr
    if zr[0] > 0 and not bool(inside[0]):
        raise CertificationFailed("fixed-point ball not invariant under the map")
    dc, dr = spec.deriv_ball(z0, zr)
    mult_hi = float((cabs_up(dc) + dr)[0] * scale_up(2))
    if zr[0] > 0 and mult_hi >= 1.0:
        raise CertificationFailed("fixed-point multiplier not certified < 1")
    return BallScalar(complex(z0[0]), float(zr[0])), BallScalar(complex(dc[0]), float(dr[0]))


def blaschke_exact_spectrum(spec: Blaschke, n_max: int) -> list[BallScalar]:
    """Known transfer-operator point spectrum on analytic functions:
    {1} together with the pairs mu^n, conj(mu)^n for 1 <= n <= n_max, where
    mu is the multiplier of the attracting fixed point.  Returned as certified
    balls, largest modulus first."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    _, mu = blaschke_fixed_point(spec)
    out = [BallScalar(1.0 + 0.0j, 0.0)]
    pc, pr = np.array([mu.center]), np.array([mu.radius])
    acc_c, acc_r = pc.copy(), pr.copy()
    for n in range(1, n_max + 1):
        if n > 1:
            acc_c, acc_r = _v_mul(acc_c, acc_r, pc, pr)
        lam = BallScalar(complex(acc_c[0]), float(acc_r[0]))
        out.append(lam)
        conj_lam = BallScalar(np.conj(lam.center), lam.radius)
        # the conjugate eigenvalue is distinct unless mu is (certifiably) real
        if abs(lam.center.imag) > lam.radius:
            out.append(conj_lam)
    return out


# ---------------------------------------------------------------------------
# annulus certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnulusCertificate:
    """Outcome of `certify_annulus`, plus the provenance needed downstream.

    eta fixes the domain annulus (radii e^{+-2*pi*eta}); rho > eta is the
    certified avoidance parameter; alpha is the intermediate interpolation
    parameter, attached later via `with_alpha`.  `data` carries certified
    boundary statistics: min/max moduli of T on each circle, winding numbers,
    and the zero-freeness verdict.
    """

    eta: float
    rho: float
    certified: bool
    alpha: float | None = None
    data: dict = field(default_factory=dict)

    def with_alpha(self, alpha: float) -> "AnnulusCertificate":
        if not (self.eta < alpha < self.rho):
            raise ValueError("alpha must lie strictly between eta and rho")
        return replace(self, alpha=alpha)

    def require_certified(self):
        if not self.certified:
            raise CertificationFailed("annulus certificate is not certified")

    @property
    def zero_free(self) -> bool:
        return bool(self.data.get("zero_free", False))

    def boundary_stats(self) -> dict:
        return {k: self.data[k] for k in ("m_out", "M_out", "m_in", "M_in")}

    def to_json_dict(self) -> dict:
        return {"eta": self.eta, "rho": self.rho, "alpha": self.alpha,
                "certified": self.certified, "data": self.data}

    @classmethod
    def from_json_dict(cls, d: dict) -> "AnnulusCertificate":
        return cls(eta=d["eta"], rho=d["rho"], certified=d["certified"],
                   alpha=d.get("alpha"), data=dict(d.get("data", {})))


def _interval_ball(lo: float, hi: float) -> tuple[float, float]:
    c = 0.5 * (lo + hi)
    return c, max(rd.sub_up(hi, c), rd.sub_up(c, lo)) * scale_up(1)


def _circle_image_balls(spec: CircleMapSpec, x: float, n: int, chunk: int = 1 << 17):
    """Enclosures of T over the n closed sub-arcs of the circle |z| = e^{2*pi*x}.

    Evaluation runs in chunks to keep temporaries bounded at large n."""
    anchors, _, cover = circle_arc_anchors(n)
    r_lo, r_hi = rd.exp_2pi_enclosure(x)
    rc, rr = _interval_ball(r_lo, r_hi)
    out_c = np.empty(n, dtype=np.complex128)
    out_r = np.empty(n)
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        zc, zr = _v_mul(anchors[s:e], cover[s:e], complex(rc, 0.0), rr)
        cc, cr = spec.eval_ball(zc, zr)
        out_c[s:e] = cc
        out_r[s:e] = cr
    return out_c, out_r


def _winding_number(ic: np.ndarray, ir: np.ndarray):
    """Certified winding number about 0 of the closed curve enclosed by the
    chain of arc-image balls, or None if the chain is too coarse.

    Every ball must avoid 0 and consecutive center-to-center turns must stay
    below pi/2; then the true curve is homotopic (inside the 0-free union of
    consecutive ball pairs) to the center polygon, whose winding is the
    rounded angle sum.  The 0.01 integrality tolerance dwarfs libm atan2
    slop by many orders of magnitude.
    """
    lo, _ = ball_abs_bounds(ic, ir)
    if np.any(lo <= 0.0):
        return None
    ang = np.angle(ic)
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = np.mod(d + math.pi, 2.0 * math.pi) - math.pi
    if np.any(np.abs(d) > 1.5):
        return None
    total = float(d.sum()) / (2.0 * math.pi)
    w = round(total)
    if abs(total - w) > 0.01:
        return None
    return int(w)


def certify_annulus(spec: CircleMapSpec, eta: float, rho: float,
                    subdivisions: int = 4096, *,
                    max_subdivisions: int = 2 ** 20) -> AnnulusCertificate:
    """Prove that T maps both circles |z| = e^{+-2*pi*eta} strictly outside
    the closed annulus e^{-2*pi*rho} <= |w| <= e^{2*pi*rho}.

    Each boundary circle is covered by closed-arc balls; every image ball
    must lie entirely above e^{2*pi*rho} or entirely below e^{-2*pi*rho} in
    modulus.  On failure the arc count doubles up to `max_subdivisions`.
    Known poles must avoid the closed domain annulus (checked first), and
    certified winding numbers of both image curves decide zero-freeness of T
    on the annulus via the argument principle.
    """
    if not (0.0 < eta < rho):
        raise ValueError("need 0 < eta < rho")
    if subdivisions < 4:
        raise ValueError("need at least 4 subdivisions")

    r_out_hi = rd.exp_2pi_enclosure(eta)[1]
    r_in_lo = rd.exp_2pi_enclosure(-eta)[0]
    pole_margins = []
    for p in spec.pole_moduli():
        p_lo = rd.cabs_down(p.real, p.imag)
        p_hi = rd.cabs_up(p.real, p.imag)
        if not (p_lo > r_out_hi or p_hi < r_in_lo):
            raise CertificationFailed(
                f"pole of modulus ~{p_hi:.6g} meets the closed annulus "
                f"[{r_in_lo:.6g}, {r_out_hi:.6g}]")
        pole_margins.append(min(abs(p_lo - r_out_hi), abs(p_hi - r_in_lo)))

    thr_above = rd.exp_2pi_enclosure(rho)[1]
    thr_below = rd.exp_2pi_enclosure(-rho)[0]

    n = subdivisions
    last_err = None
    while True:
        try:
            result = {"subdivisions": n}
            windings = {}
            for name, x in (("out", eta), ("in", -eta)):
                try:
                    ic, ir = _circle_image_balls(spec, x, n)
                except BallArithmeticError as exc:
                    raise CertificationFailed(
                        f"ball evaluation failed on the {name}er circle: {exc}",
                        circle=name, subdivisions=n)
                lo, hi = ball_abs_bounds(ic, ir)
                above = lo > thr_above
                below = hi < thr_below
                ok = above | below
                if not np.all(ok):
                    j = int(np.argmin(ok))
                    raise CertificationFailed(
                        f"arc {j}/{n} on the {name}er circle maps to modulus "
                        f"[{lo[j]:.6g}, {hi[j]:.6g}], not clear of "
                        f"[{thr_below:.6g}, {thr_above:.6g}]",
                        circle=name, arc_index=j, center=complex(ic[j]),
                        radius=float(ir[j]), lo=float(lo[j]), hi=float(hi[j]),
                        subdivisions=n)
                side = "above" if bool(above.all()) else (
                    "below" if bool(below.all()) else "mixed")
                result[f"side_{name}"] = side
                result[f"m_{name}"] = float(np.min(lo))
                result[f"M_{name}"] = float(np.max(hi))
                windings[name] = _winding_number(ic, ir)
            result["winding_out"] = windings["out"]
            result["winding_in"] = windings["in"]
            zeros = spec.known_zeros()
            if zeros is not None:
                # closed-form zeros: zero-free iff every one avoids the closed annulus
                clear = all(
                    rd.cabs_down(z0.real, z0.imag) > r_out_hi
                    or rd.cabs_up(z0.real, z0.imag) < r_in_lo
                    for z0 in (complex(v) for v in zeros))
                result["zero_free"] = clear
                result["zero_free_method"] = "known_zeros"
            else:
                # argument principle: equal boundary windings and no poles
                result["zero_free"] = (
                    windings["out"] is not None
                    and windings["out"] == windings["in"])
                result["zero_free_method"] = "winding"
            result["pole_margins"] = pole_margins
            result["map"] = spec.describe()
            return AnnulusCertificate(eta=eta, rho=rho, certified=True,
                                      data=result)
        except CertificationFailed as exc:
            last_err = exc
            if n >= max_subdivisions:
                raise last_err
            n *= 2


# ---------------------------------------------------------------------------
# benchmark map instances
# ---------------------------------------------------------------------------

def benchmark_blaschke() -> Blaschke:
    """Degree-2 Blaschke benchmark: zeros (0, mu) with |mu|^2 = 9/32,
    arg(mu) = pi/8, front factor -1.  The attracting fixed point sits exactly
    at 0 with multiplier mu, so the transfer-operator spectrum is known in
    closed form and everything downstream can be cross-checked against it."""
    mu = (3.0 / math.sqrt(32.0)) * complex(math.cos(math.pi / 8.0),
                                           math.sin(math.pi / 8.0))
    return Blaschke(a=(0.0, mu), C=-1.0 + 0.0j)


def benchmark_perturbed_doubling() -> PerturbedDoubling:
    """Perturbed doubling benchmark at b = 23/256."""
    return PerturbedDoubling(Fraction(23, 256))


# ---------------------------------------------------------------------------
# nonrigorous parameter search
# ---------------------------------------------------------------------------

def suggest_parameters(spec: CircleMapSpec, eta_values: Sequence[float], *,
                       samples: int = 4096, safety: float = 0.995):
    """Nonrigorous (eta, alpha, rho) suggestion for `certify_annulus`.

    For each trial eta the achievable rho is estimated by sampling |T| on the
    two boundary circles; the eta maximizing the gap rho - eta wins, rho is
    shrunk by `safety`, and alpha is placed midway.  Certification must still
    be run on the returned triple."""
    theta = 2.0 * np.pi * np.arange(samples) / samples
    unit = np.exp(1j * theta)
    pole_abs = [abs(p) for p in spec.pole_moduli()]
    best = None
    for eta in eta_values:
        r_out = math.e ** (2.0 * math.pi * eta)
        if any(1.0 / r_out <= p <= r_out for p in pole_abs):
            continue
        try:
            tv_out = np.abs(spec.eval_approx(math.e ** (2.0 * math.pi * eta) * unit))
            tv_in = np.abs(spec.eval_approx(math.e ** (-2.0 * math.pi * eta) * unit))
        except (FloatingPointError, ZeroDivisionError):
            continue
        if not (np.all(np.isfinite(tv_out)) and np.all(np.isfinite(tv_in))):
            continue
        cands = []
        for tv in (tv_out, tv_in):
            hi, lo = float(np.max(tv)), float(np.min(tv))
            r_above = math.log(lo) / (2.0 * math.pi) if lo > 0 else -math.inf
            r_below = -math.log(hi) / (2.0 * math.pi) if hi > 0 else -math.inf
            cands.append(max(r_above, r_below))
        rho_max = min(cands)
        gap = rho_max - eta
        if gap > 0 and (best is None or gap > best[0]):
            best = (gap, eta, rho_max)
    if best is None:
        return None
    _, eta, rho_max = best
    rho = eta + safety * (rho_max - eta)
    return eta, 0.5 * (eta + rho), rho
