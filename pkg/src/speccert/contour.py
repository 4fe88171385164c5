"""Certified resolvent sup-bounds on circles, and spectrum exclosure.

The core routine walks a work queue of dyadic arcs of a circle in the
complex plane.  For each arc it bounds sigma_min(z_anchor - T) from below
with the verified SVD, accepts the arc when the chord is at most half that
bound (so the first resolvent inequality covers the whole arc with the
local bound 2/sigma_min), and otherwise splits the arc in two.  Arc
endpoints are kept as exact dyadic fractions of a turn, so coverage of the
full circle is an exact bookkeeping fact, not a float comparison.

Soundness of the local bound: for z on the arc and z~ the anchor,

    sigma_min(z - T) >= sigma_min(z~ - T) - |z - z~|,

and |z - z~| is at most the anchor-to-endpoint chord plus the floating
placement error of the anchor itself.  Both are bounded above with directed
rounding and required to stay below sigma_lo/2, hence
1/sigma_min(z - T) <= 2/sigma_lo on the whole closed arc.

`exclosure` then assembles the subharmonicity argument at the matrix level:
all diagonal entries of the triangular factor strictly inside the disks,
and every circle's certified sup, transferred to the member matrices,
within the requested budget.  Together with the pseudospectrum gate this
certifies that the delta-pseudospectrum of every member matrix stays inside
the union of the disks.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import _rounding as rd
from .ball import BallArithmeticError, BallMatrix, BallScalar, ball_sub, spectral_norm_upper
from .schur import CertifiedSchur, resolvent_transfer
from .svd import OrthogonalityTooWeak, certify_svd

__all__ = [
    "Disk",
    "ArcCertificate",
    "ContourCertificate",
    "ExclosureCertificate",
    "UncertifiableArc",
    "ArcBudgetExceeded",
    "UnattainableTarget",
    "DisksOverlap",
    "DiagonalOutsideAllDisks",
    "BoundExceedsBudget",
    "MultiplicityAmbiguous",
    "certify_circle",
    "exclosure",
    "multiplicity_count",
]

log = logging.getLogger(__name__)

#: arcs are never split below this width (fraction of a full turn)
MIN_ARC_TURN = 2.0 ** -40
_MAX_LEVEL = 40


class UncertifiableArc(BallArithmeticError):
    """sigma_min could not be bounded away from 0 on a minimum-width arc."""


class ArcBudgetExceeded(BallArithmeticError):
    pass


class UnattainableTarget(BallArithmeticError):
    """The requested sup bound is provably out of reach on this circle."""


class DisksOverlap(BallArithmeticError):
    def __init__(self, i: int, j: int, msg: str):
        super().__init__(msg)
        self.indices = (i, j)


class DiagonalOutsideAllDisks(BallArithmeticError):
    def __init__(self, index: int, msg: str):
        super().__init__(msg)
        self.index = index


class BoundExceedsBudget(BallArithmeticError):
    def __init__(self, index: int, msg: str):
        super().__init__(msg)
        self.index = index


class MultiplicityAmbiguous(BallArithmeticError):
    pass


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    """Closed disk {z : |z - center| <= radius}."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (np.isfinite(self.center) and math.isfinite(self.radius)):
            raise ValueError("disk center and radius must be finite")
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")


def _interval_mid(lo: float, hi: float) -> tuple[float, float]:
    c = 0.5 * (lo + hi)
    return c, max(rd.sub_up(hi, c), rd.sub_up(c, lo))


def _cis_ball(frac: float) -> tuple[complex, float]:
    """Ball enclosing e^{2*pi*i*frac}; frac must be an exact dyadic in [0,1]."""
    th_lo = rd.mul_down(rd.mul_down(2.0, rd.pi_down()), frac)
    th_hi = rd.mul_up(rd.mul_up(2.0, rd.pi_up()), frac)
    w = rd.sub_up(th_hi, th_lo)
    ca_lo, ca_hi = rd.cos_enclosure(th_lo)
    cb_lo, cb_hi = rd.cos_enclosure(th_hi)
    sa_lo, sa_hi = rd.sin_enclosure(th_lo)
    sb_lo, sb_hi = rd.sin_enclosure(th_hi)
    # |cos'|, |sin'| <= 1: pad the endpoint hull by the angle width
    cc, cr = _interval_mid(rd.sub_down(min(ca_lo, cb_lo), w),
                           rd.add_up(max(ca_hi, cb_hi), w))
    sc, sr = _interval_mid(rd.sub_down(min(sa_lo, sb_lo), w),
                           rd.add_up(max(sa_hi, sb_hi), w))
    return complex(cc, sc), rd.cabs_up(cr, sr)


def _anchor_ball(disk: Disk, frac: float) -> tuple[complex, float]:
    """Floating anchor near disk.center + radius*e^{2*pi*i*frac}, plus a
    certified bound on its distance to the exact circle point."""
    cis_c, cis_r = _cis_ball(frac)
    ball = BallScalar(disk.center) + BallScalar(complex(disk.radius)) * BallScalar(cis_c, cis_r)
    return ball.center, ball.radius


def _sin_up(x: float) -> float:
    # monotone on [0, pi/2]; callers keep x there
    return rd.sin_enclosure(x)[1]


def _dist_ball(z: complex, c: complex) -> tuple[float, float]:
    """(lower, upper) bounds of |z - c| for exact floats z, c."""
    d = BallScalar(z) + BallScalar(-c)
    return d.abs_bounds()


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcCertificate:
    """One certified arc: resolvent norm <= local_bound on all of covered_arc.

    covered_arc is (lo, hi) in fractions of a turn measured from the positive
    real axis of the disk; both endpoints are exact dyadic doubles.
    """

    anchor: complex
    covered_arc: tuple[float, float]
    sigma_min_lower: float
    local_bound: float

    def __post_init__(self):
        lo, hi = self.covered_arc
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError("covered_arc must satisfy 0 <= lo < hi <= 1")
        if not (self.sigma_min_lower > 0 and math.isfinite(self.sigma_min_lower)):
            raise ValueError("sigma_min_lower must be positive and finite")
        if self.local_bound != rd.div_up(2.0, self.sigma_min_lower):
            raise ValueError("local_bound must be 2/sigma_min_lower rounded upward")

    @property
    def width(self) -> float:
        return self.covered_arc[1] - self.covered_arc[0]


@dataclass(frozen=True)
class ContourCertificate:
    """sup of the resolvent norm over a full boundary circle.

    The closed arcs chain with shared exact endpoints from turn 0 to turn 1,
    so their union is the entire circle; sup_bound is the max of the local
    bounds.  svd_calls counts actual verified-SVD evaluations (cache hits
    excluded).
    """

    disk: Disk
    sup_bound: float
    arcs: tuple[ArcCertificate, ...]
    svd_calls: int

    def __post_init__(self):
        if not self.arcs:
            raise ValueError("empty arc list")
        arcs = tuple(sorted(self.arcs, key=lambda a: a.covered_arc))
        object.__setattr__(self, "arcs", arcs)
        if arcs[0].covered_arc[0] != 0.0 or arcs[-1].covered_arc[1] != 1.0:
            raise ValueError("arcs do not span the full circle")
        for prev, nxt in zip(arcs, arcs[1:]):
            if nxt.covered_arc[0] > prev.covered_arc[1]:
                raise ValueError(
                    f"coverage gap between {prev.covered_arc} and {nxt.covered_arc}")
        if self.sup_bound != max(a.local_bound for a in arcs):
            raise ValueError("sup_bound must equal the max of the local bounds")
        if self.svd_calls < 0:
            raise ValueError("negative svd_calls")


@dataclass(frozen=True)
class ExclosureCertificate:
    """Every member matrix has its usable-delta pseudospectrum inside the disks.

    Built only when all checks pass: disks pairwise disjoint, every diagonal
    entry of the triangular factor strictly inside some disk, every contour
    sup transferred to the member matrices within 1/delta, and delta
    admissible for the pseudospectrum gate (usable_delta is the level the
    certificate actually asserts).
    """

    schur_source: str
    disks: tuple[Disk, ...]
    delta: float
    usable_delta: float
    transferred: tuple[float, ...]
    sup_bounds: tuple[float, ...]
    diagonal_disk: tuple[int, ...]

    def __bool__(self) -> bool:
        return True


# ---------------------------------------------------------------------------
# adaptive circle certification
# ---------------------------------------------------------------------------

def _resolve_triangular(T_cert) -> tuple[BallMatrix, float]:
    """Accept a CertifiedSchur or an upper-triangular BallMatrix; return the
    triangular ball and an upper bound on its spectral norm."""
    if isinstance(T_cert, CertifiedSchur):
        return BallMatrix.exact(T_cert.T), T_cert.C0
    if isinstance(T_cert, BallMatrix):
        if np.any(np.tril(T_cert.centers, -1) != 0) or np.any(np.tril(T_cert.radii, -1) != 0):
            raise ValueError("matrix must be upper triangular (exactly)")
        return T_cert, spectral_norm_upper(T_cert)
    raise TypeError("expected a CertifiedSchur or an upper-triangular BallMatrix")


def certify_circle(T_cert, disk: Disk, target: float, max_arcs: int = 1 << 16, *,
                   workers: int = 1, cache: dict | None = None,
                   initial_arcs: int = 16) -> ContourCertificate:
    """Certify sup_{|z-c|=R} ||(z - T)^{-1}||_2 <= target by adaptive arcs.

    Arcs are dyadic: level-L arc j covers turns [j/2^L, (j+1)/2^L].  An arc
    is accepted when its full chord and its anchor-coverage distance are both
    at most sigma_lo/2 and 2/sigma_lo is within target; otherwise it splits.
    The result is a deterministic function of (matrix, disk, target,
    initial_arcs) for any worker count.

    `cache` maps (matrix digest, anchor) -> (lower, upper) bounds of
    sigma_min; pass the same dict across calls to reuse SVD work when
    re-running with tighter targets.

    Unattainability is detected per arc, not only at the minimum width: any
    point z of an arc has sigma_min(z - T) <= sigma_hi + d_max, where
    sigma_hi is the certified upper bound at the anchor, so every sub-arc's
    local bound is at least 2/(sigma_hi + d_max).  Once that floor exceeds
    the target, no refinement of the arc can ever be accepted -- and since
    dyadic arcs intersect only through ancestors and descendants, the circle
    can then never be covered.
    """
    Tb, norm_upper = _resolve_triangular(T_cert)
    if not (target > 0 and math.isfinite(target)):
        raise ValueError("target must be positive and finite")
    if max_arcs < 1:
        raise ValueError("max_arcs must be positive")
    if workers < 1:
        raise ValueError("workers must be positive")
    if initial_arcs < 4:
        raise ValueError("need at least 4 initial arcs")

    # fail fast: on the circle sigma_min(z - T) <= |z| + ||T||, so no run can
    # ever certify a sup below 2/(|c| + R + ||T||)
    floor_den = rd.add_up(rd.add_up(rd.cabs_up(disk.center.real, disk.center.imag),
                                    disk.radius), norm_upper)
    floor = rd.div_down(2.0, floor_den)
    if target < floor:
        raise UnattainableTarget(
            f"target {target:.6g} is below the trivial resolvent floor "
            f"{floor:.6g} = 2/(|center|+radius+||T||) for this circle")

    if cache is None:
        cache = {}
    digest = Tb.digest()
    eye = np.eye(Tb.shape[0], dtype=np.complex128)

    level0 = max(2, (initial_arcs - 1).bit_length())
    frontier = [(level0, j) for j in range(1 << level0)]
    accepted: list[ArcCertificate] = []
    examined = 0
    svd_calls = 0

    def sigma_bounds(z: complex) -> tuple[float, float]:
        shifted = ball_sub(BallMatrix.exact(z * eye), Tb)
        try:
            sv = certify_svd(shifted)
        except OrthogonalityTooWeak:
            return 0.0, math.inf
        return max(0.0, sv.theta), min(hi for _, hi in sv.intervals)

    with threadpool_limits(limits=1):
        while frontier:
            examined += len(frontier)
            if examined > max_arcs:
                raise ArcBudgetExceeded(
                    f"Budget exceeded: examined {examined} arcs, max_arcs={max_arcs}")
            anchors = []
            for L, j in frontier:
                z, place = _anchor_ball(disk, math.ldexp(2 * j + 1, -(L + 1)))
                anchors.append((z, place))
            missing = [z for z, _ in anchors if (digest, z) not in cache]
            svd_calls += len(missing)
            if workers > 1 and len(missing) > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    sigmas = list(pool.map(sigma_bounds, missing))
            else:
                sigmas = [sigma_bounds(z) for z in missing]
            cache.update(((digest, z), s) for z, s in zip(missing, sigmas))

            children = []
            for (L, j), (z, place) in zip(frontier, anchors):
                sigma, sigma_hi = cache[(digest, z)]
                width = math.ldexp(1.0, -L)
                # full chord 2R sin(pi*width); anchor->endpoint 2R sin(pi*width/2)
                chord = rd.mul_up(rd.mul_up(2.0, disk.radius),
                                  _sin_up(rd.mul_up(rd.pi_up(), width)))
                d_max = rd.add_up(rd.mul_up(rd.mul_up(2.0, disk.radius),
                                            _sin_up(rd.mul_up(rd.pi_up(), 0.5 * width))),
                                  place)
                local = rd.div_up(2.0, sigma) if sigma > 0 else math.inf
                geom_ok = (sigma > 0
                           and rd.mul_up(2.0, chord) <= sigma
                           and rd.mul_up(2.0, d_max) <= sigma)
                if geom_ok and local <= target:
                    arc = ArcCertificate(anchor=z,
                                         covered_arc=(math.ldexp(j, -L),
                                                      math.ldexp(j + 1, -L)),
                                         sigma_min_lower=sigma, local_bound=local)
                    accepted.append(arc)
                    log.info("arc [%d/2^%d, %d/2^%d] anchor=%.17g%+.17gj "
                             "sigma>=%.6g accepted (bound %.6g)",
                             j, L, j + 1, L, z.real, z.imag, sigma, local)
                    continue
                sub_arc_floor = rd.div_down(2.0, rd.add_up(sigma_hi, d_max))
                if sub_arc_floor > target:
                    raise UnattainableTarget(
                        f"resolvent bound near anchor {z} provably exceeds the "
                        f"target {target:.6g}: every sub-arc bound is at least "
                        f"{sub_arc_floor:.6g} (sigma_min <= {sigma_hi:.6g} plus "
                        f"coverage distance {d_max:.3g})")
                if L >= _MAX_LEVEL:
                    if sigma <= 0:
                        raise UncertifiableArc(
                            f"sigma_min lower bound nonpositive at anchor {z} on a "
                            f"minimum-width arc; spectrum too close to the contour "
                            f"-- move or resize the disk")
                    if local > target:
                        raise UnattainableTarget(
                            f"local bound {local:.6g} exceeds target {target:.6g} "
                            f"on a minimum-width arc at anchor {z}")
                    raise UncertifiableArc(
                        f"chord condition unsatisfiable at minimum arc width near "
                        f"{z} (sigma_min lower bound {sigma:.3g})")
                log.info("arc [%d/2^%d, %d/2^%d] anchor=%.17g%+.17gj sigma>=%.6g "
                         "split", j, L, j + 1, L, z.real, z.imag, sigma)
                children.append((L + 1, 2 * j))
                children.append((L + 1, 2 * j + 1))
            frontier = children

    cert = ContourCertificate(disk=disk,
                              sup_bound=max(a.local_bound for a in accepted),
                              arcs=tuple(accepted), svd_calls=svd_calls)
    log.info("circle at %s radius %g: sup bound %.6g with %d arcs, %d SVD calls",
             disk.center, disk.radius, cert.sup_bound, len(cert.arcs), svd_calls)
    return cert


# ---------------------------------------------------------------------------
# exclosure and multiplicities
# ---------------------------------------------------------------------------

def _strictly_inside(z: complex, disk: Disk) -> bool:
    return _dist_ball(z, disk.center)[1] < disk.radius


def _possibly_inside(z: complex, disk: Disk) -> bool:
    return _dist_ball(z, disk.center)[0] <= disk.radius


def exclosure(schur: CertifiedSchur, disks: Sequence[Disk], delta: float,
              contours: Sequence[ContourCertificate]) -> ExclosureCertificate:
    """Certify that the usable-delta pseudospectrum of every member matrix is
    contained in the union of the disks.

    Checks, in order: pairwise disjointness of the closed disks (outward
    rounding), strict containment of every diagonal entry of the triangular
    factor in some disk, and for each disk that the contour sup transferred
    by `resolvent_transfer` stays within 1/delta.  `delta` is then fed to the
    pseudospectrum gate; the returned certificate records the usable level.
    """
    from .schur import pseudospectrum_gate

    if not isinstance(schur, CertifiedSchur):
        raise TypeError("expected a CertifiedSchur")
    disks = list(disks)
    contours = list(contours)
    if not disks or len(disks) != len(contours):
        raise ValueError("need one contour certificate per disk")
    for i, (d, ct) in enumerate(zip(disks, contours)):
        if ct.disk != d:
            raise ValueError(f"contour {i} was certified for {ct.disk}, not {d}")
    if not (delta > 0 and math.isfinite(delta)):
        raise ValueError("delta must be positive and finite")

    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            lo = _dist_ball(disks[i].center, disks[j].center)[0]
            if lo <= rd.add_up(disks[i].radius, disks[j].radius):
                raise DisksOverlap(i, j,
                                   f"closed disks {i} and {j} are not certifiably "
                                   f"disjoint (|c{i}-c{j}| >= {lo:.6g} vs radii sum "
                                   f"{disks[i].radius + disks[j].radius:.6g})")

    assignment = []
    for idx, t in enumerate(np.diag(schur.T)):
        homes = [i for i, d in enumerate(disks) if _strictly_inside(complex(t), d)]
        if not homes:
            raise DiagonalOutsideAllDisks(
                idx, f"diagonal entry {idx} = {complex(t):.17g} lies strictly "
                     f"inside no disk")
        assignment.append(homes[0])

    inv_floor = rd.div_down(1.0, delta)
    transferred = []
    for i, (d, ct) in enumerate(zip(disks, contours)):
        # the transfer bound is nondecreasing in |z|, so the extreme modulus
        # point of the circle gives a uniform bound
        zmag = rd.add_up(rd.cabs_up(d.center.real, d.center.imag), d.radius)
        bound = resolvent_transfer(schur, complex(zmag), ct.sup_bound)
        if bound > inv_floor:
            raise BoundExceedsBudget(
                i, f"disk {i}: transferred resolvent bound {bound:.6g} exceeds "
                   f"1/delta >= {inv_floor:.6g}")
        transferred.append(bound)

    usable = pseudospectrum_gate(schur, delta)
    return ExclosureCertificate(schur_source=schur.source, disks=tuple(disks),
                                delta=delta, usable_delta=usable,
                                transferred=tuple(transferred),
                                sup_bounds=tuple(ct.sup_bound for ct in contours),
                                diagonal_disk=tuple(assignment))


def multiplicity_count(schur: CertifiedSchur, disk: Disk) -> int:
    """Number of diagonal entries of the triangular factor strictly inside
    the disk.  Entries that cannot be certified strictly inside or strictly
    outside raise; callers must already hold an exclosure certificate for a
    disk family containing this disk for the count to mean anything."""
    count = 0
    for idx, t in enumerate(np.diag(schur.T)):
        z = complex(t)
        if _strictly_inside(z, disk):
            count += 1
        elif _possibly_inside(z, disk):
            raise MultiplicityAmbiguous(
                f"diagonal entry {idx} = {z:.17g} is within rounding distance of "
                f"the boundary of the disk at {disk.center}")
    return count
