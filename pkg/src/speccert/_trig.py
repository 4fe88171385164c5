"""Certified enclosures of cos/sin on the dyadic grid 2*pi*j/N.

The grid ratios j/N are exact doubles for power-of-two N, so the only
enclosure work is the transcendental step.  Each angle is first enclosed in
[theta_lo, theta_hi] through a directed pi, then cos/sin are evaluated with
directed rounding at both endpoints; since |cos'|, |sin'| <= 1, widening the
endpoint hull by the angle width covers any interior extremum.  Tables are
cached per N -- they are shared by the annulus certifier (boundary-circle
arcs) and the validated FFT (twiddle factors).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _rounding as rd
from ._rounding import U, scale_up

__all__ = ["trig_table", "unit_circle_balls", "circle_arc_anchors"]


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=16)
def trig_table(N: int):
    """(cos_lo, cos_hi, sin_lo, sin_hi) arrays enclosing cos/sin(2*pi*j/N), j = 0..N-1."""
    if not _is_pow2(N):
        raise ValueError("grid size must be a power of two")
    two_pi_lo = rd.mul_down(2.0, rd.pi_down())
    two_pi_hi = rd.mul_up(2.0, rd.pi_up())
    ratios = np.arange(N) / N          # exact dyadics
    th_lo = np.empty(N)
    th_hi = np.empty(N)
    for j, q in enumerate(ratios):
        th_lo[j] = rd.mul_down(two_pi_lo, q)
        th_hi[j] = rd.mul_up(two_pi_hi, q)
    width = th_hi - th_lo              # exact float subtraction of close values
    cos_lo = np.empty(N); cos_hi = np.empty(N)
    sin_lo = np.empty(N); sin_hi = np.empty(N)
    for j in range(N):
        a, b = th_lo[j], th_hi[j]
        ca_lo, ca_hi = rd.cos_enclosure(a)
        cb_lo, cb_hi = rd.cos_enclosure(b)
        sa_lo, sa_hi = rd.sin_enclosure(a)
        sb_lo, sb_hi = rd.sin_enclosure(b)
        w = width[j]
        cos_lo[j] = rd.sub_down(min(ca_lo, cb_lo), w)
        cos_hi[j] = rd.add_up(max(ca_hi, cb_hi), w)
        sin_lo[j] = rd.sub_down(min(sa_lo, sb_lo), w)
        sin_hi[j] = rd.add_up(max(sa_hi, sb_hi), w)
    for arr in (cos_lo, cos_hi, sin_lo, sin_hi):
        arr.flags.writeable = False
    return cos_lo, cos_hi, sin_lo, sin_hi


def unit_circle_balls(N: int):
    """(centers, radii) with ball j enclosing the exact point e^{2*pi*i*j/N}."""
    cos_lo, cos_hi, sin_lo, sin_hi = trig_table(N)
    cre = 0.5 * (cos_lo + cos_hi)
    cim = 0.5 * (sin_lo + sin_hi)
    hw_c = (cos_hi - cos_lo) * 0.5
    hw_s = (sin_hi - sin_lo) * 0.5
    # midpoint placement adds at most one rounding of the halving per component
    rad = (np.sqrt(hw_c * hw_c + hw_s * hw_s) * scale_up(4) + 2.0 * U) * scale_up(2)
    return cre + 1j * cim, rad


def circle_arc_anchors(N: int):
    """Ball anchors at arc midpoints (2j+1)/(2N) of the N-fold circle partition,
    plus a certified per-arc coverage radius for the arc [j/N, (j+1)/N] of the
    *unit* circle: every point of the closed sub-arc lies within ``cover`` of
    the anchor ball center.

    Anchors come from rotating the size-N table by a certified half-step
    e^{i*pi/N} (cheaper than building a 2N table).  The max distance from the
    angular midpoint to its sub-arc is 2 sin(pi/(2N)), attained at the
    endpoints; the anchor's own placement radius is added on top.

    Returns (anchor_centers, placement_radii, cover_radii).
    """
    base_c, base_r = unit_circle_balls(N)
    # enclose e^{i*pi/N}: angle interval [pi_down/N, pi_up/N] (1/N exact)
    a_lo = rd.mul_down(rd.pi_down(), 1.0 / N)
    a_hi = rd.mul_up(rd.pi_up(), 1.0 / N)
    w = rd.sub_up(a_hi, a_lo)
    c_lo, c_hi = rd.cos_enclosure(a_lo)
    c2_lo, c2_hi = rd.cos_enclosure(a_hi)
    s_lo, s_hi = rd.sin_enclosure(a_lo)
    s2_lo, s2_hi = rd.sin_enclosure(a_hi)
    hc_lo = rd.sub_down(min(c_lo, c2_lo), w)
    hc_hi = rd.add_up(max(c_hi, c2_hi), w)
    hs_lo = rd.sub_down(min(s_lo, s2_lo), w)
    hs_hi = rd.add_up(max(s_hi, s2_hi), w)
    half_c = complex(0.5 * (hc_lo + hc_hi), 0.5 * (hs_lo + hs_hi))
    half_r = rd.cabs_up(rd.sub_up(hc_hi, hc_lo), rd.sub_up(hs_hi, hs_lo)) * 0.6
    from .ball import _v_mul  # local import avoids a cycle at module load

    anchors, place = _v_mul(base_c, base_r, half_c, half_r)
    half_chord = rd.mul_up(2.0, rd.sin_enclosure(rd.div_up(rd.pi_up(), 2.0 * N))[1])
    cover = (place + half_chord) * scale_up(2)
    return anchors, place, cover
