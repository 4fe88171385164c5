"""Rigorous Fourier discretization of the transfer operator.

The matrix entry at (khat, jhat), both in [-K, K], is the Fourier integral
(1/2pi) int e^{i*jhat*theta} T(e^{i*theta})^{-khat} d(theta), obtained for a
whole row at once by a validated FFT of ball samples of T^{-khat} on the
2^m-point grid.  Sampling a trigonometric-polynomial approximation instead of
the true integrand aliases frequencies shifted by multiples of the grid size;
that error is bounded through Laurent-coefficient tails driven by the
certified min/max of |T| on the annulus boundary (from the annulus
certificate) and folded into the entry radii.  A decay-envelope invariant
cross-checks every entry against e^{2*pi*eta|jhat|} e^{-2*pi*rho|khat|}; a
violation indicates an indexing/convention bug, hence a hard error.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _rounding as rd
from ._rounding import scale_up
from ._trig import unit_circle_balls
from .ball import (
    BallArithmeticError,
    BallMatrix,
    _v_add,
    _v_inv,
    _v_mul,
    cabs_up,
    dump_ballmatrix,
    load_ballmatrix,
)
from .maps import AnnulusCertificate, CircleMapSpec

__all__ = [
    "GalerkinOperator",
    "DecayViolation",
    "validated_fft",
    "fourier_coefficients",
    "fourier_matrix",
]

_MAGIC = b"GALOP1\n"


class DecayViolation(RuntimeError):
    """A matrix entry exceeds its analyticity-decay envelope."""

    def __init__(self, message, khat=None, jhat=None, value=None, bound=None):
        super().__init__(message)
        self.khat = khat
        self.jhat = jhat
        self.value = value
        self.bound = bound


# ---------------------------------------------------------------------------
# validated FFT
# ---------------------------------------------------------------------------

def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


@lru_cache(maxsize=8)
def _fft_twiddles(N: int):
    """Ball enclosures of e^{-2*pi*i*m/N} for m = 0..N/2-1."""
    uc, ur = unit_circle_balls(N)
    wc = np.conj(uc[: N // 2])
    wr = ur[: N // 2].copy()
    wc.flags.writeable = False
    wr.flags.writeable = False
    return wc, wr


def validated_fft(c: np.ndarray, r: np.ndarray):
    """Unscaled forward DFT sum_l g[l] e^{-2*pi*i*l*m/N} over ball samples.

    Iterative radix-2 decimation in time with ball butterflies; every output
    ball encloses the exact DFT of every member sample sequence.
    """
    c = np.asarray(c, dtype=np.complex128)
    r = np.broadcast_to(np.asarray(r, dtype=np.float64), c.shape)
    N = c.shape[-1]
    if N < 2 or N & (N - 1):
        raise ValueError("FFT length must be a power of two, at least 2")
    rev = _bit_reverse_permutation(N)
    cc = np.ascontiguousarray(c[..., rev])
    rr = np.ascontiguousarray(r[..., rev])
    wc_full, wr_full = _fft_twiddles(N)
    L = 1
    while L < N:
        stride = N // (2 * L)
        wc = wc_full[::stride][:L]
        wr = wr_full[::stride][:L]
        vc = cc.reshape(-1, 2 * L)
        vr = rr.reshape(-1, 2 * L)
        ac, ar = vc[:, :L], vr[:, :L]
        bc, br = vc[:, L:], vr[:, L:]
        tc, tr = _v_mul(bc, br, wc[None, :], wr[None, :])
        na_c, na_r = _v_add(ac, ar, tc, tr)
        nb_c, nb_r = _v_add(ac, ar, -tc, tr)
        vc[:, :L] = na_c
        vr[:, :L] = na_r
        vc[:, L:] = nb_c
        vr[:, L:] = nb_r
        L *= 2
    return cc, rr


def fourier_coefficients(c: np.ndarray, r: np.ndarray):
    """DFT scaled by 1/N: ball estimates of the Fourier coefficients of the
    trigonometric interpolant (aliasing is the caller's business)."""
    fc, fr = validated_fft(c, r)
    N = np.float64(c.shape[-1])
    return fc / N, (fr / N) * scale_up(1)


# ---------------------------------------------------------------------------
# aliasing tails
# ---------------------------------------------------------------------------

def _row_log_sups(khat: int, stats: dict) -> tuple[float, float]:
    """Directed upper bounds of log sup |T^{-khat}| on the outer and inner
    boundary circles, from the certified min/max moduli of T."""
    if khat > 0:
        lo_out = rd.log_down(stats["m_out"])
        lo_in = rd.log_down(stats["m_in"])
        return rd.mul_up(float(-khat), lo_out), rd.mul_up(float(-khat), lo_in)
    if khat < 0:
        hi_out = rd.log_up(stats["M_out"])
        hi_in = rd.log_up(stats["M_in"])
        return rd.mul_up(float(-khat), hi_out), rd.mul_up(float(-khat), hi_in)
    return 0.0, 0.0


def _alias_bounds_for_row(khat: int, K: int, N: int, eta: float, stats: dict) -> np.ndarray:
    """Upper bounds for the aliasing error of each column of row khat.

    The bin for column jhat collects Laurent coefficients c_{-jhat+s*N};
    positive-index aliases are bounded on the outer circle, negative-index on
    the inner one, each summed as a certified geometric series.
    """
    if khat == 0:
        return np.zeros(2 * K + 1)
    tpe_dn = rd.mul_down(rd.mul_down(2.0, rd.pi_down()), eta)
    # shared denominators 1 - e^{-2*pi*eta*N} from below
    den = rd.sub_down(1.0, rd.exp_up(rd.mul_up(float(-N), tpe_dn)))
    if den <= 0.0:
        raise BallArithmeticError("degenerate aliasing denominator")
    log_out, log_in = _row_log_sups(khat, stats)
    out = np.empty(2 * K + 1)
    for col, jhat in enumerate(range(-K, K + 1)):
        b = -jhat
        a_pos = rd.exp_up(rd.add_up(log_out, rd.mul_up(float(-(b + N)), tpe_dn)))
        a_neg = rd.exp_up(rd.add_up(log_in, rd.mul_up(float(-(N - b)), tpe_dn)))
        out[col] = rd.add_up(rd.div_up(a_pos, den), rd.div_up(a_neg, den))
    return out


# ---------------------------------------------------------------------------
# operator container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GalerkinOperator:
    """Certified truncated transfer-operator matrix plus its provenance."""

    K: int
    fft_size: int
    matrix: BallMatrix
    aliasing_bound: float
    annulus: AnnulusCertificate
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return 2 * self.K + 1

    def save(self, path) -> None:
        header = {
            "K": self.K,
            "fft_size": self.fft_size,
            "aliasing_bound": self.aliasing_bound,
            "annulus": self.annulus.to_json_dict(),
            "meta": self.meta,
        }
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(json.dumps(header, sort_keys=True,
                               separators=(",", ":")).encode() + b"\n")
            dump_ballmatrix(self.matrix, f)

    @classmethod
    def load(cls, path) -> "GalerkinOperator":
        with open(path, "rb") as f:
            if f.read(len(_MAGIC)) != _MAGIC:
                raise ValueError("not a Galerkin operator archive")
            header = json.loads(f.readline().decode())
            matrix = load_ballmatrix(f)
        return cls(K=header["K"], fft_size=header["fft_size"], matrix=matrix,
                   aliasing_bound=header["aliasing_bound"],
                   annulus=AnnulusCertificate.from_json_dict(header["annulus"]),
                   meta=header["meta"])


# ---------------------------------------------------------------------------
# matrix assembly
# ---------------------------------------------------------------------------

def _check_decay(centers, radii, K, eta, rho, slack):
    ks = np.arange(-K, K + 1)
    env = np.exp(2.0 * np.pi * eta * np.abs(ks))[None, :] * \
        np.exp(-2.0 * np.pi * rho * np.abs(ks))[:, None]
    mags = cabs_up(centers)
    bound = slack * env * 1.0000001 + 8.0 * radii
    bad = mags > bound
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DecayViolation(
            f"entry ({i - K},{j - K}) has |value| {mags[i, j]:.3e} above its "
            f"envelope bound {bound[i, j]:.3e}; suspect an indexing bug",
            khat=int(i - K), jhat=int(j - K),
            value=float(mags[i, j]), bound=float(bound[i, j]))


def fourier_matrix(spec: CircleMapSpec, annulus: AnnulusCertificate, K: int,
                   fft_size: int, *, decay_slack: float = 8.0,
                   chunk: int = 1 << 17) -> GalerkinOperator:
    """Assemble the certified (2K+1) x (2K+1) transfer matrix.

    Requires a certified annulus; rows with khat > 0 invert T on the grid and
    therefore also require the certificate's zero-freeness verdict.  Entry
    radii include FFT rounding and the aliasing tails.
    """
    annulus.require_certified()
    if K < 0:
        raise ValueError("K must be nonnegative")
    N = fft_size
    if N < 2 or N & (N - 1):
        raise ValueError("fft_size must be a power of two")
    if N < 4 * (2 * K + 1):
        raise ValueError("fft_size must be at least 4*(2K+1)")
    if K >= 1 and not annulus.zero_free:
        raise BallArithmeticError(
            "rows with khat > 0 need certified zero-freeness of the map "
            "on the annulus")

    uc, ur = unit_circle_balls(N)
    tc = np.empty(N, dtype=np.complex128)
    tr = np.empty(N)
    for s in range(0, N, chunk):
        e = min(s + chunk, N)
        cc, cr = spec.eval_ball(uc[s:e], ur[s:e])
        tc[s:e] = cc
        tr[s:e] = cr
    try:
        ic, ir = (_v_inv(tc, tr) if K >= 1 else (None, None))
    except BallArithmeticError as exc:
        raise BallArithmeticError(
            f"T ball contains 0 on the unit grid ({exc}); increase fft_size "
            "or subdivisions") from exc

    n = 2 * K + 1
    centers = np.zeros((n, n), dtype=np.complex128)
    radii = np.zeros((n, n))
    cols = np.arange(-K, K + 1)
    bins = (-cols) % N
    stats = annulus.boundary_stats() if K >= 1 else None

    def fill_row(khat, gc, gr):
        fc, fr = fourier_coefficients(gc, gr)
        row = khat + K
        centers[row, :] = fc[bins]
        rr = fr[bins]
        if khat != 0:
            rr = (rr + _alias_bounds_for_row(khat, K, N, annulus.eta, stats)) \
                * scale_up(2)
        radii[row, :] = rr

    # khat = 0: the integrand is constant 1 and has no aliasing error
    fill_row(0, np.ones(N, dtype=np.complex128), np.zeros(N))
    pc, pr = (np.ones(N, dtype=np.complex128), np.zeros(N))
    qc, qr = (np.ones(N, dtype=np.complex128), np.zeros(N))
    for k in range(1, K + 1):
        pc, pr = _v_mul(pc, pr, ic, ir)      # T^{-k} samples
        fill_row(k, pc, pr)
        qc, qr = _v_mul(qc, qr, tc, tr)      # T^{+k} samples
        fill_row(-k, qc, qr)

    alias_max = 0.0
    if K >= 1:
        alias_max = max(float(np.max(_alias_bounds_for_row(k, K, N, annulus.eta, stats)))
                        for k in (K, -K))

    if annulus.data.get("side_out") == "above" and \
            annulus.data.get("side_in") == "below":
        _check_decay(centers, radii, K, annulus.eta, annulus.rho, decay_slack)
        envelope_checked = True
    else:
        envelope_checked = False

    matrix = BallMatrix(centers, radii)
    meta = {
        "map": spec.describe(),
        "map_fingerprint": spec.fingerprint(),
        "envelope_checked": envelope_checked,
        "decay_slack": decay_slack,
    }
    return GalerkinOperator(K=K, fft_size=N, matrix=matrix,
                            aliasing_bound=alias_max, annulus=annulus,
                            meta=meta)
