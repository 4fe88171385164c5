"""Certified approximate Schur factorization and resolvent transfer.

The floating Schur decomposition M ~ Z T Z* of the ball-matrix centers is
never trusted.  Instead the four defects

    ||M' - Z T Z*||,   ||I - Z Z*||,   ||Z|| - 1,   ||Z^{-1}|| - 1

are bounded rigorously over every member M', and their maximum epsilon feeds
two transfer results: a pointwise inequality turning resolvent bounds of the
triangular factor T into resolvent bounds of M', and a pseudospectrum gate
that converts a resolvent budget delta0 on enclosing curves into a certified
delta for which the delta-pseudospectrum of every member stays inside the
curves.

||Z|| is *not* bounded by the Perron estimate directly (that loses a sqrt(n)
factor on near-unitary matrices); it comes from ||Z||^2 = ||I - E_Z||
<= 1 + ||E_Z||, and ||Z^{-1}|| from Z^{-1} = Z^* (I - E_Z)^{-1} with a
Neumann-series bound, so epsilon stays at rounding scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from threadpoolctl import threadpool_limits

from . import _rounding as rd
from .ball import (
    BallArithmeticError,
    BallMatrix,
    BallScalar,
    ball_matmul,
    ball_sub,
    spectral_norm_upper,
)

__all__ = [
    "CertifiedSchur",
    "Delta0TooSmall",
    "EpsilonTooLarge",
    "GateFailed",
    "certify_schur",
    "eigenvalue_disks",
    "gate_threshold",
    "pseudospectrum_gate",
    "resolvent_transfer",
]


class EpsilonTooLarge(BallArithmeticError):
    """The factorization defect is too large for any transfer result."""


class GateFailed(BallArithmeticError):
    """The pointwise resolvent-transfer proviso 2e(1+e)^2 r max(1,|z|) < 1/2
    fails; the caller must shrink epsilon or move the contour."""


class Delta0TooSmall(BallArithmeticError):
    """delta0 sits below the certified admissibility threshold
    4e(e + C0(1+e)^2)(1+e)^2."""


@dataclass(frozen=True)
class CertifiedSchur:
    """Floating Schur pair (Z, T) with certified defect epsilon and ||T|| <= C0.

    Every member M' of the source ball satisfies ||M' - Z T Z*|| <= epsilon,
    ||I - Z Z*|| <= epsilon and ||Z||, ||Z^{-1}|| <= 1 + epsilon.  audit keeps
    the individual sub-bounds that epsilon is the max of.
    """

    Z: np.ndarray
    T: np.ndarray
    epsilon: float
    C0: float
    source: str
    audit: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.Z.shape != self.T.shape or self.Z.shape[0] != self.Z.shape[1]:
            raise ValueError("Z and T must be square with equal shape")
        if np.any(np.tril(self.T, -1) != 0):
            raise ValueError("T must have exact zeros below the diagonal")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.C0 < 1.0:
            raise ValueError("C0 must be >= 1")
        self.Z.flags.writeable = False
        self.T.flags.writeable = False

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    def one_plus_eps_sq_upper(self) -> float:
        op = rd.add_up(1.0, self.epsilon)
        return rd.mul_up(op, op)


def certify_schur(M: BallMatrix) -> CertifiedSchur:
    """Certify a Schur factorization of every member of the square ball M."""
    n, m = M.shape
    if n != m:
        raise BallArithmeticError("Schur certification expects a square matrix")
    if n == 0:
        raise BallArithmeticError("empty matrix")
    with threadpool_limits(limits=1):
        try:
            t_np, z_np = scipy.linalg.schur(M.centers, output="complex")
        except scipy.linalg.LinAlgError as exc:
            raise BallArithmeticError(
                f"floating Schur factorization did not converge: {exc}") from exc
    if not (np.all(np.isfinite(t_np)) and np.all(np.isfinite(z_np))):
        raise BallArithmeticError("floating Schur produced non-finite entries")
    t_np = np.triu(t_np)                       # exact zeros below the diagonal

    zb = BallMatrix.exact(z_np)
    tb = BallMatrix.exact(t_np)
    ident = BallMatrix.identity(n)

    e_m = spectral_norm_upper(
        ball_sub(M, ball_matmul(ball_matmul(zb, tb), zb.conj_transpose())))
    e_z = spectral_norm_upper(ball_sub(ident, ball_matmul(zb, zb.conj_transpose())))
    if e_z >= 1.0:
        raise EpsilonTooLarge(f"||I - Z Z*|| <= {e_z} >= 1: Z not provably invertible")

    norm_z = rd.sqrt_up(rd.add_up(1.0, e_z))
    gap = rd.sub_down(1.0, e_z)
    if gap <= 0.0:
        raise EpsilonTooLarge("1 - ||E_Z|| rounds to zero; Z not provably invertible")
    norm_z_inv = rd.div_up(norm_z, gap)

    epsilon = max(e_m, e_z, rd.sub_up(norm_z, 1.0), rd.sub_up(norm_z_inv, 1.0))
    epsilon = max(epsilon, 5e-324)             # keep strictly positive
    if epsilon >= 1.0:
        raise EpsilonTooLarge(f"certified defect {epsilon} >= 1; factorization unusable")

    c0_raw = spectral_norm_upper(tb)
    c0 = max(1.0, c0_raw)

    return CertifiedSchur(
        Z=z_np, T=t_np, epsilon=epsilon, C0=c0, source=M.digest(),
        audit={
            "e_m": e_m,
            "e_z": e_z,
            "norm_z": norm_z,
            "norm_z_inv": norm_z_inv,
            "c0_raw": c0_raw,
            "c0_clamped": c0_raw < 1.0,
        })


def resolvent_transfer(cs: CertifiedSchur, z: complex, r_t_bound: float) -> float:
    """Upper bound on ||(z - M')^{-1}|| for every member, from a certified
    bound r_t_bound on ||(z - T)^{-1}||."""
    if not (r_t_bound > 0.0 and np.isfinite(r_t_bound)):
        raise BallArithmeticError("triangular resolvent bound must be positive finite")
    sq = cs.one_plus_eps_sq_upper()
    core = rd.mul_up(rd.mul_up(rd.mul_up(2.0, cs.epsilon), sq), r_t_bound)
    zmag = max(1.0, rd.cabs_up(z.real, z.imag))
    if rd.mul_up(core, zmag) >= 0.5:
        raise GateFailed(
            f"2 eps (1+eps)^2 r max(1,|z|) = {rd.mul_up(core, zmag)} >= 1/2 "
            f"at z = {z}")
    num = rd.mul_up(rd.mul_up(2.0, sq), r_t_bound)
    den = rd.sub_down(1.0, core)
    return rd.div_up(num, den)


def gate_threshold(cs: CertifiedSchur) -> float:
    """Smallest admissible delta0 for `pseudospectrum_gate`:
    4 eps (eps + C0 (1+eps)^2) (1+eps)^2, rounded upward."""
    sq = cs.one_plus_eps_sq_upper()
    inner = rd.add_up(cs.epsilon, rd.mul_up(cs.C0, sq))
    return rd.mul_up(rd.mul_up(rd.mul_up(4.0, cs.epsilon), inner), sq)


def pseudospectrum_gate(cs: CertifiedSchur, delta0: float) -> float:
    """Largest certified delta for which: sigma(T) inside the disks plus
    r_T <= 1/delta0 on their boundaries forces sigma_delta(M') inside the
    disks for every member M'.  Returns delta = delta0 / (4 (1+eps)^2)."""
    if not (delta0 > 0.0 and np.isfinite(delta0)):
        raise BallArithmeticError("delta0 must be positive finite")
    sq = cs.one_plus_eps_sq_upper()
    threshold = gate_threshold(cs)
    if delta0 < threshold:
        raise Delta0TooSmall(
            f"delta0 = {delta0} below admissibility threshold {threshold}")
    return rd.div_down(delta0, rd.mul_up(4.0, sq))


def eigenvalue_disks(cs: CertifiedSchur) -> list[BallScalar]:
    """Diagonal of T as zero-radius balls: these are exactly sigma(T).

    No enclosure of sigma(M) is claimed here; containment for members is
    delivered only through pseudospectrum_gate plus contour certification.
    """
    return [BallScalar(complex(v), 0.0) for v in np.diagonal(cs.T)]
