"""Certified singular-value enclosures from an approximate floating SVD.

A nonrigorous SVD of the ball-matrix centers supplies candidate singular
bases U, V.  Their defect from exact orthogonality and the residue of
U* B V around its real diagonal are then bounded with ball arithmetic,
which converts the approximate decomposition into two-sided enclosures of
the true singular values of *every* member matrix.  The smallest certified
lower bound theta yields ``||B'^{-1}|| <= 1/theta`` whenever it is positive,
which is how resolvent norms get bounded at individual contour points.

The enclosures hold up to an unknown index permutation; no ordering is
certified.  Reports that want to attach an interval to "the i-th singular
value" must use :func:`nearest_value_match`, which is a heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
from threadpoolctl import threadpool_limits

from . import _rounding as rd
from .ball import (
    BallArithmeticError,
    BallMatrix,
    ball_matmul,
    ball_sub,
    spectral_norm_upper,
)

__all__ = [
    "OrthogonalityTooWeak",
    "SVDCertificate",
    "ThetaNonpositive",
    "certify_svd",
    "nearest_value_match",
    "smallest_sv_lower",
]


class OrthogonalityTooWeak(BallArithmeticError):
    """The candidate singular bases are too far from unitary to certify."""


class ThetaNonpositive(BallArithmeticError):
    """No positive lower bound on the smallest singular value; the matrix may
    be singular and the evaluation point must be treated as uncertifiable."""


@dataclass(frozen=True)
class SVDCertificate:
    """Two-sided singular-value enclosures, valid up to index permutation.

    ``intervals[i]`` does *not* claim to enclose the i-th largest singular
    value; only the multiset containment and ``theta`` (the minimum of all
    lower bounds) are certified.
    """

    intervals: tuple[tuple[float, float], ...]
    theta: float
    alpha_u: float
    beta_v: float
    e_sigma: float

    def __post_init__(self):
        if not (0.0 <= self.alpha_u < 1.0 and 0.0 <= self.beta_v < 1.0):
            raise ValueError("orthogonality defects must lie in [0, 1)")
        if self.e_sigma < 0.0:
            raise ValueError("off-diagonal norm bound must be nonnegative")
        for lo, hi in self.intervals:
            if not lo <= hi:
                raise ValueError("empty singular-value interval")
        if self.intervals and self.theta != min(lo for lo, _ in self.intervals):
            raise ValueError("theta must be the smallest interval lower bound")

    @property
    def n(self) -> int:
        return len(self.intervals)

    def inverse_norm_upper(self) -> float:
        """Certified bound on ||B'^{-1}|| for every member, or raise."""
        if self.theta <= 0.0:
            raise ThetaNonpositive(
                f"smallest singular-value lower bound {self.theta} is not positive")
        return rd.div_up(1.0, self.theta)


def _enclosure_intervals(D, e_sigma, alpha, beta):
    """Per-index enclosures [(D_i -+ e_sigma) / sqrt((1 +- a)(1 +- b))]."""
    den_plus_up = rd.sqrt_up(rd.mul_up(rd.add_up(1.0, alpha), rd.add_up(1.0, beta)))
    den_plus_dn = rd.sqrt_down(rd.mul_down(rd.add_down(1.0, alpha),
                                           rd.add_down(1.0, beta)))
    one_m_a = rd.sub_down(1.0, alpha)
    one_m_b = rd.sub_down(1.0, beta)
    if one_m_a <= 0.0 or one_m_b <= 0.0:
        raise OrthogonalityTooWeak(
            f"orthogonality defects alpha={alpha}, beta={beta} leave no room "
            "below 1 after rounding")
    den_minus_dn = rd.sqrt_down(rd.mul_down(one_m_a, one_m_b))
    den_minus_up = rd.sqrt_up(rd.mul_up(rd.sub_up(1.0, alpha), rd.sub_up(1.0, beta)))

    out = []
    for d in D:
        num_lo = rd.sub_down(d, e_sigma)
        # A negative numerator must shrink by the *small* denominator to stay
        # a valid lower bound; a positive one by the large denominator.
        if num_lo >= 0.0:
            lo = rd.div_down(num_lo, den_plus_up)
        else:
            lo = rd.div_down(num_lo, den_plus_dn)
        num_hi = rd.add_up(d, e_sigma)
        if num_hi >= 0.0:
            hi = rd.div_up(num_hi, den_minus_dn)
        else:
            hi = rd.div_up(num_hi, den_minus_up)
        out.append((lo, hi))
    return tuple(out)


def _certify_given_bases(B: BallMatrix, U: np.ndarray, V: np.ndarray) -> SVDCertificate:
    """Run the enclosure argument with explicit (possibly bad) bases."""
    n = B.shape[0]
    Ub = BallMatrix.exact(U)
    Vb = BallMatrix.exact(V)
    ident = BallMatrix.identity(n)

    alpha_u = spectral_norm_upper(ball_sub(ident, ball_matmul(Ub.conj_transpose(), Ub)))
    beta_v = spectral_norm_upper(ball_sub(ident, ball_matmul(Vb.conj_transpose(), Vb)))
    if alpha_u >= 1.0 or beta_v >= 1.0:
        raise OrthogonalityTooWeak(
            f"||I - U*U|| <= {alpha_u}, ||I - V*V|| <= {beta_v}; "
            "both must be < 1")

    sigma = ball_matmul(ball_matmul(Ub.conj_transpose(), B), Vb)

    diag_c = np.diagonal(sigma.centers).copy()
    D = diag_c.real.astype(float)

    # One ball matrix enclosing Sigma' - D for every member: the diagonal
    # keeps only its imaginary center (the real part moved into D) and its
    # full radius, so the imaginary widths are absorbed into e_sigma.
    dev_c = sigma.centers.copy()
    np.fill_diagonal(dev_c, 1j * diag_c.imag)
    e_sigma = spectral_norm_upper(BallMatrix(dev_c, sigma.radii))

    intervals = _enclosure_intervals(D, e_sigma, alpha_u, beta_v)
    theta = min(lo for lo, _ in intervals)
    return SVDCertificate(intervals=intervals, theta=theta,
                          alpha_u=alpha_u, beta_v=beta_v, e_sigma=e_sigma)


def certify_svd(B: BallMatrix) -> SVDCertificate:
    """Enclose the singular values of every member of the square ball matrix B.

    The floating SVD of the centers is *not* trusted; it only proposes the
    bases whose defects the certificate then bounds rigorously.
    """
    n, m = B.shape
    if n != m:
        raise BallArithmeticError("singular-value certification expects a square matrix")
    if n == 0:
        raise BallArithmeticError("empty matrix")
    with threadpool_limits(limits=1):
        try:
            u, _, vh = scipy.linalg.svd(B.centers)
        except scipy.linalg.LinAlgError as exc:   # pragma: no cover - rare
            raise OrthogonalityTooWeak(f"floating SVD failed: {exc}") from exc
    return _certify_given_bases(B, u, vh.conj().T)


def smallest_sv_lower(B: BallMatrix) -> float:
    """Certified theta > 0 with ||B'^{-1}|| <= 1/theta for every member B'."""
    cert = certify_svd(B)
    if cert.theta <= 0.0:
        raise ThetaNonpositive(
            f"cannot separate the smallest singular value from 0 "
            f"(theta={cert.theta}, e_sigma={cert.e_sigma})")
    return cert.theta


def nearest_value_match(cert: SVDCertificate, values) -> list[int]:
    """Heuristically assign each approximate singular value an interval index.

    The underlying theorem only guarantees the enclosures up to an unknown
    permutation, so this pairing (by interval midpoint distance, one-to-one)
    is for reporting; nothing rigorous may depend on it.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (cert.n,):
        raise ValueError("need exactly one value per interval")
    mids = np.array([0.5 * (lo + hi) for lo, hi in cert.intervals])
    cost = np.abs(values[:, None] - mids[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    order = np.empty(cert.n, dtype=int)
    order[rows] = cols
    return order.tolist()
