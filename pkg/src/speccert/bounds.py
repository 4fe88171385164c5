"""Upper bounds for the functional-analytic constants of the enclosure step.

Everything here is a closed-form scalar evaluated with directed rounding:
upward for the bound itself, downward inside any denominator or subtracted
term.  No bare floating-point arithmetic — these constants gate the final
theorem, so each one must dominate its exact value.

Norm conventions: A_x denotes the analytic-function space with weight
e^{2*pi*x|k|} on the k-th Fourier coefficient; the annulus certificate
supplies the parameter triple eta < alpha < rho these formulas consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _rounding as rd
from .maps import AnnulusCertificate

__all__ = [
    "DFLYConstants",
    "HouseholderBudget",
    "DenominatorNonpositive",
    "op_norm_bound",
    "interpolation_bound",
    "projection_defect",
    "discretization_error",
    "eigenratio_r",
    "delta_budget",
    "dfly_gamma",
    "weak_resolvent_feasibility",
]


class DenominatorNonpositive(ArithmeticError):
    """A feasibility denominator failed its positivity proviso."""


@dataclass(frozen=True)
class DFLYConstants:
    """Constants of the two-norm Lasota-Yorke (DFLY) inequality."""

    C1: float
    C2: float
    beta: float
    M: float
    weak_norm_cap: float | None = None

    def __post_init__(self):
        if self.C1 < 0 or self.C2 < 0:
            raise ValueError("C1, C2 must be nonnegative")
        if self.C1 == 0 and self.C2 == 0:
            raise ValueError("C1 and C2 cannot both vanish")
        if not (0 <= self.beta < self.M):
            raise ValueError("need 0 <= beta < M")


@dataclass(frozen=True)
class HouseholderBudget:
    """The delta budget fed to the pseudospectral argument.

    delta = ratio_r * discretization error (upward); delta_inv is the
    downward-rounded reciprocal, so delta_inv * delta <= 1 holds exactly.
    """

    delta: float
    delta_inv: float
    ratio_r: float
    exclusion_radius: float | None = None

    def __post_init__(self):
        if not (self.delta > 0 and self.delta_inv > 0):
            raise ValueError("budget must be positive")
        if Fraction(self.delta_inv) * Fraction(self.delta) > 1:
            raise ValueError("delta_inv * delta exceeds 1: rounding broke")


def _require_alpha(ann: AnnulusCertificate) -> float:
    ann.require_certified()
    if ann.alpha is None:
        raise ValueError("annulus certificate has no alpha attached")
    return ann.alpha


def op_norm_bound(ann: AnnulusCertificate) -> float:
    """Upper bound 1 + 2/(e^{2*pi*(rho-alpha)} - 1) for the transfer-operator
    norm A_eta -> A_alpha."""
    alpha = _require_alpha(ann)
    if not alpha < ann.rho:
        raise ValueError("need alpha < rho")
    d = rd.sub_down(ann.rho, alpha)
    den = rd.expm1_down(rd.mul_down(rd.mul_down(2.0, rd.pi_down()), d))
    if den <= 0.0:
        raise ValueError("degenerate gap rho - alpha")
    return rd.add_up(1.0, rd.div_up(2.0, den))


def _pow_up_interval(base: float, exp_lo: float, exp_hi: float) -> float:
    """Upper bound of base^y over y in [exp_lo, exp_hi] (base >= 0)."""
    return max(rd.pow_up(base, exp_lo), rd.pow_up(base, exp_hi))


def interpolation_bound(norm0: float, norm_alpha: float,
                        eta: float, alpha: float) -> float:
    """Upper bound norm0^{(alpha-eta)/alpha} * norm_alpha^{eta/alpha} for the
    intermediate-space norm of f (log-convexity of the norm scale)."""
    if not (0 <= eta < alpha):
        raise ValueError("need 0 <= eta < alpha")
    if norm0 < 0 or norm_alpha < 0:
        raise ValueError("norms must be nonnegative")
    if eta == 0:
        return norm0
    e1_lo = rd.div_down(rd.sub_down(alpha, eta), alpha)
    e1_hi = rd.div_up(rd.sub_up(alpha, eta), alpha)
    e2_lo = rd.div_down(eta, alpha)
    e2_hi = rd.div_up(eta, alpha)
    return rd.mul_up(_pow_up_interval(norm0, e1_lo, e1_hi),
                     _pow_up_interval(norm_alpha, e2_lo, e2_hi))


def projection_defect(K: int, alpha: float, eta: float) -> float:
    """Upper bound e^{-2*pi*K*(alpha-eta)} for the tail projection
    A_alpha -> A_eta."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    if not alpha > eta >= 0:
        raise ValueError("need alpha > eta >= 0")
    if K == 0:
        return 1.0
    gap = rd.mul_down(rd.mul_down(2.0, rd.pi_down()), rd.sub_down(alpha, eta))
    return rd.exp_up(rd.mul_up(float(-K), gap))


def discretization_error(ann: AnnulusCertificate, K: int) -> float:
    """Upper bound (1 + 2/(e^{2*pi*(rho-alpha)}-1)) * (e^{-2*pi*K*alpha}
    + e^{-2*pi*K*(alpha-eta)}) for || L_T - L_{T,K} ||_{A_alpha -> A_0}."""
    alpha = _require_alpha(ann)
    if K < 0:
        raise ValueError("K must be nonnegative")
    B = op_norm_bound(ann)
    t1 = rd.exp_up(rd.mul_up(float(-K),
                             rd.mul_down(rd.mul_down(2.0, rd.pi_down()), alpha)))
    t2 = projection_defect(K, alpha, ann.eta) if K >= 1 else 1.0
    return rd.mul_up(B, rd.add_up(t1, t2))


def eigenratio_r(ann: AnnulusCertificate, exclusion_radius: float) -> float:
    """Upper bound (B/r)^{alpha/(alpha-eta)} for the eigenfunction norm ratio
    uniform over eigenvalues of modulus >= the exclusion radius r."""
    alpha = _require_alpha(ann)
    if not exclusion_radius > 0:
        raise ValueError("exclusion radius must be positive")
    B = op_norm_bound(ann)
    base = rd.div_up(B, exclusion_radius)
    ex_lo = rd.div_down(alpha, rd.sub_up(alpha, ann.eta))
    ex_hi = rd.div_up(alpha, rd.sub_down(alpha, ann.eta))
    return _pow_up_interval(base, ex_lo, ex_hi)


def delta_budget(ratio_r: float, disc_err: float,
                 exclusion_radius: float | None = None) -> HouseholderBudget:
    """delta = upward(ratio_r * disc_err), delta_inv = downward(1/delta)."""
    if not (ratio_r > 0 and disc_err > 0):
        raise ValueError("inputs must be positive")
    delta = rd.mul_up(ratio_r, disc_err)
    if not (0.0 < delta < float("inf")):
        raise ValueError("delta budget unusable (overflow or underflow)")
    delta_inv = rd.div_down(1.0, delta)
    if not (0.0 < delta_inv < float("inf")):
        raise ValueError("delta reciprocal unusable (overflow or underflow)")
    return HouseholderBudget(delta=delta, delta_inv=delta_inv, ratio_r=ratio_r,
                             exclusion_radius=exclusion_radius)


def dfly_gamma(c: DFLYConstants, mu: float, n_max: int = 10 ** 6) -> float:
    """Upper bound for the spectral-gap constant: min over 1 <= n <= n_max of
    C2 M^n / (mu^n - C1 beta^n), skipping nonpositive denominators.

    A truncated scan of the infimum is still a valid upper bound; the scan
    exits early once terms keep worsening.
    """
    if not mu > c.beta:
        raise ValueError("need mu > beta")
    if c.C1 == 0:
        # minimum at n = 1
        return rd.div_up(rd.mul_up(c.C2, c.M), mu)
    best = None
    worse_streak = 0
    m_up, mu_dn, b_up = 1.0, 1.0, 1.0
    for _ in range(n_max):
        m_up = rd.mul_up(m_up, c.M)
        mu_dn = rd.mul_down(mu_dn, mu)
        b_up = rd.mul_up(b_up, c.beta)
        den = rd.sub_down(mu_dn, rd.mul_up(c.C1, b_up))
        if den > 0.0:
            term = rd.div_up(rd.mul_up(c.C2, m_up), den)
            if best is None or term < best:
                best = term
                worse_streak = 0
            else:
                worse_streak += 1
                if worse_streak >= 64:
                    break
        if mu_dn == 0.0:
            break
    if best is None:
        raise ValueError("no n with positive denominator up to n_max")
    return best


def weak_resolvent_feasibility(c: DFLYConstants, mu: float,
                               strong_resolvent: float, delta_n: float,
                               cone_ratio: float) -> float:
    """A-priori weak-norm resolvent bound.

    With q = |log mu|/|log beta| and Chat = C1 + C2, returns
    cone_ratio^q / (1 - Chat * strong_resolvent * delta_n * cone_ratio^q)
    * (1/(1-mu) + Chat * strong_resolvent), provided the denominator is
    positive; otherwise DenominatorNonpositive.
    """
    if c.M != 1:
        raise ValueError("normalization M = 1 required")
    if not (c.beta < mu < 1):
        raise ValueError("need beta < mu < 1")
    if cone_ratio < 1:
        raise ValueError("cone ratio must be at least 1")
    if strong_resolvent < 0 or delta_n < 0:
        raise ValueError("resolvent and defect must be nonnegative")
    chat = rd.add_up(c.C1, c.C2)
    if c.beta == 0:
        cq = 1.0
    else:
        log_mu_up = -rd.log_down(mu)          # |log mu| from above
        log_beta_dn = -rd.log_up(c.beta)      # |log beta| from below
        q_up = rd.div_up(log_mu_up, log_beta_dn)
        cq = rd.pow_up(cone_ratio, q_up)      # cone_ratio >= 1: increasing in q
    prod = rd.mul_up(rd.mul_up(chat, strong_resolvent),
                     rd.mul_up(delta_n, cq))
    den = rd.sub_down(1.0, prod)
    if den <= 0.0:
        raise DenominatorNonpositive(
            f"1 - Chat*r*Delta*C^q = {den:.3g} is not positive")
    second = rd.add_up(rd.div_up(1.0, rd.sub_down(1.0, mu)),
                       rd.mul_up(chat, strong_resolvent))
    return rd.div_up(rd.mul_up(cq, second), den)
