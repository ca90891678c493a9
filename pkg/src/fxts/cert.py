"""Fixed-time stability certificate with a possibly positive linear term.

Given dV/dt <= -a1 V^(1+1/mu) - a2 V^(1-1/mu) + d1 V, everything below is a
function of the ratio r = d1 / (2 sqrt(a1 a2)):

* r < 1: the whole space is a domain of attraction;
* r >= 1: only the sublevel set V <= (k v1)^mu is, where v1 <= v2 are the
  roots of a1 s^2 - d1 s + a2 = 0 in s = V^(1/mu).

Closed-form settling-time bounds live next to a quadrature oracle for the
convergence-time integral, so each can be checked against the other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import DomainError, FxtsGains, NominalFxtsGains
from .quadrature import adaptive_simpson

DEFAULT_K = 0.99


class SingularIntegrandError(DomainError):
    """The comparison-system denominator vanishes inside the integration range."""


class RegimeTag(enum.Enum):
    NON_POSITIVE = "NonPositive"
    SUBCRITICAL = "Subcritical"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    r: float

    @property
    def is_global(self) -> bool:
        return self.r < 1.0


@dataclass(frozen=True)
class CriticalLevels:
    v_star: float
    delta_star: float
    v1: float | None = None
    v2: float | None = None


@dataclass(frozen=True)
class RobustnessData:
    """Nominal FxTS gains plus the constants bounding a vanishing perturbation.

    ``lip_L`` bounds |psi(x)| <= L |x|; ``k1_quad`` and ``k2_quad`` give
    V(x) >= k1 |x|^2 and |dV/dx| <= k2 |x|.
    """

    nominal: NominalFxtsGains
    lip_L: float
    k1_quad: float
    k2_quad: float

    def __post_init__(self):
        # L = 0 is allowed: it is the unperturbed system
        if not self.lip_L >= 0:
            raise DomainError(f"lip_L must be >= 0, got {self.lip_L}")
        if not self.k1_quad > 0:
            raise DomainError(f"k1_quad must be > 0, got {self.k1_quad}")
        if not self.k2_quad > 0:
            raise DomainError(f"k2_quad must be > 0, got {self.k2_quad}")


def classify_regime(gains: FxtsGains) -> Regime:
    r = gains.r
    if r <= 0.0:
        tag = RegimeTag.NON_POSITIVE
    elif r < 1.0:
        tag = RegimeTag.SUBCRITICAL
    else:
        tag = RegimeTag.SUPERCRITICAL
    return Regime(tag, r)


def critical_levels(gains: FxtsGains) -> CriticalLevels:
    """V*, delta* and, for r >= 1, the roots v1 <= v2 (in s = V^(1/mu))."""
    a1, a2, d1 = gains.alpha1, gains.alpha2, gains.delta1
    v_star = (a2 / a1) ** (gains.mu / 2.0)
    delta_star = 2.0 * gains.sqrt_a1a2
    if gains.r < 1.0:
        return CriticalLevels(v_star, delta_star)
    disc = math.sqrt(max(d1 - delta_star, 0.0) * (d1 + delta_star))
    v2 = (d1 + disc) / (2.0 * a1)
    # Vieta form avoids cancellation in d1 - disc for large r
    v1 = min(a2 / (a1 * v2), v2)
    return CriticalLevels(v_star, delta_star, v1, v2)


def domain_level(gains: FxtsGains, k: float = 1.0) -> float:
    """Sublevel bound on V for the domain of attraction; ``inf`` when global."""
    if not 0.0 < k <= 1.0:
        raise DomainError(f"k must lie in (0, 1], got {k}")
    if gains.r < 1.0:
        return math.inf
    v1 = critical_levels(gains).v1
    return (k * v1) ** gains.mu


def _arctan_bound(alpha1: float, alpha2: float, delta1: float, mu: float) -> float:
    """(mu/(a1 k1)) (pi/2 - atan k2), valid for d1 < 2 sqrt(a1 a2)."""
    delta_star = 2.0 * math.sqrt(alpha1 * alpha2)
    disc = (delta_star - delta1) * (delta_star + delta1)  # 4 a1 a2 - d1^2
    k1 = math.sqrt(disc / (4.0 * alpha1 * alpha1))
    k2 = -delta1 / math.sqrt(disc)
    return mu / (alpha1 * k1) * (math.pi / 2.0 - math.atan(k2))


def _check_k(k: float) -> None:
    if not 0.0 < k < 1.0:
        raise DomainError(f"k must lie in (0, 1) for r >= 1, got {k}")


def settling_time_bound(gains: FxtsGains, k: float = DEFAULT_K) -> float:
    """Upper bound on the time to reach V = 0 from anywhere in the domain."""
    r = gains.r
    if r <= 0.0:
        return gains.mu * math.pi / (2.0 * gains.sqrt_a1a2)
    if r < 1.0:
        return _arctan_bound(gains.alpha1, gains.alpha2, gains.delta1, gains.mu)
    _check_k(k)
    return gains.mu * k / ((1.0 - k) * gains.sqrt_a1a2)


def nominal_settling_time_bound(nominal: NominalFxtsGains) -> float:
    return nominal.settling_time_bound()


def integral_bound(gains: FxtsGains, v0: float, k: float = DEFAULT_K) -> float:
    """Closed-form upper bound on the convergence-time integral from ``v0``.

    For d1 < 0 the d1 = 0 value is returned; the integrand only grows with d1,
    so that still bounds the integral.
    """
    if v0 < 0:
        raise DomainError(f"v0 must be >= 0, got {v0}")
    if gains.delta1 < 0.0:
        return gains.mu * math.pi / (2.0 * gains.sqrt_a1a2)
    if gains.r < 1.0:
        return _arctan_bound(gains.alpha1, gains.alpha2, gains.delta1, gains.mu)
    _check_k(k)
    limit = k * critical_levels(gains).v1
    if v0 ** (1.0 / gains.mu) > limit * (1.0 + 1e-12):
        raise DomainError(
            f"v0^(1/mu) = {v0 ** (1.0 / gains.mu):.6g} exceeds k*v1 = {limit:.6g}; bound does not apply"
        )
    return gains.mu * k / ((1.0 - k) * gains.sqrt_a1a2)


def integral_oracle(gains: FxtsGains, v0: float, tol: float = 1e-10) -> float:
    """Numerical value of int_{v0}^{0} dV / rhs(V) by quadrature.

    Uses s = V^(1/mu), which turns the integral into
    mu * int_0^{v0^(1/mu)} ds / (a1 s^2 - d1 s + a2) with a smooth integrand.
    """
    if v0 < 0:
        raise DomainError(f"v0 must be >= 0, got {v0}")
    if v0 == 0.0:
        return 0.0
    a1, a2, d1, mu = gains.alpha1, gains.alpha2, gains.delta1, gains.mu
    s0 = v0 ** (1.0 / mu)
    # factored or completed-square denominators; the expanded quadratic
    # cancels badly when r is close to 1
    if gains.r >= 1.0:
        levels = critical_levels(gains)
        v1, v2 = levels.v1, levels.v2
        if s0 >= v1:
            raise SingularIntegrandError(
                f"denominator vanishes at s = {v1:.6g} inside [0, {s0:.6g}]"
            )

        def integrand(s: float) -> float:
            return 1.0 / (a1 * (v1 - s) * (v2 - s))

    else:
        center = d1 / (2.0 * a1)
        delta_star = 2.0 * gains.sqrt_a1a2
        floor = (delta_star - d1) * (delta_star + d1) / (4.0 * a1)

        def integrand(s: float) -> float:
            return 1.0 / (a1 * (s - center) ** 2 + floor)

    # geometric breakpoints keep long tails from hiding the peak near the origin
    scale = math.sqrt(a2 / a1)
    edges = [0.0]
    edge = scale
    while edge < s0:
        edges.append(edge)
        edge *= 2.0
    edges.append(s0)
    piece_tol = tol / (len(edges) - 1)
    total = sum(adaptive_simpson(integrand, lo, hi, piece_tol) for lo, hi in zip(edges, edges[1:]))
    return mu * total


def doa_boundary_radius(r_m: float, mu: float) -> float:
    """Level (r_M - sqrt(r_M^2 - 1))^mu bounding V on the domain of attraction.

    With V(x) = |x|^2 the boundary is the circle of radius sqrt(level).
    """
    if not (r_m >= 1.0 and math.isfinite(r_m)):
        raise DomainError(f"r_M must be >= 1, got {r_m}")
    if not mu > 1:
        raise DomainError(f"mu must be > 1, got {mu}")
    # 1/(r + sqrt(r^2-1)) equals r - sqrt(r^2-1) without the cancellation
    return (1.0 / (r_m + math.sqrt(r_m * r_m - 1.0))) ** mu


class RobustnessMargin(NamedTuple):
    gains: FxtsGains
    regime: Regime
    domain_level: float

    @property
    def global_fxts(self) -> bool:
        return self.regime.r < 1.0


def robustness_margin(data: RobustnessData, k: float = 1.0, rtol: float = 1e-9) -> RobustnessMargin:
    """Map a nominal certificate plus perturbation constants to perturbed gains.

    The perturbation adds at most (k2 L / k1) V to dV/dt, so the exponent p
    plays the role of 1 - 1/mu (coefficient a) and q of 1 + 1/mu (coefficient b).
    """
    nom = data.nominal
    mu_p = 1.0 / (1.0 - nom.p)
    mu_q = 1.0 / (nom.q - 1.0)
    if abs(mu_p - mu_q) > rtol * max(mu_p, mu_q) or mu_p <= 1.0:
        raise DomainError(
            f"exponents p={nom.p}, q={nom.q} are not of the form 1 -/+ 1/mu for a common mu > 1"
        )
    delta1 = data.k2_quad * data.lip_L / data.k1_quad
    gains = FxtsGains(alpha1=nom.b, alpha2=nom.a, delta1=delta1, mu=mu_p)
    return RobustnessMargin(gains, classify_regime(gains), domain_level(gains, k))
