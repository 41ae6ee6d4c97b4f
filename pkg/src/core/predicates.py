"""
Closed-form inseparability criteria for noisy exchange gates

Every predicate returns a PredicateVerdict carrying a signed margin: positive
means entangled, negative separable, and margins within 1e-12 of zero are
reported as boundary points.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Tuple

import numpy as np
from loguru import logger

from .errors import ContractViolation, NoSignChangeError

BOUNDARY_EPS = 1e-12


class PredicateClass(str, Enum):
    ENTANGLED = "entangled"
    SEPARABLE = "separable"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class PredicateVerdict:
    classification: PredicateClass
    margin: float

    @property
    def entangled(self) -> bool:
        return self.classification is PredicateClass.ENTANGLED


def classify(margin: float, eps: float = BOUNDARY_EPS) -> PredicateVerdict:
    if margin > eps:
        cls = PredicateClass.ENTANGLED
    elif margin < -eps:
        cls = PredicateClass.SEPARABLE
    else:
        cls = PredicateClass.BOUNDARY
    return PredicateVerdict(cls, float(margin))


def _width(name: str, value: float) -> float:
    value = float(value)
    if math.isnan(value) or value < 0:
        raise ContractViolation(f"{name} must be >= 0, got {value}")
    return value


# Gaussian Ising


def ising_gaussian_lhs(lam: float, omega: float) -> float:
    """exp(-lam^2) + 2 exp(-(lam^2 + omega^2/4)/2)"""
    lam, omega = _width("lambda", lam), _width("omega", omega)
    return math.exp(-lam * lam) + 2.0 * math.exp(-0.5 * (lam * lam + 0.25 * omega * omega))


def ising_gaussian_entangled(lam: float, omega: float) -> PredicateVerdict:
    return classify(ising_gaussian_lhs(lam, omega) - 1.0)


def ising_lambda_max(omega: float) -> float:
    """Preparation width at which the tunable Ising output turns separable"""
    omega = _width("omega", omega)
    inner = math.sqrt(math.exp(-0.25 * omega * omega) + 1.0) - math.exp(-0.125 * omega * omega)
    return math.sqrt(-2.0 * math.log(inner))


def ising_omega_max(lam: float) -> float:
    """Interaction width at which the tunable Ising output turns separable

    inf when every interaction width stays entangled (lam = 0); 0.0 when the
    preparation alone already prevents entanglement.
    """
    lam = _width("lambda", lam)
    a = math.exp(-0.5 * lam * lam)
    g = (1.0 - a * a) / (2.0 * a)
    if g <= 0.0:
        return math.inf
    if g >= 1.0:
        return 0.0
    return math.sqrt(-8.0 * math.log(g))


def untunable_ising_entangled(lam: float, capital_lambda: float) -> PredicateVerdict:
    """Refocused Ising: same criterion with omega replaced by 2 * capital_lambda"""
    return ising_gaussian_entangled(lam, 2.0 * _width("capital_lambda", capital_lambda))


# Tunable XYZ


@dataclass(frozen=True)
class XyzReducedParams:
    a: float
    b: float
    z: float

    def __post_init__(self):
        a, b, z = float(self.a), float(self.b), float(self.z)
        if not 0.0 < a <= 1.0:
            raise ContractViolation(f"a must lie in (0, 1], got {a}")
        if not 0.0 < b <= 1.0:
            raise ContractViolation(f"b must lie in (0, 1], got {b}")
        if not abs(z) <= 1.0:
            raise ContractViolation(f"|z| must be <= 1, got {z}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_widths(cls, lam: float, omega: float, mean_theta_minus: float) -> "XyzReducedParams":
        lam, omega = _width("lambda", lam), _width("omega", omega)
        z = max(-1.0, min(1.0, math.cos(2.0 * float(mean_theta_minus))))
        return cls(math.exp(-0.5 * lam * lam), math.exp(-2.0 * omega * omega), z)


def xyz_radicand(p: XyzReducedParams) -> float:
    """1/b^2 - ((1+a)/(1-a))^2; -inf for a = 1"""
    if p.a == 1.0:
        return -math.inf
    return 1.0 / (p.b * p.b) - ((1.0 + p.a) / (1.0 - p.a)) ** 2


def xyz_entangled(p: XyzReducedParams) -> PredicateVerdict:
    if p.a == 1.0:
        return PredicateVerdict(PredicateClass.ENTANGLED, math.inf)
    return classify(p.z * p.z - xyz_radicand(p))


def xyz_entangled_bound(a: float) -> float:
    """b above this is entangled for every z"""
    return (1.0 - a) / (1.0 + a)


def xyz_separable_bound(a: float) -> float:
    """b below this is separable for every z"""
    return (1.0 - a) / math.sqrt(2.0 * (1.0 + a * a))


def xyz_sufficient_entangled(a: float, b: float) -> bool:
    return b > xyz_entangled_bound(a)


def xyz_sufficient_separable(a: float, b: float) -> bool:
    return b < xyz_separable_bound(a)


# XY / XXZ / Heisenberg


def xy_family_weights(lam: float, omega: float) -> Tuple[float, float, float]:
    """(w00, w_plus, w_minus) of the noisy XY-family output"""
    a = math.exp(-0.5 * _width("lambda", lam) ** 2)
    c = math.exp(-0.5 * _width("omega", omega) ** 2)
    return 0.5 * (1.0 - a), 0.25 * (1.0 + a) * (1.0 - c), 0.25 * (1.0 + a) * (1.0 + c)


def xy_always_entangled(lam: float, omega: float) -> bool:
    _, w_plus, w_minus = xy_family_weights(lam, omega)
    return w_plus != w_minus


# Untunable XYZ


@dataclass(frozen=True)
class UntunableXyzParams:
    mu: float
    eta: float
    delta: float

    def __post_init__(self):
        mu, eta, delta = float(self.mu), float(self.eta), float(self.delta)
        if not 0.0 < mu <= 1.0:
            raise ContractViolation(f"mu must lie in (0, 1], got {mu}")
        if not 0.0 <= eta <= 1.0:
            raise ContractViolation(f"eta must lie in [0, 1], got {eta}")
        if not math.isfinite(delta):
            raise ContractViolation(f"delta must be finite, got {delta}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def from_widths(cls, lam: float, capital_lambda: float, delta: float) -> "UntunableXyzParams":
        return cls(
            math.exp(-0.5 * _width("capital_lambda", capital_lambda) ** 2),
            math.exp(-0.5 * _width("lambda", lam) ** 2),
            delta,
        )

    @property
    def beta(self) -> float:
        return self.delta * math.pi / 2.0

    @property
    def delta_small(self) -> float:
        return self.delta * math.pi / 4.0

    @property
    def A(self) -> float:
        return math.cos(self.beta) * math.cos(self.delta_small)

    @property
    def B(self) -> float:
        return math.sin(self.beta) * math.sin(self.delta_small)

    @property
    def C(self) -> float:
        return math.sin(self.beta) * math.cos(self.delta_small)

    @property
    def D(self) -> float:
        return math.cos(self.beta) * math.sin(self.delta_small)


def untunable_xyz_lhs(p: UntunableXyzParams) -> float:
    """Negative means entangled"""
    mu, eta = p.mu, p.eta
    return ((p.A + p.B * mu) ** 2 * (1.0 - eta) ** 2 * (p.C * mu - p.D) ** 2
            - 0.25 * mu ** 4 * (1.0 + eta) ** 2)


def untunable_xyz_entangled(p: UntunableXyzParams) -> PredicateVerdict:
    return classify(-untunable_xyz_lhs(p))


def untunable_xyz_region(mu_grid, eta_grid, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Inseparability LHS over a (mu, eta) grid and the entangled mask

    Rows follow mu_grid, columns eta_grid.
    """
    mu = np.asarray(mu_grid, dtype=float)[:, np.newaxis]
    eta = np.asarray(eta_grid, dtype=float)[np.newaxis, :]
    if np.any(mu <= 0) or np.any(mu > 1) or np.any(eta < 0) or np.any(eta > 1):
        raise ContractViolation("mu must lie in (0, 1] and eta in [0, 1]")
    beta, small = delta * math.pi / 2.0, delta * math.pi / 4.0
    a = math.cos(beta) * math.cos(small)
    b = math.sin(beta) * math.sin(small)
    c = math.sin(beta) * math.cos(small)
    d = math.cos(beta) * math.sin(small)
    lhs = (a + b * mu) ** 2 * (1.0 - eta) ** 2 * (c * mu - d) ** 2 - 0.25 * mu ** 4 * (1.0 + eta) ** 2
    return lhs, lhs < -BOUNDARY_EPS


# Laplace Ising


def ising_laplace_lhs(lam: float, omega: float) -> float:
    """4 lam^2 (omega^2 + 2 lam^2 + 2 lam^2 omega^2); below 1 is entangled"""
    lam, omega = _width("lambda", lam), _width("omega", omega)
    l2, o2 = lam * lam, omega * omega
    return 4.0 * l2 * (o2 + 2.0 * l2 + 2.0 * l2 * o2)


def ising_laplace_entangled(lam: float, omega: float) -> PredicateVerdict:
    return classify(1.0 - ising_laplace_lhs(lam, omega))


def untunable_ising_laplace_entangled(lam: float, capital_lambda: float) -> PredicateVerdict:
    return ising_laplace_entangled(lam, 2.0 * _width("capital_lambda", capital_lambda))


def laplace_lambda_bound(omega: float) -> float:
    omega = _width("omega", omega)
    o2 = omega * omega
    return 0.5 * math.sqrt((math.sqrt(1.0 + (1.0 + o2) ** 2) - o2) / (1.0 + o2))


def laplace_omega_bound(lam: float) -> float:
    """Interaction scale at which the Laplace Ising output turns separable"""
    lam = _width("lambda", lam)
    if lam == 0.0:
        return math.inf
    l2 = lam * lam
    numerator = 1.0 / (4.0 * l2) - 2.0 * l2
    if numerator <= 0.0:
        return 0.0
    return math.sqrt(numerator / (1.0 + 2.0 * l2))


# Bisection


def bisect_margin(margin: Callable[[float], float], lo: float, hi: float,
                  tol: float = 1e-12, max_iter: int = 200) -> float:
    """Zero of a margin function bracketed by [lo, hi]"""
    f_lo, f_hi = margin(lo), margin(hi)
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChangeError(
            f"margin has the same sign at {lo} ({f_lo:.3e}) and {hi} ({f_hi:.3e})",
            lo_entangled=f_lo > 0,
            hi_entangled=f_hi > 0,
        )
    lo_positive = f_lo > 0
    for step in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        if (margin(mid) > 0) == lo_positive:
            lo = mid
        else:
            hi = mid
    logger.debug(f"Margin bisection finished after {step + 1} steps at {0.5 * (lo + hi):.12g}")
    return 0.5 * (lo + hi)
