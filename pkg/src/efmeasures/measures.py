"""Closed-form information measures for same-family exponential distributions.

Everything is generated by the log-normalizer F. With G(a) = F(a*theta) -
a*F(theta) and C(a) the carrier moment (1 for zero-carrier families):

    renyi entropy      (G(a) + log C(a)) / (1 - a)
    tsallis entropy    (exp(G(a)) * C(a) - 1) / (1 - a)
    shannon entropy    F(theta) - <theta, grad F(theta)> - E[k(x)]
    cross entropy      F(theta') - <theta', grad F(theta)> - E[k(x)]
    skew jensen        a F(theta) + (1-a) F(theta') - F(a theta + (1-a) theta')
    renyi divergence   J / (1 - a)
    tsallis divergence (exp(-J) - 1) / (a - 1)
    kl divergence      bregman gap of F with swapped arguments
    bhattacharyya      exp(-J at a = 1/2); hellinger = sqrt(1 - bhattacharyya)

Inside a narrow band around a = 1 the generic forms are 0/0; those calls are
routed to the Shannon/KL limit formulas and the branch taken is recorded on
the result. Natural logarithms throughout, so values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, MixedParameterError, ScaledParameterError
from .families import Family, NaturalParam

__all__ = [
    "EPS_LIMIT",
    "CLOSED_FORM",
    "SHANNON_LIMIT",
    "KL_LIMIT",
    "MeasureResult",
    "i_alpha_self",
    "renyi_entropy",
    "tsallis_entropy",
    "shannon_entropy",
    "shannon_cross_entropy",
    "skew_jensen",
    "bregman",
    "renyi_divergence",
    "tsallis_divergence",
    "kl_divergence",
    "i_alpha_cross",
    "bhattacharyya_coefficient",
    "hellinger_distance",
    "renyi_to_tsallis",
    "tsallis_to_renyi",
    "MEASURE_NAMES",
    "measure_needs_alpha",
    "measure_needs_pair",
    "evaluate_measure",
]

# Width of the band around alpha = 1 inside which the generic closed forms
# cancel catastrophically; such calls take the explicit limit branch.
EPS_LIMIT = 1e-6

CLOSED_FORM = "closed-form"
SHANNON_LIMIT = "shannon-limit"
KL_LIMIT = "kl-limit"


@dataclass(frozen=True)
class MeasureResult:
    """A measure value plus which formula branch produced it."""

    value: float
    branch: str
    alpha_used: float | None = None


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0):
        raise DomainError(f"alpha must be a positive real, got {alpha}")
    return alpha


def _scaled(fam: Family, theta: NaturalParam, alpha: float) -> NaturalParam:
    scaled = theta.scaled(alpha)
    fam.require_natural(scaled, "alpha-scaled parameter", ScaledParameterError)
    return scaled


def _mixed(fam: Family, theta: NaturalParam, theta2: NaturalParam, alpha: float) -> NaturalParam:
    mixed = theta.mix(theta2, alpha)
    fam.require_natural(
        mixed,
        f"mixed parameter alpha*theta + (1-alpha)*theta' at alpha={alpha:g}",
        MixedParameterError,
    )
    return mixed


def i_alpha_self(fam: Family, theta: NaturalParam, alpha: float) -> float:
    """Integral of p^alpha over the support, in closed form."""
    alpha = _check_alpha(alpha)
    fam.require_natural(theta)
    scaled = _scaled(fam, theta, alpha)
    gap = fam.log_normalizer(scaled) - alpha * fam.log_normalizer(theta)
    return math.exp(gap + fam.log_carrier_moment(theta, alpha))


def renyi_entropy(fam: Family, theta: NaturalParam, alpha: float) -> MeasureResult:
    alpha = _check_alpha(alpha)
    fam.require_natural(theta)
    if abs(alpha - 1.0) < EPS_LIMIT:
        return MeasureResult(shannon_entropy(fam, theta), SHANNON_LIMIT, alpha)
    scaled = _scaled(fam, theta, alpha)
    gap = fam.log_normalizer(scaled) - alpha * fam.log_normalizer(theta)
    value = (gap + fam.log_carrier_moment(theta, alpha)) / (1.0 - alpha)
    return MeasureResult(value, CLOSED_FORM, alpha)


def tsallis_entropy(fam: Family, theta: NaturalParam, alpha: float) -> MeasureResult:
    alpha = _check_alpha(alpha)
    fam.require_natural(theta)
    if abs(alpha - 1.0) < EPS_LIMIT:
        return MeasureResult(shannon_entropy(fam, theta), SHANNON_LIMIT, alpha)
    value = (i_alpha_self(fam, theta, alpha) - 1.0) / (1.0 - alpha)
    return MeasureResult(value, CLOSED_FORM, alpha)


def shannon_entropy(fam: Family, theta: NaturalParam) -> float:
    fam.require_natural(theta)
    grad = fam.grad_log_normalizer(theta)
    return fam.log_normalizer(theta) - theta.dot(grad) - fam.carrier_expectation(theta)


def shannon_cross_entropy(fam: Family, theta: NaturalParam, theta2: NaturalParam) -> float:
    """Cross entropy of the theta member against the theta' model."""
    fam.require_natural(theta)
    fam.require_natural(theta2, "second natural parameter")
    grad = fam.grad_log_normalizer(theta)
    return fam.log_normalizer(theta2) - theta2.dot(grad) - fam.carrier_expectation(theta)


def skew_jensen(fam: Family, theta: NaturalParam, theta2: NaturalParam, alpha: float) -> float:
    """Jensen gap of the log-normalizer at mixing weight alpha.

    Non-negative for alpha in [0, 1]; non-positive outside, where the mixed
    parameter may also leave the natural domain (reported as an error).
    """
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha}")
    fam.require_natural(theta)
    fam.require_natural(theta2, "second natural parameter")
    mixed = _mixed(fam, theta, theta2, alpha)
    return (
        alpha * fam.log_normalizer(theta)
        + (1.0 - alpha) * fam.log_normalizer(theta2)
        - fam.log_normalizer(mixed)
    )


def bregman(fam: Family, theta_q: NaturalParam, theta_p: NaturalParam) -> float:
    """Bregman gap F(q) - F(p) - <q - p, grad F(p)>; zero iff q = p."""
    fam.require_natural(theta_q)
    fam.require_natural(theta_p, "second natural parameter")
    grad_p = fam.grad_log_normalizer(theta_p)
    gap = fam.log_normalizer(theta_q) - fam.log_normalizer(theta_p)
    return gap - (theta_q.dot(grad_p) - theta_p.dot(grad_p))


def kl_divergence(fam: Family, theta: NaturalParam, theta2: NaturalParam) -> float:
    """Relative entropy of theta against theta2: the Bregman gap with swapped arguments."""
    return bregman(fam, theta2, theta)


def renyi_divergence(
    fam: Family, theta: NaturalParam, theta2: NaturalParam, alpha: float
) -> MeasureResult:
    alpha = _check_alpha(alpha)
    fam.require_natural(theta)
    fam.require_natural(theta2, "second natural parameter")
    if abs(alpha - 1.0) < EPS_LIMIT:
        return MeasureResult(kl_divergence(fam, theta, theta2), KL_LIMIT, alpha)
    value = skew_jensen(fam, theta, theta2, alpha) / (1.0 - alpha)
    return MeasureResult(value, CLOSED_FORM, alpha)


def tsallis_divergence(
    fam: Family, theta: NaturalParam, theta2: NaturalParam, alpha: float
) -> MeasureResult:
    alpha = _check_alpha(alpha)
    fam.require_natural(theta)
    fam.require_natural(theta2, "second natural parameter")
    if abs(alpha - 1.0) < EPS_LIMIT:
        return MeasureResult(kl_divergence(fam, theta, theta2), KL_LIMIT, alpha)
    gap = skew_jensen(fam, theta, theta2, alpha)
    value = (math.exp(-gap) - 1.0) / (alpha - 1.0)
    return MeasureResult(value, CLOSED_FORM, alpha)


def i_alpha_cross(
    fam: Family, theta: NaturalParam, theta2: NaturalParam, alpha: float
) -> float:
    """Integral of p^alpha q^(1-alpha); equals exp(-jensen gap)."""
    alpha = _check_alpha(alpha)
    return math.exp(-skew_jensen(fam, theta, theta2, alpha))


def bhattacharyya_coefficient(
    fam: Family, theta: NaturalParam, theta2: NaturalParam
) -> float:
    """Overlap integral of sqrt(p q); in (0, 1], equal to 1 iff p = q."""
    return math.exp(-skew_jensen(fam, theta, theta2, 0.5))


def hellinger_distance(fam: Family, theta: NaturalParam, theta2: NaturalParam) -> float:
    coeff = bhattacharyya_coefficient(fam, theta, theta2)
    return math.sqrt(max(0.0, 1.0 - coeff))


def renyi_to_tsallis(h_renyi: float, alpha: float) -> float:
    """Monotone conversion between the two entropy scales at the same order."""
    alpha = float(alpha)
    if alpha == 1.0:
        raise DomainError("conversion is undefined at alpha = 1")
    return math.expm1((1.0 - alpha) * h_renyi) / (1.0 - alpha)


def tsallis_to_renyi(h_tsallis: float, alpha: float) -> float:
    alpha = float(alpha)
    if alpha == 1.0:
        raise DomainError("conversion is undefined at alpha = 1")
    arg = (1.0 - alpha) * h_tsallis
    if arg <= -1.0:
        raise DomainError(
            f"(1-alpha)*h + 1 must be positive, got {arg + 1.0} (log of a non-positive value)"
        )
    return math.log1p(arg) / (1.0 - alpha)


# --------------------------------------------------------------------------
# Name-based dispatch shared by the CLI, the plug-in estimator, and tests.
# --------------------------------------------------------------------------

_ALPHA_MEASURES = frozenset({"renyi", "tsallis", "renyi-div", "tsallis-div", "jensen"})
_PAIR_MEASURES = frozenset(
    {"cross-entropy", "kl", "renyi-div", "tsallis-div", "bhattacharyya", "hellinger", "jensen", "bregman"}
)

MEASURE_NAMES = (
    "renyi",
    "tsallis",
    "shannon",
    "cross-entropy",
    "kl",
    "renyi-div",
    "tsallis-div",
    "bhattacharyya",
    "hellinger",
    "jensen",
    "bregman",
)


def measure_needs_alpha(measure: str) -> bool:
    return measure in _ALPHA_MEASURES


def measure_needs_pair(measure: str) -> bool:
    return measure in _PAIR_MEASURES


def evaluate_measure(
    fam: Family,
    measure: str,
    theta: NaturalParam,
    theta2: NaturalParam | None = None,
    alpha: float | None = None,
) -> MeasureResult:
    """Evaluate a measure by name, wrapping plain values as closed-form results."""
    if measure not in MEASURE_NAMES:
        raise ValueError(f"unknown measure {measure!r}; known: {', '.join(MEASURE_NAMES)}")
    if measure_needs_pair(measure) and theta2 is None:
        raise ValueError(f"measure {measure!r} needs a second parameter")
    if measure_needs_alpha(measure) and alpha is None:
        raise ValueError(f"measure {measure!r} needs an alpha order")

    if measure == "renyi":
        return renyi_entropy(fam, theta, alpha)
    if measure == "tsallis":
        return tsallis_entropy(fam, theta, alpha)
    if measure == "shannon":
        return MeasureResult(shannon_entropy(fam, theta), CLOSED_FORM)
    if measure == "cross-entropy":
        return MeasureResult(shannon_cross_entropy(fam, theta, theta2), CLOSED_FORM)
    if measure == "kl":
        return MeasureResult(kl_divergence(fam, theta, theta2), CLOSED_FORM)
    if measure == "renyi-div":
        return renyi_divergence(fam, theta, theta2, alpha)
    if measure == "tsallis-div":
        return tsallis_divergence(fam, theta, theta2, alpha)
    if measure == "bhattacharyya":
        return MeasureResult(bhattacharyya_coefficient(fam, theta, theta2), CLOSED_FORM)
    if measure == "hellinger":
        return MeasureResult(hellinger_distance(fam, theta, theta2), CLOSED_FORM)
    if measure == "jensen":
        return MeasureResult(skew_jensen(fam, theta, theta2, alpha), CLOSED_FORM, alpha)
    return MeasureResult(bregman(fam, theta, theta2), CLOSED_FORM)
