"""Exponential-family building blocks: canonical decompositions, parameter
conversions, samplers, and carrier-measure moments.

Every density here factorizes as

    p(x) = exp( <t(x), theta> - F(theta) + k(x) )

with sufficient statistic ``t``, natural parameter ``theta``, log-normalizer
``F``, and carrier term ``k``. Natural parameters are composite values: a
vector block plus an optional symmetric matrix block (used by the
multivariate Gaussian), paired under ``<a, b> = a_vec . b_vec +
tr(a_mat^T b_mat)``.

Implemented decompositions:

    family               theta              F(theta)                        t(x)       k(x)
    ------               -----              --------                        ----       ----
    exponential(rate)    -rate              -log(-th)                       x          0
    poisson(rate)        log(rate)          exp(th)                         x          -log x!
    bernoulli(p)         log(p/(1-p))       log(1 + e^th)                   x          0
    gaussian(mu, var)    (mu/var,           -th1^2/(4 th2)                  (x, x^2)   0
                          -1/(2 var))         + log(pi / -th2)/2
    mvn(mu, cov)         (cov^-1 mu,        d/2 log(2 pi)                   (x, xx^T)  0
                          -cov^-1 / 2)        - log det(-2 M)/2
                                              - v^T M^-1 v / 4
    laplacian(scale)     -1/scale           log 2 - log(-th)                |x|        0

Natural domains are open sets; boundary values raise instead of clamping,
because F or its gradient diverges there.

All values are immutable and every operation is a pure function of its
inputs (samplers take an explicit seed), so concurrent use is unrestricted.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DomainError,
    ExpectationDomainError,
    NaturalDomainError,
    ParameterDomainError,
    ScaledParameterError,
    SupportError,
)

__all__ = [
    "NaturalParam",
    "Support",
    "Family",
    "ExponentialParams",
    "PoissonParams",
    "BernoulliParams",
    "GaussianParams",
    "MultivariateGaussianParams",
    "LaplacianParams",
    "ExponentialDistFamily",
    "PoissonFamily",
    "BernoulliFamily",
    "GaussianFamily",
    "MultivariateGaussianFamily",
    "CenteredLaplacianFamily",
    "EXPONENTIAL",
    "POISSON",
    "BERNOULLI",
    "GAUSSIAN",
    "LAPLACIAN",
    "get_family",
    "family_names",
]

_LOG_2PI = math.log(2.0 * math.pi)

# Construction tolerates benign round-off in matrix input but rejects
# genuinely asymmetric matrices.
_MATRIX_ASYMMETRY_TOL = 1e-9

# Poisson series truncation: stop once k exceeds peak + 10 sqrt(peak) + 20
# and the running term is below 1e-16 of the accumulated sum. Robust for
# rates up to ~1e4 because Poisson-type tails decay super-exponentially.
_SERIES_TERM_CUTOFF = 1e-16

# Switch point between the Knuth product sampler and transformed rejection.
_POISSON_KNUTH_MAX_RATE = 30.0


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class NaturalParam:
    """Composite parameter: a vector block plus an optional matrix block.

    Used both for natural parameters and for the matching expectation
    coordinates returned by ``grad_log_normalizer``. The matrix block is
    symmetrized on construction (averaged with its transpose); input whose
    asymmetry exceeds the tolerance is rejected outright.
    """

    vector: np.ndarray
    matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        vec = np.atleast_1d(np.asarray(self.vector, dtype=float))
        if vec.ndim != 1:
            raise ValueError(f"vector block must be 1-d, got shape {vec.shape}")
        object.__setattr__(self, "vector", _readonly(vec))
        if self.matrix is not None:
            mat = np.asarray(self.matrix, dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError(f"matrix block must be square, got shape {mat.shape}")
            scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
            asym = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
            if asym > _MATRIX_ASYMMETRY_TOL * scale:
                raise ParameterDomainError(
                    f"matrix block is not symmetric (max asymmetry {asym:.3e})"
                )
            object.__setattr__(self, "matrix", _readonly((mat + mat.T) / 2.0))

    @property
    def order(self) -> int:
        n = int(self.vector.size)
        if self.matrix is not None:
            n += int(self.matrix.size)
        return n

    def _check_like(self, other: "NaturalParam") -> None:
        if self.vector.shape != other.vector.shape:
            raise ValueError("mismatched vector blocks")
        if (self.matrix is None) != (other.matrix is None):
            raise ValueError("one parameter has a matrix block, the other does not")
        if self.matrix is not None and self.matrix.shape != other.matrix.shape:
            raise ValueError("mismatched matrix blocks")

    def dot(self, other: "NaturalParam") -> float:
        """Composite inner product: vector dot plus matrix trace pairing."""
        self._check_like(other)
        out = float(self.vector @ other.vector)
        if self.matrix is not None:
            out += float(np.sum(self.matrix * other.matrix))
        return out

    def scaled(self, factor: float) -> "NaturalParam":
        mat = None if self.matrix is None else factor * self.matrix
        return NaturalParam(factor * self.vector, mat)

    def mix(self, other: "NaturalParam", weight: float) -> "NaturalParam":
        """Convex-style combination ``weight*self + (1-weight)*other``."""
        self._check_like(other)
        vec = weight * self.vector + (1.0 - weight) * other.vector
        mat = None
        if self.matrix is not None:
            mat = weight * self.matrix + (1.0 - weight) * other.matrix
        return NaturalParam(vec, mat)

    def flat(self) -> np.ndarray:
        """All coordinates as one vector: vector block, then matrix row-major."""
        if self.matrix is None:
            return self.vector.copy()
        return np.concatenate([self.vector, self.matrix.ravel()])


@dataclass(frozen=True)
class Support:
    """Shape of a family's sample space."""

    kind: str  # "nonneg-real" | "real" | "nonneg-int" | "binary" | "real-vector"
    dim: int = 1

    @property
    def is_discrete(self) -> bool:
        return self.kind in ("nonneg-int", "binary")


def _is_integral(x) -> bool:
    if isinstance(x, (bool, np.bool_)):
        return False
    if isinstance(x, (int, np.integer)):
        return True
    try:
        xf = float(x)
    except (TypeError, ValueError):
        return False
    return math.isfinite(xf) and xf == math.floor(xf)


# --------------------------------------------------------------------------
# Source parameters, one small record per family.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialParams:
    rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ParameterDomainError(f"rate must be > 0, got {self.rate}")


@dataclass(frozen=True)
class PoissonParams:
    rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ParameterDomainError(f"rate must be > 0, got {self.rate}")


@dataclass(frozen=True)
class BernoulliParams:
    p: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and 0.0 < self.p < 1.0):
            raise ParameterDomainError(f"p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class GaussianParams:
    mu: float
    var: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise ParameterDomainError(f"mu must be finite, got {self.mu}")
        if not (math.isfinite(self.var) and self.var > 0):
            raise ParameterDomainError(f"var must be > 0, got {self.var}")


@dataclass(frozen=True, eq=False)
class MultivariateGaussianParams:
    mu: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.ndim != 1 or not np.all(np.isfinite(mu)):
            raise ParameterDomainError("mu must be a finite vector")
        cov = np.asarray(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape != (mu.size, mu.size):
            raise ParameterDomainError(
                f"cov must be {mu.size}x{mu.size}, got shape {cov.shape}"
            )
        if not np.all(np.isfinite(cov)):
            raise ParameterDomainError("cov must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        asym = float(np.max(np.abs(cov - cov.T)))
        if asym > _MATRIX_ASYMMETRY_TOL * scale:
            raise ParameterDomainError(f"cov is not symmetric (max asymmetry {asym:.3e})")
        cov = (cov + cov.T) / 2.0
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ParameterDomainError("cov is not positive-definite") from None
        object.__setattr__(self, "mu", _readonly(mu))
        object.__setattr__(self, "cov", _readonly(cov))

    @property
    def dim(self) -> int:
        return int(self.mu.size)


@dataclass(frozen=True)
class LaplacianParams:
    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ParameterDomainError(f"scale must be > 0, got {self.scale}")


# --------------------------------------------------------------------------
# Seeded samplers built from a uniform stream only.
# --------------------------------------------------------------------------


def _standard_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard normals via the Marsaglia polar variant of Box-Muller."""
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(16, int((n - filled) * 0.7) + 16)
        v1 = 2.0 * rng.random(m) - 1.0
        v2 = 2.0 * rng.random(m) - 1.0
        s = v1 * v1 + v2 * v2
        ok = (s > 0.0) & (s < 1.0)
        s_ok = s[ok]
        f = np.sqrt(-2.0 * np.log(s_ok) / s_ok)
        z = np.concatenate([v1[ok] * f, v2[ok] * f])
        take = min(z.size, n - filled)
        out[filled : filled + take] = z[:take]
        filled += take
    return out


def _exponential_draws(rng: np.random.Generator, n: int, rate: float) -> np.ndarray:
    return -np.log1p(-rng.random(n)) / rate


def _poisson_knuth(rng: np.random.Generator, rate: float, n: int) -> np.ndarray:
    """Knuth's product-of-uniforms counter; expected rate+1 passes."""
    limit = math.exp(-rate)
    counts = np.zeros(n, dtype=np.int64)
    prod = rng.random(n)
    active = prod > limit
    while active.any():
        counts[active] += 1
        prod[active] *= rng.random(int(active.sum()))
        active = prod > limit
    return counts


def _poisson_ptrs(rng: np.random.Generator, rate: float, n: int) -> np.ndarray:
    """Transformed-rejection Poisson sampler for large rates (PTRS)."""
    from scipy.special import gammaln

    log_rate = math.log(rate)
    b = 0.931 + 2.53 * math.sqrt(rate)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)

    out = np.empty(n, dtype=np.int64)
    pending = np.arange(n)
    while pending.size:
        m = pending.size
        u = rng.random(m) - 0.5
        v = rng.random(m)
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a / us + b) * u + rate + 0.43).astype(np.int64)

        accept = (us >= 0.07) & (v <= v_r)
        plausible = ~accept & (k >= 0) & ~((us < 0.013) & (v > us))
        if plausible.any():
            kp = k[plausible]
            lhs = np.log(v[plausible]) + math.log(inv_alpha) - np.log(a / us[plausible] ** 2 + b)
            rhs = kp * log_rate - rate - gammaln(kp + 1.0)
            accept[np.flatnonzero(plausible)[lhs <= rhs]] = True

        out[pending[accept]] = k[accept]
        pending = pending[~accept]
    return out


def _kahan_sum_terms(term_fn, peak: float, term_cutoff: float):
    """Sum term_fn(k) for k = 0, 1, ... under the compound truncation rule.

    Stops once k exceeds peak + 10 sqrt(peak) + 20 and the current term has
    magnitude below ``term_cutoff`` times the accumulated absolute sum.
    Returns (sum, abs_sum, last_term, n_terms). Compensated summation keeps
    round-off independent of the term count.
    """
    cutoff = peak + 10.0 * math.sqrt(max(peak, 0.0)) + 20.0
    total = 0.0
    comp = 0.0
    abs_total = 0.0
    k = 0
    while True:
        t = term_fn(k)
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
        abs_total += abs(t)
        if k > cutoff and abs(t) <= term_cutoff * max(abs_total, 1e-300):
            return total, abs_total, abs(t), k + 1
        k += 1


# --------------------------------------------------------------------------
# Family base class.
# --------------------------------------------------------------------------


class Family(ABC):
    """One exponential family: canonical decomposition plus a sampler.

    Subclasses fill in the class-level descriptors and the abstract
    operations; the generic density assembly, domain guards, and the
    default (zero-carrier) moment logic live here.
    """

    name: ClassVar[str]
    vector_dim: ClassVar[int]
    matrix_dim: ClassVar[int] = 0
    support: ClassVar[Support]
    source_keys: ClassVar[tuple[str, ...]]
    # Human-readable decomposition strings for the CLI `families` listing.
    decomposition: ClassVar[dict[str, str]]

    @property
    def order(self) -> int:
        return self.vector_dim + self.matrix_dim * self.matrix_dim

    # -- shape and domain guards --------------------------------------

    def check_shape(self, theta: NaturalParam) -> None:
        if theta.vector.size != self.vector_dim:
            raise ValueError(
                f"{self.name}: expected vector block of length {self.vector_dim}, "
                f"got {theta.vector.size}"
            )
        if self.matrix_dim == 0:
            if theta.matrix is not None:
                raise ValueError(f"{self.name}: unexpected matrix block")
        else:
            if theta.matrix is None or theta.matrix.shape != (self.matrix_dim, self.matrix_dim):
                raise ValueError(
                    f"{self.name}: expected a {self.matrix_dim}x{self.matrix_dim} matrix block"
                )

    def in_natural_domain(self, theta: NaturalParam) -> bool:
        """True iff theta lies in the open natural parameter space."""
        self.check_shape(theta)
        return self._in_domain(theta)

    def require_natural(
        self,
        theta: NaturalParam,
        label: str = "natural parameter",
        exc: type[NaturalDomainError] = NaturalDomainError,
    ) -> None:
        if not self.in_natural_domain(theta):
            raise exc(f"{self.name}: {label} outside the natural domain")

    def require_support(self, x) -> None:
        if not self.in_support(x):
            raise SupportError(f"{self.name}: observation {x!r} outside the support")

    # -- generic density assembly --------------------------------------

    def log_density(self, theta: NaturalParam, x) -> float:
        """<t(x), theta> - F(theta) + k(x)."""
        self.require_natural(theta)
        self.require_support(x)
        stat = self.sufficient_stat(x)
        return stat.dot(theta) - self.log_normalizer(theta) + self.carrier(x)

    # -- carrier moments (identically trivial unless k(x) != 0) ---------

    def carrier_moment(self, theta: NaturalParam, alpha: float) -> float:
        """Expectation of exp((alpha-1) k(x)) under the alpha-scaled member."""
        return math.exp(self.log_carrier_moment(theta, alpha))

    def log_carrier_moment(self, theta: NaturalParam, alpha: float) -> float:
        """Log of carrier_moment; the scale-safe form used by the entropies."""
        if not (math.isfinite(alpha) and alpha > 0):
            raise DomainError(f"alpha must be > 0, got {alpha}")
        self.require_natural(theta)
        self.require_natural(theta.scaled(alpha), "alpha-scaled parameter", ScaledParameterError)
        return self._log_carrier_moment(theta, alpha)

    def _log_carrier_moment(self, theta: NaturalParam, alpha: float) -> float:
        return 0.0

    def carrier_expectation(self, theta: NaturalParam) -> float:
        """Expectation of k(x) under theta; zero for zero-carrier families."""
        self.require_natural(theta)
        return self._carrier_expectation(theta)

    def _carrier_expectation(self, theta: NaturalParam) -> float:
        return 0.0

    # -- coordinate packing helpers -------------------------------------

    def compose(self, coords: np.ndarray) -> NaturalParam:
        """Inverse of ``NaturalParam.flat`` for this family's shape."""
        coords = np.asarray(coords, dtype=float)
        if coords.size != self.order:
            raise ValueError(f"{self.name}: expected {self.order} coordinates")
        if self.matrix_dim == 0:
            return NaturalParam(coords)
        d = self.matrix_dim
        return NaturalParam(coords[: self.vector_dim], coords[self.vector_dim :].reshape(d, d))

    # -- abstract operations --------------------------------------------

    @abstractmethod
    def to_natural(self, params) -> NaturalParam: ...

    @abstractmethod
    def from_natural(self, theta: NaturalParam): ...

    @abstractmethod
    def _in_domain(self, theta: NaturalParam) -> bool: ...

    @abstractmethod
    def log_normalizer(self, theta: NaturalParam) -> float: ...

    @abstractmethod
    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam: ...

    @abstractmethod
    def grad_inverse(self, eta: NaturalParam) -> NaturalParam: ...

    @abstractmethod
    def sufficient_stat(self, x) -> NaturalParam: ...

    @abstractmethod
    def carrier(self, x) -> float: ...

    @abstractmethod
    def in_support(self, x) -> bool: ...

    @abstractmethod
    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        """Sufficient statistics of many observations, shape (n, order)."""

    @abstractmethod
    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        """Vectorized log-density over an array of observations."""

    @abstractmethod
    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        """n i.i.d. draws, deterministic for a given seed."""

    def _check_sample_args(self, theta: NaturalParam, n: int) -> None:
        self.require_natural(theta)
        if n < 1:
            raise ValueError(f"sample size must be >= 1, got {n}")

    def __repr__(self) -> str:  # pragma: no cover
        return f"<family {self.name!r} order={self.order}>"


# --------------------------------------------------------------------------
# Concrete families.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialDistFamily(Family):
    """Exponential distribution with rate > 0 on x >= 0."""

    name: ClassVar[str] = "exponential"
    vector_dim: ClassVar[int] = 1
    support: ClassVar[Support] = Support("nonneg-real")
    source_keys: ClassVar[tuple[str, ...]] = ("rate",)
    decomposition: ClassVar[dict[str, str]] = {
        "natural": "theta = -rate, theta < 0",
        "log_normalizer": "F(theta) = -log(-theta)",
        "sufficient_stat": "t(x) = x",
        "carrier": "k(x) = 0",
        "support": "x >= 0",
    }

    def to_natural(self, params: ExponentialParams) -> NaturalParam:
        if not isinstance(params, ExponentialParams):
            params = ExponentialParams(**_params_as_dict(params))
        return NaturalParam([-params.rate])

    def from_natural(self, theta: NaturalParam) -> ExponentialParams:
        self.require_natural(theta)
        return ExponentialParams(rate=-float(theta.vector[0]))

    def _in_domain(self, theta: NaturalParam) -> bool:
        t = float(theta.vector[0])
        return math.isfinite(t) and t < 0

    def log_normalizer(self, theta: NaturalParam) -> float:
        self.require_natural(theta)
        return -math.log(-float(theta.vector[0]))

    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam:
        self.require_natural(theta)
        return NaturalParam([-1.0 / float(theta.vector[0])])

    def grad_inverse(self, eta: NaturalParam) -> NaturalParam:
        e = float(np.atleast_1d(eta.vector)[0])
        if not (math.isfinite(e) and e > 0):
            raise ExpectationDomainError(f"{self.name}: mean statistic must be > 0, got {e}")
        return NaturalParam([-1.0 / e])

    def sufficient_stat(self, x) -> NaturalParam:
        self.require_support(x)
        return NaturalParam([float(x)])

    def carrier(self, x) -> float:
        self.require_support(x)
        return 0.0

    def in_support(self, x) -> bool:
        try:
            xf = float(x)
        except (TypeError, ValueError):
            return False
        return math.isfinite(xf) and xf >= 0

    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.asarray(xs, dtype=float).reshape(-1, 1)

    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        t = float(theta.vector[0])
        return t * np.asarray(xs, dtype=float) + math.log(-t)

    def window(self, theta: NaturalParam, nats: float) -> tuple[float, float]:
        rate = -float(theta.vector[0])
        return 0.0, nats / rate

    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        self._check_sample_args(theta, n)
        rng = np.random.default_rng(seed)
        return _exponential_draws(rng, n, -float(theta.vector[0]))


@dataclass(frozen=True)
class PoissonFamily(Family):
    """Poisson distribution on counts, the one nonzero-carrier family here."""

    name: ClassVar[str] = "poisson"
    vector_dim: ClassVar[int] = 1
    support: ClassVar[Support] = Support("nonneg-int")
    source_keys: ClassVar[tuple[str, ...]] = ("rate",)
    decomposition: ClassVar[dict[str, str]] = {
        "natural": "theta = log(rate), any real",
        "log_normalizer": "F(theta) = exp(theta)",
        "sufficient_stat": "t(x) = x",
        "carrier": "k(x) = -log x!",
        "support": "x in {0, 1, 2, ...}",
    }

    def to_natural(self, params: PoissonParams) -> NaturalParam:
        if not isinstance(params, PoissonParams):
            params = PoissonParams(**_params_as_dict(params))
        return NaturalParam([math.log(params.rate)])

    def from_natural(self, theta: NaturalParam) -> PoissonParams:
        self.require_natural(theta)
        return PoissonParams(rate=math.exp(float(theta.vector[0])))

    def _in_domain(self, theta: NaturalParam) -> bool:
        return math.isfinite(float(theta.vector[0]))

    def log_normalizer(self, theta: NaturalParam) -> float:
        self.require_natural(theta)
        return math.exp(float(theta.vector[0]))

    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam:
        self.require_natural(theta)
        return NaturalParam([math.exp(float(theta.vector[0]))])

    def grad_inverse(self, eta: NaturalParam) -> NaturalParam:
        e = float(np.atleast_1d(eta.vector)[0])
        if not (math.isfinite(e) and e > 0):
            raise ExpectationDomainError(f"{self.name}: mean statistic must be > 0, got {e}")
        return NaturalParam([math.log(e)])

    def sufficient_stat(self, x) -> NaturalParam:
        self.require_support(x)
        return NaturalParam([float(x)])

    def carrier(self, x) -> float:
        self.require_support(x)
        return -math.lgamma(float(x) + 1.0)

    def in_support(self, x) -> bool:
        return _is_integral(x) and float(x) >= 0

    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.asarray(xs, dtype=float).reshape(-1, 1)

    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        from scipy.special import gammaln

        t = float(theta.vector[0])
        ks = np.asarray(xs, dtype=float)
        return ks * t - math.exp(t) - gammaln(ks + 1.0)

    def _log_carrier_moment(self, theta: NaturalParam, alpha: float) -> float:
        if alpha == 1.0:
            return 0.0
        # E over the alpha-scaled member of (x!)^(1-alpha):
        #   exp(-rho) * sum_k rho^k / (k!)^alpha, with rho = exp(alpha*theta).
        # Summed in shifted log space: the raw terms can under- or overflow
        # (rho can reach rate^alpha) while the sum itself is well-scaled.
        log_rho = alpha * float(theta.vector[0])
        rho = math.exp(log_rho)
        # log-concave summand; its peak sits near the original rate e^theta
        peak = math.exp(float(theta.vector[0]))

        def log_term(k: int) -> float:
            return k * log_rho - rho - alpha * math.lgamma(k + 1.0)

        anchor = int(peak)
        shift = max(log_term(k) for k in range(max(0, anchor - 3), anchor + 4))
        total, _, _, _ = _kahan_sum_terms(
            lambda k: math.exp(log_term(k) - shift), peak, _SERIES_TERM_CUTOFF
        )
        return shift + math.log(total)

    def _carrier_expectation(self, theta: NaturalParam) -> float:
        # E[k(x)] = -E[log x!] under the member itself.
        rate = math.exp(float(theta.vector[0]))
        log_rate = float(theta.vector[0])

        def term(k: int) -> float:
            lg = math.lgamma(k + 1.0)
            return math.exp(k * log_rate - rate - lg) * lg

        total, _, _, _ = _kahan_sum_terms(term, rate, _SERIES_TERM_CUTOFF)
        return -total

    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        self._check_sample_args(theta, n)
        rate = math.exp(float(theta.vector[0]))
        rng = np.random.default_rng(seed)
        if rate <= _POISSON_KNUTH_MAX_RATE:
            return _poisson_knuth(rng, rate, n)
        return _poisson_ptrs(rng, rate, n)


@dataclass(frozen=True)
class BernoulliFamily(Family):
    """Bernoulli distribution on {0, 1}."""

    name: ClassVar[str] = "bernoulli"
    vector_dim: ClassVar[int] = 1
    support: ClassVar[Support] = Support("binary")
    source_keys: ClassVar[tuple[str, ...]] = ("p",)
    decomposition: ClassVar[dict[str, str]] = {
        "natural": "theta = log(p / (1-p)), any real",
        "log_normalizer": "F(theta) = log(1 + exp(theta))",
        "sufficient_stat": "t(x) = x",
        "carrier": "k(x) = 0",
        "support": "x in {0, 1}",
    }

    def to_natural(self, params: BernoulliParams) -> NaturalParam:
        if not isinstance(params, BernoulliParams):
            params = BernoulliParams(**_params_as_dict(params))
        return NaturalParam([math.log(params.p) - math.log1p(-params.p)])

    def from_natural(self, theta: NaturalParam) -> BernoulliParams:
        self.require_natural(theta)
        return BernoulliParams(p=_sigmoid(float(theta.vector[0])))

    def _in_domain(self, theta: NaturalParam) -> bool:
        return math.isfinite(float(theta.vector[0]))

    def log_normalizer(self, theta: NaturalParam) -> float:
        self.require_natural(theta)
        t = float(theta.vector[0])
        return max(t, 0.0) + math.log1p(math.exp(-abs(t)))

    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam:
        self.require_natural(theta)
        return NaturalParam([_sigmoid(float(theta.vector[0]))])

    def grad_inverse(self, eta: NaturalParam) -> NaturalParam:
        e = float(np.atleast_1d(eta.vector)[0])
        if not (math.isfinite(e) and 0.0 < e < 1.0):
            raise ExpectationDomainError(
                f"{self.name}: mean statistic must lie in (0, 1), got {e}"
            )
        return NaturalParam([math.log(e) - math.log1p(-e)])

    def sufficient_stat(self, x) -> NaturalParam:
        self.require_support(x)
        return NaturalParam([float(x)])

    def carrier(self, x) -> float:
        self.require_support(x)
        return 0.0

    def in_support(self, x) -> bool:
        return _is_integral(x) and float(x) in (0.0, 1.0)

    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.asarray(xs, dtype=float).reshape(-1, 1)

    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        return np.asarray(xs, dtype=float) * float(theta.vector[0]) - self.log_normalizer(theta)

    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        self._check_sample_args(theta, n)
        p = _sigmoid(float(theta.vector[0]))
        rng = np.random.default_rng(seed)
        return (rng.random(n) < p).astype(np.int64)


@dataclass(frozen=True)
class GaussianFamily(Family):
    """Univariate Gaussian, order 2."""

    name: ClassVar[str] = "gaussian"
    vector_dim: ClassVar[int] = 2
    support: ClassVar[Support] = Support("real")
    source_keys: ClassVar[tuple[str, ...]] = ("mu", "var")
    decomposition: ClassVar[dict[str, str]] = {
        "natural": "theta = (mu/var, -1/(2 var)), theta2 < 0",
        "log_normalizer": "F(theta) = -theta1^2/(4 theta2) + log(pi / -theta2)/2",
        "sufficient_stat": "t(x) = (x, x^2)",
        "carrier": "k(x) = 0",
        "support": "x real",
    }

    def to_natural(self, params: GaussianParams) -> NaturalParam:
        if not isinstance(params, GaussianParams):
            params = GaussianParams(**_params_as_dict(params))
        return NaturalParam([params.mu / params.var, -0.5 / params.var])

    def from_natural(self, theta: NaturalParam) -> GaussianParams:
        self.require_natural(theta)
        t1, t2 = (float(v) for v in theta.vector)
        var = -0.5 / t2
        return GaussianParams(mu=t1 * var, var=var)

    def _in_domain(self, theta: NaturalParam) -> bool:
        t1, t2 = (float(v) for v in theta.vector)
        return math.isfinite(t1) and math.isfinite(t2) and t2 < 0

    def log_normalizer(self, theta: NaturalParam) -> float:
        self.require_natural(theta)
        t1, t2 = (float(v) for v in theta.vector)
        # In natural coordinates F = -t1^2/(4 t2) + log(pi / -t2) / 2, which
        # equals mu^2/(2 var) + log(2 pi var) / 2 in source coordinates.
        return -t1 * t1 / (4.0 * t2) + 0.5 * (math.log(math.pi) - math.log(-t2))

    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam:
        self.require_natural(theta)
        t1, t2 = (float(v) for v in theta.vector)
        return NaturalParam([-t1 / (2.0 * t2), t1 * t1 / (4.0 * t2 * t2) - 1.0 / (2.0 * t2)])

    def grad_inverse(self, eta: NaturalParam) -> NaturalParam:
        e = np.atleast_1d(np.asarray(eta.vector, dtype=float))
        if e.size != 2:
            raise ValueError(f"{self.name}: expected 2 expectation coordinates")
        var = float(e[1] - e[0] * e[0])
        if not (math.isfinite(var) and var > 0):
            raise ExpectationDomainError(
                f"{self.name}: implied variance must be > 0, got {var}"
            )
        return self.to_natural(GaussianParams(mu=float(e[0]), var=var))

    def sufficient_stat(self, x) -> NaturalParam:
        self.require_support(x)
        xf = float(x)
        return NaturalParam([xf, xf * xf])

    def carrier(self, x) -> float:
        self.require_support(x)
        return 0.0

    def in_support(self, x) -> bool:
        try:
            xf = float(x)
        except (TypeError, ValueError):
            return False
        return math.isfinite(xf)

    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1)
        return np.column_stack([xs, xs * xs])

    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        t1, t2 = (float(v) for v in theta.vector)
        xs = np.asarray(xs, dtype=float)
        return t1 * xs + t2 * xs * xs - self.log_normalizer(theta)

    def window(self, theta: NaturalParam, nats: float) -> tuple[float, float]:
        p = self.from_natural(theta)
        half = math.sqrt(2.0 * nats * p.var)
        return p.mu - half, p.mu + half

    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        self._check_sample_args(theta, n)
        p = self.from_natural(theta)
        rng = np.random.default_rng(seed)
        return p.mu + math.sqrt(p.var) * _standard_normals(rng, n)


@dataclass(frozen=True)
class MultivariateGaussianFamily(Family):
    """d-dimensional Gaussian with composite (vector, matrix) parameters."""

    dim: int

    name: ClassVar[str] = "mvn"
    source_keys: ClassVar[tuple[str, ...]] = ("mu", "sigma")
    decomposition: ClassVar[dict[str, str]] = {
        "natural": "theta = (cov^-1 mu, -cov^-1/2), matrix block negative-definite",
        "log_normalizer": "F(v, M) = d/2 log(2 pi) - log det(-2M)/2 - v^T M^-1 v / 4",
        "sufficient_stat": "t(x) = (x, x x^T)",
        "carrier": "k(x) = 0",
        "support": "x in R^d",
    }

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"mvn dimension must be >= 1, got {self.dim}")

    @property
    def vector_dim(self) -> int:  # type: ignore[override]
        return self.dim

    @property
    def matrix_dim(self) -> int:  # type: ignore[override]
        return self.dim

    @property
    def support(self) -> Support:  # type: ignore[override]
        return Support("real-vector", self.dim)

    def _precision_chol(self, theta: NaturalParam) -> np.ndarray:
        """Cholesky factor of -2M (the precision matrix); raises if not PD."""
        a = -2.0 * theta.matrix
        try:
            return np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NaturalDomainError(
                f"{self.name}: matrix block is not negative-definite"
            ) from None

    def to_natural(self, params: MultivariateGaussianParams) -> NaturalParam:
        if not isinstance(params, MultivariateGaussianParams):
            d = _params_as_dict(params)
            params = MultivariateGaussianParams(mu=d["mu"], cov=d.get("cov", d.get("sigma")))
        chol = np.linalg.cholesky(params.cov)
        identity = np.eye(params.dim)
        inv_chol = solve_triangular(chol, identity, lower=True)
        precision = inv_chol.T @ inv_chol
        return NaturalParam(precision @ params.mu, -0.5 * precision)

    def from_natural(self, theta: NaturalParam) -> MultivariateGaussianParams:
        self.require_natural(theta)
        chol = self._precision_chol(theta)
        identity = np.eye(self.dim)
        inv_chol = solve_triangular(chol, identity, lower=True)
        cov = inv_chol.T @ inv_chol
        return MultivariateGaussianParams(mu=cov @ theta.vector, cov=cov)

    def _in_domain(self, theta: NaturalParam) -> bool:
        if not (np.all(np.isfinite(theta.vector)) and np.all(np.isfinite(theta.matrix))):
            return False
        try:
            np.linalg.cholesky(-2.0 * theta.matrix)
        except np.linalg.LinAlgError:
            return False
        return True

    def log_normalizer(self, theta: NaturalParam) -> float:
        self.require_natural(theta)
        chol = self._precision_chol(theta)
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        y = solve_triangular(chol, theta.vector, lower=True)
        return 0.5 * self.dim * _LOG_2PI - 0.5 * log_det + 0.5 * float(y @ y)

    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam:
        self.require_natural(theta)
        p = self.from_natural(theta)
        return NaturalParam(p.mu, p.cov + np.outer(p.mu, p.mu))

    def grad_inverse(self, eta: NaturalParam) -> NaturalParam:
        if eta.matrix is None or eta.vector.size != self.dim:
            raise ValueError(f"{self.name}: expectation parameter has the wrong shape")
        cov = eta.matrix - np.outer(eta.vector, eta.vector)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ExpectationDomainError(
                f"{self.name}: implied covariance is not positive-definite"
            ) from None
        return self.to_natural(MultivariateGaussianParams(mu=eta.vector, cov=cov))

    def sufficient_stat(self, x) -> NaturalParam:
        self.require_support(x)
        xv = np.asarray(x, dtype=float).reshape(-1)
        return NaturalParam(xv, np.outer(xv, xv))

    def carrier(self, x) -> float:
        self.require_support(x)
        return 0.0

    def in_support(self, x) -> bool:
        try:
            xv = np.asarray(x, dtype=float)
        except (TypeError, ValueError):
            return False
        return xv.shape == (self.dim,) and bool(np.all(np.isfinite(xv)))

    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1, self.dim)
        outer = np.einsum("ni,nj->nij", xs, xs)
        return np.concatenate([xs, outer.reshape(len(xs), -1)], axis=1)

    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1, self.dim)
        quad = np.einsum("ni,ij,nj->n", xs, theta.matrix, xs)
        return xs @ theta.vector + quad - self.log_normalizer(theta)

    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        self._check_sample_args(theta, n)
        p = self.from_natural(theta)
        rng = np.random.default_rng(seed)
        z = _standard_normals(rng, n * self.dim).reshape(n, self.dim)
        return p.mu + z @ np.linalg.cholesky(p.cov).T


@dataclass(frozen=True)
class CenteredLaplacianFamily(Family):
    """Zero-location Laplacian; the general-position case is not exponential."""

    name: ClassVar[str] = "laplacian"
    vector_dim: ClassVar[int] = 1
    support: ClassVar[Support] = Support("real")
    source_keys: ClassVar[tuple[str, ...]] = ("scale",)
    decomposition: ClassVar[dict[str, str]] = {
        "natural": "theta = -1/scale, theta < 0",
        "log_normalizer": "F(theta) = log 2 - log(-theta)",
        "sufficient_stat": "t(x) = |x|",
        "carrier": "k(x) = 0",
        "support": "x real",
    }

    def to_natural(self, params: LaplacianParams) -> NaturalParam:
        if not isinstance(params, LaplacianParams):
            params = LaplacianParams(**_params_as_dict(params))
        return NaturalParam([-1.0 / params.scale])

    def from_natural(self, theta: NaturalParam) -> LaplacianParams:
        self.require_natural(theta)
        return LaplacianParams(scale=-1.0 / float(theta.vector[0]))

    def _in_domain(self, theta: NaturalParam) -> bool:
        t = float(theta.vector[0])
        return math.isfinite(t) and t < 0

    def log_normalizer(self, theta: NaturalParam) -> float:
        self.require_natural(theta)
        return math.log(2.0) - math.log(-float(theta.vector[0]))

    def grad_log_normalizer(self, theta: NaturalParam) -> NaturalParam:
        self.require_natural(theta)
        return NaturalParam([-1.0 / float(theta.vector[0])])

    def grad_inverse(self, eta: NaturalParam) -> NaturalParam:
        e = float(np.atleast_1d(eta.vector)[0])
        if not (math.isfinite(e) and e > 0):
            raise ExpectationDomainError(
                f"{self.name}: mean absolute value must be > 0, got {e}"
            )
        return NaturalParam([-1.0 / e])

    def sufficient_stat(self, x) -> NaturalParam:
        self.require_support(x)
        return NaturalParam([abs(float(x))])

    def carrier(self, x) -> float:
        self.require_support(x)
        return 0.0

    def in_support(self, x) -> bool:
        try:
            xf = float(x)
        except (TypeError, ValueError):
            return False
        return math.isfinite(xf)

    def sufficient_stat_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(xs, dtype=float)).reshape(-1, 1)

    def log_density_batch(self, theta: NaturalParam, xs: np.ndarray) -> np.ndarray:
        t = float(theta.vector[0])
        return t * np.abs(np.asarray(xs, dtype=float)) - self.log_normalizer(theta)

    def window(self, theta: NaturalParam, nats: float) -> tuple[float, float]:
        scale = -1.0 / float(theta.vector[0])
        return -nats * scale, nats * scale

    def sample(self, theta: NaturalParam, n: int, seed: int) -> np.ndarray:
        self._check_sample_args(theta, n)
        scale = -1.0 / float(theta.vector[0])
        rng = np.random.default_rng(seed)
        magnitudes = scale * -np.log1p(-rng.random(n))
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return signs * magnitudes


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def _params_as_dict(params) -> dict:
    if isinstance(params, dict):
        return params
    raise TypeError(f"unsupported source-parameter object: {params!r}")


# --------------------------------------------------------------------------
# Registry.
# --------------------------------------------------------------------------

EXPONENTIAL = ExponentialDistFamily()
POISSON = PoissonFamily()
BERNOULLI = BernoulliFamily()
GAUSSIAN = GaussianFamily()
LAPLACIAN = CenteredLaplacianFamily()

_SCALAR_FAMILIES = {
    "exponential": EXPONENTIAL,
    "poisson": POISSON,
    "bernoulli": BERNOULLI,
    "gaussian": GAUSSIAN,
    "laplacian": LAPLACIAN,
}

_MVN_ALIASES = ("mvn", "gaussian-multivariate", "multivariate-gaussian")


def family_names() -> tuple[str, ...]:
    return tuple(_SCALAR_FAMILIES) + ("mvn",)


def get_family(name: str, dim: int | None = None) -> Family:
    """Look up a family by name; ``mvn`` requires an explicit dimension."""
    key = name.strip().lower().replace("_", "-")
    if key in _SCALAR_FAMILIES:
        return _SCALAR_FAMILIES[key]
    if key in _MVN_ALIASES:
        if dim is None:
            raise ValueError("the multivariate Gaussian family needs a dimension")
        return MultivariateGaussianFamily(int(dim))
    raise ValueError(f"unknown family {name!r}; known: {', '.join(family_names())}")
