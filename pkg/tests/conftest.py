"""Shared test helpers: family iteration and in-domain parameter generators.

Pair generators keep the two members close enough that every mixed
parameter alpha*theta + (1-alpha)*theta' with alpha in [0, 2] stays inside
the natural domain, so divergence tests at alpha = 2 never trip the domain
guard by construction.
"""

from __future__ import annotations

import subprocess
import sys

import numpy as np
import pytest

import efmeasures as em

SCALAR_FAMILY_NAMES = ("exponential", "poisson", "bernoulli", "gaussian", "laplacian")
ALL_FAMILY_NAMES = SCALAR_FAMILY_NAMES + ("mvn",)


def make_family(name: str) -> em.Family:
    return em.get_family(name, dim=2) if name == "mvn" else em.get_family(name)


def _random_cov(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    eig = rng.uniform(0.8, 1.25, size=dim)
    return (q * eig) @ q.T


def random_source(name: str, rng: np.random.Generator):
    """One random in-domain source parameter, kept off the domain boundary.

    Bernoulli draws avoid a window around p = 1/2, where the Renyi entropy
    is flat in alpha and limit-rate assertions would divide zero by zero.
    """
    if name == "exponential":
        return em.ExponentialParams(rate=float(rng.uniform(0.4, 2.5)))
    if name == "poisson":
        return em.PoissonParams(rate=float(rng.uniform(0.4, 8.0)))
    if name == "bernoulli":
        if rng.random() < 0.5:
            return em.BernoulliParams(p=float(rng.uniform(0.15, 0.44)))
        return em.BernoulliParams(p=float(rng.uniform(0.56, 0.85)))
    if name == "gaussian":
        return em.GaussianParams(
            mu=float(rng.uniform(-2, 2)), var=float(rng.uniform(0.6, 1.8))
        )
    if name == "laplacian":
        return em.LaplacianParams(scale=float(rng.uniform(0.5, 2.0)))
    if name == "mvn":
        return em.MultivariateGaussianParams(
            mu=rng.uniform(-1, 1, size=2), cov=_random_cov(rng)
        )
    raise ValueError(name)


def perturbed_source(name: str, src, rng: np.random.Generator):
    """A second member near src; scale-type parameters move by at most e^0.45."""
    factor = float(np.exp(rng.uniform(-0.45, 0.45)))
    if name == "exponential":
        return em.ExponentialParams(rate=src.rate * factor)
    if name == "poisson":
        return em.PoissonParams(rate=src.rate * factor)
    if name == "bernoulli":
        return random_source(name, rng)
    if name == "gaussian":
        return em.GaussianParams(mu=src.mu + float(rng.uniform(-1, 1)), var=src.var * factor)
    if name == "laplacian":
        return em.LaplacianParams(scale=src.scale * factor)
    if name == "mvn":
        return em.MultivariateGaussianParams(
            mu=src.mu + rng.uniform(-0.8, 0.8, size=2), cov=_random_cov(rng)
        )
    raise ValueError(name)


def random_theta(name: str, rng: np.random.Generator) -> em.NaturalParam:
    return make_family(name).to_natural(random_source(name, rng))


def random_theta_pair(name: str, rng: np.random.Generator):
    fam = make_family(name)
    src = random_source(name, rng)
    src2 = perturbed_source(name, src, rng)
    return fam.to_natural(src), fam.to_natural(src2)


@pytest.fixture(params=ALL_FAMILY_NAMES)
def family_name(request) -> str:
    return request.param


@pytest.fixture
def family(family_name) -> em.Family:
    return make_family(family_name)


def run_cli(*args: str, timeout: float = 300.0):
    """Run the CLI in a subprocess; returns (exit_code, stdout, stderr)."""
    proc = subprocess.run(
        [sys.executable, "-m", "efmeasures.cli", *args],
        capture_output=True,
        text=True,
        timeout=timeout,
    )
    return proc.returncode, proc.stdout, proc.stderr
