"""Univariate input distributions and their independence product.

Four absolutely continuous families are shipped: uniform, beta, Gaussian,
and truncated Gaussian. Each exposes a vectorized ``pdf``/``cdf``, a
``sample`` method driven by an externally owned :class:`numpy.random.Generator`,
and support queries. :class:`JointInputs` bundles the three model inputs
(initial size ``c``, growth factor ``a``, crowding coefficient ``b``) and
evaluates their joint density as the product of the marginals.

Density and CDF evaluation is pure and thread-safe; sampler state lives in
the caller's generator, so parallel sampling should use independently
seeded generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

__all__ = [
    "Uniform",
    "Beta",
    "Gaussian",
    "TruncatedGaussian",
    "Distribution",
    "JointInputs",
    "distribution_from_dict",
    "distribution_to_dict",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _standard_normal_cdf(z):
    return special.ndtr(z)


@dataclass(frozen=True)
class Uniform:
    """Uniform law on [lo, hi]."""

    lo: float
    hi: float

    kind = "uniform"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform requires lo < hi, got [{self.lo}, {self.hi}]")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def support(self):
        return (self.lo, self.hi)

    def effective_support(self, k: float = 8.0):
        return (self.lo, self.hi)

    def mean(self):
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class Beta:
    """Beta law on [0, 1] with shape parameters alpha, beta."""

    alpha: float
    beta: float

    kind = "beta"

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError(f"beta requires positive shapes, got ({self.alpha}, {self.beta})")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            logpdf = (
                (self.alpha - 1.0) * np.log(x)
                + (self.beta - 1.0) * np.log1p(-x)
                - special.betaln(self.alpha, self.beta)
            )
            vals = np.exp(logpdf)
        return np.where(inside, vals, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return special.betainc(self.alpha, self.beta, np.clip(x, 0.0, 1.0))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.beta(self.alpha, self.beta, size=size)

    def support(self):
        return (0.0, 1.0)

    def effective_support(self, k: float = 8.0):
        return (0.0, 1.0)

    def mean(self):
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian law; ``sigma`` is the standard deviation."""

    mu: float
    sigma: float

    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"gaussian requires sigma > 0, got {self.sigma}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * _SQRT_2PI)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _standard_normal_cdf((x - self.mu) / self.sigma)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mu, self.sigma, size=size)

    def support(self):
        return (-math.inf, math.inf)

    def effective_support(self, k: float = 8.0):
        # mass outside mu +- k*sigma is < 1e-15 for k >= 8
        return (self.mu - k * self.sigma, self.mu + k * self.sigma)

    def mean(self):
        return self.mu


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian restricted to [lo, hi] and renormalized.

    ``mu`` and ``sigma`` are the location and scale of the parent Gaussian,
    not the moments of the truncated law.
    """

    mu: float
    sigma: float
    lo: float
    hi: float

    kind = "truncated_gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"truncated gaussian requires sigma > 0, got {self.sigma}")
        if not self.lo < self.hi:
            raise ValueError(
                f"truncated gaussian requires lo < hi, got [{self.lo}, {self.hi}]"
            )
        mass = self._parent_mass()
        if mass <= 0.0:
            raise ValueError("truncation interval carries no Gaussian mass")

    def _parent_mass(self) -> float:
        zlo = (self.lo - self.mu) / self.sigma
        zhi = (self.hi - self.mu) / self.sigma
        return float(_standard_normal_cdf(zhi) - _standard_normal_cdf(zlo))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        base = np.exp(-0.5 * z * z) / (self.sigma * _SQRT_2PI * self._parent_mass())
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, base, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        zlo = (self.lo - self.mu) / self.sigma
        z = (np.clip(x, self.lo, self.hi) - self.mu) / self.sigma
        return (_standard_normal_cdf(z) - _standard_normal_cdf(zlo)) / self._parent_mass()

    def sample(self, rng: np.random.Generator, size=None):
        # inverse-CDF sampling through the parent Gaussian quantile function
        zlo = (self.lo - self.mu) / self.sigma
        zhi = (self.hi - self.mu) / self.sigma
        plo = _standard_normal_cdf(zlo)
        phi = _standard_normal_cdf(zhi)
        u = rng.uniform(plo, phi, size=size)
        return self.mu + self.sigma * special.ndtri(u)

    def support(self):
        return (self.lo, self.hi)

    def effective_support(self, k: float = 8.0):
        return (max(self.lo, self.mu - k * self.sigma), min(self.hi, self.mu + k * self.sigma))

    def mean(self):
        zlo = (self.lo - self.mu) / self.sigma
        zhi = (self.hi - self.mu) / self.sigma
        phi = lambda z: math.exp(-0.5 * z * z) / _SQRT_2PI
        return self.mu + self.sigma * (phi(zlo) - phi(zhi)) / self._parent_mass()


Distribution = Union[Uniform, Beta, Gaussian, TruncatedGaussian]

_KINDS = {cls.kind: cls for cls in (Uniform, Beta, Gaussian, TruncatedGaussian)}

_FIELDS = {
    "uniform": ("lo", "hi"),
    "beta": ("alpha", "beta"),
    "gaussian": ("mu", "sigma"),
    "truncated_gaussian": ("mu", "sigma", "lo", "hi"),
}


def distribution_from_dict(spec: dict) -> Distribution:
    """Build a distribution from a config literal like ``{"kind": "uniform", "lo": 0, "hi": 1}``."""
    if "kind" not in spec:
        raise ValueError("distribution literal needs a 'kind' field")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}; expected one of {sorted(_KINDS)}")
    fields = _FIELDS[kind]
    missing = [f for f in fields if f not in spec]
    if missing:
        raise ValueError(f"distribution kind {kind!r} is missing fields {missing}")
    extra = [k for k in spec if k not in fields and k != "kind"]
    if extra:
        raise ValueError(f"distribution kind {kind!r} got unknown fields {extra}")
    return _KINDS[kind](**{f: float(spec[f]) for f in fields})


def distribution_to_dict(d: Distribution) -> dict:
    out = {"kind": d.kind}
    out.update({f: getattr(d, f) for f in _FIELDS[d.kind]})
    return out


@dataclass(frozen=True)
class JointInputs:
    """Random inputs (C, A, B) as an independence product.

    ``c`` is the initial population size, ``a`` the growth factor, ``b``
    the crowding coefficient. The joint density is the product of the
    marginals; downstream integrators consume only :meth:`joint_density`,
    so they stay agnostic of the independence construction.
    """

    c: Distribution
    a: Distribution
    b: Distribution

    def joint_density(self, c, a, b):
        return self.c.pdf(c) * self.a.pdf(a) * self.b.pdf(b)

    def validity_mass(self) -> float:
        """Probability that a draw satisfies a > 1, b > 0, c > 0."""
        p_a = 1.0 - float(self.a.cdf(1.0))
        p_b = 1.0 - float(self.b.cdf(0.0))
        p_c = 1.0 - float(self.c.cdf(0.0))
        return p_a * p_b * p_c

    def sample(self, rng: np.random.Generator, size: int):
        """Raw draws of (c, a, b); positivity constraints are not enforced here."""
        return (
            np.asarray(self.c.sample(rng, size)),
            np.asarray(self.a.sample(rng, size)),
            np.asarray(self.b.sample(rng, size)),
        )
