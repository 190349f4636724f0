"""Parametric noise families for the random propagation delay.

Each family exposes exact closed-form pdf/cdf/log-pdf, survival and
log-survival functions, the density mode and its unimodality class, an
explicit-stream sampler, and (where the distribution has one) a cumulant
generating function with its finiteness domain, mean and variance.

Family instances are frozen dataclasses: immutable after construction and
safe to share between threads; sampling takes the caller's Generator so
there is no hidden global RNG state.
"""

from __future__ import annotations

import enum
import math
import re
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .numerics import Interval, find_root
from .special import erfc, erfc_inv, log_norm_cdf, norm_cdf

__all__ = [
    "UnimodalClass",
    "ModeInfo",
    "CgfSpec",
    "NoiseModel",
    "Uniform",
    "Exponential",
    "InverseGaussian",
    "Levy",
    "parse_noise",
    "format_noise",
]

_LOG_2PI = math.log(2.0 * math.pi)

# integer codes consumed by the simulation kernels
FAM_UNIFORM = 0
FAM_EXPONENTIAL = 1
FAM_INVERSE_GAUSSIAN = 2
FAM_LEVY = 3


class UnimodalClass(enum.Enum):
    ZERO_MODE = "ZeroMode"
    POSITIVE_MODE_POSITIVE_LIMIT = "PositiveModePositiveLimit"
    POSITIVE_MODE_ZERO_LIMIT = "PositiveModeZeroLimit"


@dataclass(frozen=True)
class ModeInfo:
    mode: float
    density_at_zero_limit: float
    unimodal_class: UnimodalClass


@dataclass(frozen=True)
class CgfSpec:
    """Cumulant generating function with its finiteness domain.

    domain.lo may be -inf; Lambda(0) = 0 always.
    """

    domain: Interval
    lam: Callable[[float], float]
    mean: float
    variance: float


class NoiseModel:
    """Common surface of the four delay families (subclass per family)."""

    def pdf(self, z):
        return np.exp(self.logpdf(z)) if isinstance(z, np.ndarray) else math.exp(self.logpdf(z))

    def logpdf(self, z):
        raise NotImplementedError

    def cdf(self, z):
        raise NotImplementedError

    def sf(self, z):
        return 1.0 - self.cdf(z)

    def log_sf(self, z: float) -> float:
        s = self.sf(z)
        return math.log(s) if s > 0.0 else -math.inf

    def support(self) -> Interval:
        raise NotImplementedError

    def mode_info(self) -> ModeInfo:
        raise NotImplementedError

    def cgf_spec(self) -> CgfSpec | None:
        """None signals an undefined CGF (heavy tails, infinite mean)."""
        return None

    def sample(self, n, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def dlogpdf(self, z: float) -> float:
        """d/dz log pdf on the open support interior."""
        raise NotImplementedError

    def lemma1_ratio(self, z: float) -> float:
        """pdf'(z) / pdf(z)^2 = (d/dz log pdf) / pdf, support interior only."""
        lo = self.support().lo
        if not z > lo:
            raise ValueError(f"z={z} is not in the open support interior")
        p = self.pdf(z)
        d = self.dlogpdf(z)
        if p == 0.0:
            return math.copysign(math.inf, d)
        return d / p

    def quantile(self, q: float) -> float:
        """Numeric inverse CDF by bracketed root-finding (generic path)."""
        if not 0.0 < q < 1.0:
            raise ValueError("quantile order must be in (0, 1)")
        lo = self.support().lo
        hi = lo + 1.0
        while self.cdf(hi) < q:
            hi = lo + 2.0 * (hi - lo)
        eps = 1e-12 * (1.0 + abs(hi))
        x, _ = find_root(lambda z: self.cdf(z) - q, Interval(lo + eps, hi), tol=1e-12)
        return x

    def median(self) -> float:
        return self.quantile(0.5)

    def kernel_params(self) -> tuple[int, float, float, float, float]:
        """(family code, p0..p3) consumed by the simulation kernels."""
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(NoiseModel):
    """Uniform delay on [0, b].

    Violates the continuity/differentiability assumption at its support
    endpoints; derivative-based quantities are defined on the open
    interior only, which is all the closed-form results need.
    """

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("uniform upper bound b must be > 0")

    def logpdf(self, z):
        if isinstance(z, np.ndarray):
            out = np.full(z.shape, -np.inf)
            out[(z >= 0.0) & (z <= self.b)] = -np.log(self.b)
            return out
        return -math.log(self.b) if 0.0 <= z <= self.b else -math.inf

    def cdf(self, z):
        if isinstance(z, np.ndarray):
            return np.clip(z / self.b, 0.0, 1.0)
        return min(max(z / self.b, 0.0), 1.0)

    def log_sf(self, z: float) -> float:
        if z <= 0.0:
            return 0.0
        if z >= self.b:
            return -math.inf
        return math.log1p(-z / self.b)

    def support(self) -> Interval:
        return Interval(0.0, self.b)

    def mode_info(self) -> ModeInfo:
        # flat density: the maximizer set is all of [0, b]; mode taken at 0
        return ModeInfo(0.0, 1.0 / self.b, UnimodalClass.ZERO_MODE)

    def cgf_spec(self) -> CgfSpec:
        b = self.b

        def lam(t: float) -> float:
            x = t * b
            if abs(x) < 1e-4:
                return x / 2.0 + x * x / 24.0 - x**4 / 2880.0
            if x > 0:
                return x + math.log1p(-math.exp(-x)) - math.log(x)
            return math.log1p(-math.exp(x)) - math.log(-x)

        return CgfSpec(Interval(-math.inf, math.inf), lam, b / 2.0, b * b / 12.0)

    def sample(self, n, rng):
        return rng.random(n) * self.b

    def dlogpdf(self, z: float) -> float:
        if not 0.0 < z < self.b:
            raise ValueError(f"z={z} outside the open support (0, {self.b})")
        return 0.0

    def median(self) -> float:
        return self.b / 2.0

    def kernel_params(self):
        return (FAM_UNIFORM, self.b, math.log(self.b), 0.0, 0.0)


@dataclass(frozen=True)
class Exponential(NoiseModel):
    """Exponential delay with rate b (mean 1/b)."""

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("exponential rate b must be > 0")

    def logpdf(self, z):
        if isinstance(z, np.ndarray):
            out = np.full(z.shape, -np.inf)
            m = z >= 0.0
            out[m] = math.log(self.b) - self.b * z[m]
            return out
        return math.log(self.b) - self.b * z if z >= 0.0 else -math.inf

    def cdf(self, z):
        if isinstance(z, np.ndarray):
            return np.where(z >= 0.0, -np.expm1(-self.b * np.maximum(z, 0.0)), 0.0)
        return -math.expm1(-self.b * z) if z >= 0.0 else 0.0

    def sf(self, z):
        if isinstance(z, np.ndarray):
            return np.where(z >= 0.0, np.exp(-self.b * np.maximum(z, 0.0)), 1.0)
        return math.exp(-self.b * z) if z >= 0.0 else 1.0

    def log_sf(self, z: float) -> float:
        return -self.b * z if z >= 0.0 else 0.0

    def support(self) -> Interval:
        return Interval(0.0, math.inf)

    def mode_info(self) -> ModeInfo:
        return ModeInfo(0.0, self.b, UnimodalClass.ZERO_MODE)

    def cgf_spec(self) -> CgfSpec:
        b = self.b

        def lam(t: float) -> float:
            if t >= b:
                return math.inf
            return -math.log1p(-t / b)

        return CgfSpec(Interval(-math.inf, b), lam, 1.0 / b, 1.0 / (b * b))

    def sample(self, n, rng):
        # inverse CDF on one uniform per sample (not the ziggurat)
        return -np.log1p(-rng.random(n)) / self.b

    def dlogpdf(self, z: float) -> float:
        if not z > 0.0:
            raise ValueError(f"z={z} outside the open support")
        return -self.b

    def median(self) -> float:
        return math.log(2.0) / self.b

    def kernel_params(self):
        return (FAM_EXPONENTIAL, self.b, math.log(self.b), 0.0, 0.0)


@dataclass(frozen=True)
class InverseGaussian(NoiseModel):
    """Inverse-Gaussian delay: first passage of drift-diffusion.

    mu is the mean, b the shape parameter.
    """

    mu: float
    b: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("inverse-Gaussian mean mu must be > 0")
        if not self.b > 0:
            raise ValueError("inverse-Gaussian shape b must be > 0")

    def logpdf(self, z):
        c = 0.5 * (math.log(self.b) - _LOG_2PI)
        if isinstance(z, np.ndarray):
            out = np.full(z.shape, -np.inf)
            m = z > 0.0
            zm = z[m]
            out[m] = c - 1.5 * np.log(zm) - self.b * (zm - self.mu) ** 2 / (2.0 * self.mu**2 * zm)
            return out
        if z <= 0.0:
            return -math.inf
        return c - 1.5 * math.log(z) - self.b * (z - self.mu) ** 2 / (2.0 * self.mu**2 * z)

    def _cdf_scalar(self, z: float) -> float:
        if z <= 0.0:
            return 0.0
        s = math.sqrt(self.b / z)
        # second term computed in log space: exp(2b/mu) overflows first
        t1 = norm_cdf(s * (z / self.mu - 1.0))
        log_t2 = 2.0 * self.b / self.mu + log_norm_cdf(-s * (z / self.mu + 1.0))
        return min(t1 + math.exp(log_t2), 1.0)

    def cdf(self, z):
        if isinstance(z, np.ndarray):
            return np.array([self._cdf_scalar(float(v)) for v in z])
        return self._cdf_scalar(z)

    def support(self) -> Interval:
        return Interval(0.0, math.inf)

    def mode_info(self) -> ModeInfo:
        r = self.mu / self.b
        mode = self.mu * (math.sqrt(1.0 + 2.25 * r * r) - 1.5 * r)
        return ModeInfo(mode, 0.0, UnimodalClass.POSITIVE_MODE_ZERO_LIMIT)

    def cgf_spec(self) -> CgfSpec:
        mu, b = self.mu, self.b
        hi = b / (2.0 * mu * mu)

        def lam(t: float) -> float:
            if t > hi:
                return math.inf
            return (b / mu) * (1.0 - math.sqrt(1.0 - 2.0 * mu * mu * t / b))

        return CgfSpec(Interval(-math.inf, hi), lam, mu, mu**3 / b)

    def sample(self, n, rng):
        # transform method: one normal and one uniform draw per sample
        nu = rng.standard_normal(n)
        y = nu * nu
        x = (
            self.mu
            + self.mu**2 * y / (2.0 * self.b)
            - self.mu / (2.0 * self.b) * np.sqrt(4.0 * self.mu * self.b * y + self.mu**2 * y * y)
        )
        u = rng.random(n)
        return np.where(u <= self.mu / (self.mu + x), x, self.mu**2 / x)

    def dlogpdf(self, z: float) -> float:
        if not z > 0.0:
            raise ValueError(f"z={z} outside the open support")
        return -1.5 / z + self.b / (2.0 * z * z) - self.b / (2.0 * self.mu**2)

    def kernel_params(self):
        c0 = 0.5 * (math.log(self.b) - _LOG_2PI)
        return (FAM_INVERSE_GAUSSIAN, self.mu, self.b, c0, self.b / (2.0 * self.mu**2))


@dataclass(frozen=True)
class Levy(NoiseModel):
    """Levy delay: first passage of pure diffusion.

    mu is a location parameter (not the mean: the mean is infinite), b the
    scale. No CGF exists, which is what forces the linear detector's zero
    diversity gain.
    """

    mu: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("levy scale b must be > 0")
        if self.mu < 0:
            raise ValueError("levy location mu must be >= 0 (causal delays)")

    def logpdf(self, z):
        c = 0.5 * (math.log(self.b) - _LOG_2PI)
        if isinstance(z, np.ndarray):
            out = np.full(z.shape, -np.inf)
            m = z > self.mu
            w = z[m] - self.mu
            out[m] = c - 1.5 * np.log(w) - self.b / (2.0 * w)
            return out
        if z <= self.mu:
            return -math.inf
        w = z - self.mu
        return c - 1.5 * math.log(w) - self.b / (2.0 * w)

    def cdf(self, z):
        if isinstance(z, np.ndarray):
            out = np.zeros(z.shape)
            m = z > self.mu
            out[m] = erfc(np.sqrt(self.b / (2.0 * (z[m] - self.mu))))
            return out
        if z <= self.mu:
            return 0.0
        return math.erfc(math.sqrt(self.b / (2.0 * (z - self.mu))))

    def sf(self, z):
        if isinstance(z, np.ndarray):
            out = np.ones(z.shape)
            m = z > self.mu
            out[m] = np.frompyfunc(math.erf, 1, 1)(
                np.sqrt(self.b / (2.0 * (z[m] - self.mu)))
            ).astype(float)
            return out
        if z <= self.mu:
            return 1.0
        return math.erf(math.sqrt(self.b / (2.0 * (z - self.mu))))

    def log_sf(self, z: float) -> float:
        return math.log(self.sf(z)) if z > self.mu else 0.0

    def support(self) -> Interval:
        return Interval(self.mu, math.inf)

    def mode_info(self) -> ModeInfo:
        return ModeInfo(self.mu + self.b / 3.0, 0.0, UnimodalClass.POSITIVE_MODE_ZERO_LIMIT)

    def sample(self, n, rng):
        g = rng.standard_normal(n)
        return self.mu + self.b / (g * g)

    def dlogpdf(self, z: float) -> float:
        if not z > self.mu:
            raise ValueError(f"z={z} outside the open support")
        w = z - self.mu
        return -1.5 / w + self.b / (2.0 * w * w)

    def median(self) -> float:
        return self.mu + self.b / (2.0 * erfc_inv(0.5) ** 2)

    def kernel_params(self):
        c0 = 0.5 * (math.log(self.b) - _LOG_2PI)
        return (FAM_LEVY, self.mu, self.b, c0, 0.0)


_SPEC_RE = re.compile(r"^\s*([a-z]+)\s*\(\s*([^)]*)\s*\)\s*$")
_FAMILIES = {
    "uniform": (Uniform, ("b",)),
    "exp": (Exponential, ("b",)),
    "ig": (InverseGaussian, ("mu", "b")),
    "levy": (Levy, ("mu", "b")),
}


def parse_noise(spec: str) -> NoiseModel:
    """Parse 'uniform(b=..)', 'exp(b=..)', 'ig(mu=..,b=..)', 'levy(mu=..,b=..)'.

    Case-insensitive; keys may come in any order and unknown keys are
    rejected.
    """
    m = _SPEC_RE.match(spec.lower())
    if not m:
        raise ValueError(f"cannot parse noise spec {spec!r}")
    name, body = m.group(1), m.group(2)
    if name not in _FAMILIES:
        raise ValueError(f"unknown noise family {name!r}")
    cls, keys = _FAMILIES[name]
    kwargs = {}
    if body.strip():
        for item in body.split(","):
            if "=" not in item:
                raise ValueError(f"malformed parameter {item!r} in {spec!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            if k not in keys:
                raise ValueError(f"unknown parameter {k!r} for family {name!r}")
            if k in kwargs:
                raise ValueError(f"duplicate parameter {k!r} in {spec!r}")
            kwargs[k] = float(v)
    return cls(**kwargs)


def format_noise(model: NoiseModel) -> str:
    """Canonical spec string; parse_noise(format_noise(m)) == m."""
    if isinstance(model, Uniform):
        return f"uniform(b={model.b!r})"
    if isinstance(model, Exponential):
        return f"exp(b={model.b!r})"
    if isinstance(model, InverseGaussian):
        return f"ig(mu={model.mu!r},b={model.b!r})"
    if isinstance(model, Levy):
        return f"levy(mu={model.mu!r},b={model.b!r})"
    raise TypeError(f"not a noise model: {model!r}")
