"""Analytic diversity-gain engine.

Computes the three error exponents for binary signalling at spacing delta:

* ML detector: the Chernoff information between the delay density and its
  shifted copy, by adaptive quadrature plus 1-D minimization over the
  tilting exponent s.
* linear (sample-mean) detector: the balanced value of the Cramer rate
  function on either side of the decision threshold mean + alpha; zero
  when the noise has no CGF (heavy tails), infinite when the supports of
  the two hypotheses' means never overlap.
* first-arrival detector: -log survival(delta), together with the finite-M
  decision threshold theta_M and the exact finite-M error probability.

Also houses the unimodality certificate for the first-arrival density
(monotone-ratio grid check plus the M0 bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    Exponential,
    InverseGaussian,
    Levy,
    NoiseModel,
    Uniform,
    UnimodalClass,
)
from .numerics import (
    Interval,
    NoRootError,
    SolverDiagnostics,
    find_root,
    integrate,
    legendre_transform,
    minimize_1d,
)

__all__ = [
    "Exponent",
    "ChernoffResult",
    "LinearResult",
    "FAThreshold",
    "UnimodalityReport",
    "DiversityReport",
    "chernoff_diversity",
    "linear_diversity",
    "fa_diversity",
    "fa_threshold",
    "fa_threshold_family",
    "fa_error_probability",
    "unimodality_certificate",
    "ClosedForms",
    "closed_form_diversity",
    "rate_function",
    "ig_rate_function",
    "diversity_report",
]

QUAD_REL_TOL = 1e-9
ROOT_TOL = 1e-10
MIN_TOL = 1e-8


@dataclass(frozen=True)
class Exponent:
    """A diversity exponent: a finite nonnegative value or a tagged infinity.

    Reports never carry float('inf'); the tag is explicit.
    """

    value: float | None
    infinite: bool = False

    @classmethod
    def of(cls, x: float) -> "Exponent":
        if math.isinf(x):
            return cls(None, True)
        return cls(float(x), False)

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def __repr__(self) -> str:
        return "Exponent(infinite)" if self.infinite else f"Exponent({self.value!r})"


@dataclass(frozen=True)
class ChernoffResult:
    d: float  # may be math.inf internally (zero-error regime)
    s_star: float
    diagnostics: SolverDiagnostics


@dataclass(frozen=True)
class LinearResult:
    d: float  # 0.0 when no CGF exists, math.inf when no balance point exists
    alpha: float | None
    diagnostics: SolverDiagnostics


@dataclass(frozen=True)
class FAThreshold:
    m: int
    theta: float
    boundary: bool  # True when the threshold equation had no root
    diagnostics: SolverDiagnostics | None = None


@dataclass(frozen=True)
class UnimodalityReport:
    unimodal_class: UnimodalClass
    epsilon: float
    xi: float | None
    m0: int
    certified: bool
    violation_at: float | None = None


@dataclass(frozen=True)
class DiversityReport:
    d_ml: Exponent
    d_fa: Exponent
    d_lin: Exponent
    s_star: float | None
    alpha: float | None
    ml_diagnostics: SolverDiagnostics | None
    lin_diagnostics: SolverDiagnostics | None


def _overlap(noise: NoiseModel, delta: float) -> Interval | None:
    """Intersection of the supports of pdf(y) and pdf(y - delta)."""
    s = noise.support()
    lo = s.lo + delta
    if lo >= s.hi:
        return None
    return Interval(lo, s.hi)


def chernoff_diversity(
    noise: NoiseModel,
    delta: float,
    rel_tol: float = QUAD_REL_TOL,
    s_tol: float = MIN_TOL,
) -> ChernoffResult:
    """Chernoff information between the delay density and its delta-shift.

    Minimizes log of the s-tilted overlap integral over s in [0, 1]; the
    integral runs over the intersection of the two shifted supports. An
    empty intersection means the hypotheses are perfectly separable and
    the exponent is reported as infinite.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    dom = _overlap(noise, delta)
    if dom is None:
        return ChernoffResult(math.inf, 1.0, SolverDiagnostics(0, 0.0, True))

    evals = 0

    def objective(s: float) -> float:
        nonlocal evals
        evals += 1

        def integrand(y):
            return np.exp(s * noise.logpdf(y) + (1.0 - s) * noise.logpdf(y - delta))

        return math.log(integrate(integrand, dom, rel_tol=rel_tol))

    s_star, val = minimize_1d(objective, Interval(0.0, 1.0), tol=s_tol)
    return ChernoffResult(-val, s_star, SolverDiagnostics(evals, s_tol, True))


def rate_function(noise: NoiseModel, v: float) -> float:
    """Cramer rate function Lambda*(v) via the numerical Legendre transform."""
    spec = noise.cgf_spec()
    if spec is None:
        raise ValueError("noise has no cumulant generating function")
    return legendre_transform(spec.lam, v, domain=spec.domain)


def linear_diversity(noise: NoiseModel, delta: float, tol: float = ROOT_TOL) -> LinearResult:
    """Exponent of the sample-mean detector.

    Balances the rate function across the two hypotheses: finds alpha in
    (max(delta - mu, 0), delta) with Lambda*(mu + alpha) equal to
    Lambda*(mu - delta + alpha). No CGF -> exponent 0 (heavy-tailed noise
    defeats linear processing); no balance point -> the decision regions
    separate and the exponent is infinite.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    spec = noise.cgf_spec()
    if spec is None:
        return LinearResult(0.0, None, SolverDiagnostics(0, 0.0, True))
    mu = spec.mean

    def balance(alpha: float) -> float:
        right = legendre_transform(spec.lam, mu + alpha, domain=spec.domain)
        left = legendre_transform(spec.lam, mu - delta + alpha, domain=spec.domain)
        if math.isinf(right) and math.isinf(left):
            return 0.0  # both tails impossible: treated as balanced
        return right - left

    lo = max(delta - mu, 0.0)
    hi = delta
    inset = 1e-9 * (hi - lo)
    try:
        alpha, diag = find_root(balance, Interval(lo + inset, hi - inset), tol=tol)
    except NoRootError:
        return LinearResult(math.inf, None, SolverDiagnostics(0, 0.0, True))
    d = legendre_transform(spec.lam, mu + alpha, domain=spec.domain)
    return LinearResult(d, alpha, diag)


def fa_diversity(noise: NoiseModel, delta: float) -> float:
    """Exponent of the first-arrival detector: -log survival(delta)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    ls = noise.log_sf(delta)
    if ls == -math.inf:
        return math.inf
    return -ls


def _threshold_equation(noise: NoiseModel, delta: float, m: int):
    def h(y: float) -> float:
        return (
            noise.logpdf(y)
            - noise.logpdf(y - delta)
            - (m - 1) * (noise.log_sf(y - delta) - noise.log_sf(y))
        )

    return h


def fa_threshold(
    noise: NoiseModel,
    delta: float,
    m: int,
    tol: float = 1e-13,
    hi: float | None = None,
) -> FAThreshold:
    """Finite-M decision threshold of the first-arrival detector.

    Solves the density-ratio equation on [delta + eta, delta + mode]; a
    missing root (zero-mode noise, or the ratio already below one) pins
    the threshold to delta. `hi` optionally tightens the upper bracket,
    which the family computation uses to enforce monotonicity in M.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not delta >= 0:
        raise ValueError("delta must be nonnegative")
    lo = noise.support().lo
    mode = noise.mode_info().mode - lo
    if mode <= 0.0:
        return FAThreshold(m, lo + delta, True)
    # bracket sits above lo + delta so both shifted densities are positive
    eta = 1e-12 * (delta + noise.mode_info().mode)
    bottom = lo + delta + eta
    top = lo + delta + mode if hi is None else min(hi, lo + delta + mode)
    if top <= bottom:
        return FAThreshold(m, lo + delta, True)
    h = _threshold_equation(noise, delta, m)
    try:
        theta, diag = find_root(h, Interval(bottom, top), tol=tol)
    except NoRootError:
        return FAThreshold(m, lo + delta, True)
    return FAThreshold(m, theta, False, diag)


def fa_threshold_family(
    noise: NoiseModel,
    delta: float,
    ms: "list[int] | np.ndarray",
    tol: float = 1e-13,
) -> list[FAThreshold]:
    """Thresholds over an increasing M grid.

    The root moves toward delta as M grows (the survival-ratio side of the
    threshold equation grows with M), so each solve reuses the previous
    threshold (plus a 1e-12 slack) as its upper bracket. This makes the
    computed family structurally nonincreasing.
    """
    ms = list(ms)
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError("M grid must be strictly increasing")
    out: list[FAThreshold] = []
    hi: float | None = None
    for m in ms:
        th = fa_threshold(noise, delta, m, tol=tol, hi=hi)
        out.append(th)
        hi = th.theta + 1e-12
    return out


def fa_error_probability(noise: NoiseModel, delta: float, m: int) -> float:
    """Exact error probability of the first-arrival detector at M = m.

    0.5[(survival(theta))^M + 1 - (survival(theta - delta))^M], with the
    powers formed in log space so large M cannot underflow prematurely.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if delta == 0.0:
        return 0.5
    theta = fa_threshold(noise, delta, m).theta
    miss = m * noise.log_sf(theta)
    false_alarm = -math.expm1(m * noise.log_sf(theta - delta))
    return 0.5 * (math.exp(miss) + false_alarm)


def _log_lemma1_ratio(noise: NoiseModel, z: float) -> float:
    """log of pdf'/pdf^2 where pdf' > 0; stable for z deep near zero."""
    d = noise.dlogpdf(z)
    if d <= 0.0:
        return -math.inf
    return math.log(d) - noise.logpdf(z)


def _m0_ratio(noise: NoiseModel, z: float) -> float:
    """pdf'(z) (1 - F(z)) / pdf(z)^2, the quantity bounding M0."""
    d = noise.dlogpdf(z)
    log_p = noise.logpdf(z)
    if d <= 0.0:
        return d * math.exp(noise.log_sf(z) - log_p)
    return math.exp(math.log(d) + noise.log_sf(z) - log_p)


def unimodality_certificate(
    noise: NoiseModel,
    grid_points: int = 400,
) -> UnimodalityReport:
    """Certificate that the first-arrival density is unimodal for M > M0.

    Zero-mode densities are unimodal for every M (M0 = 1). For a positive
    mode with a zero density limit at the support edge the certificate
    checks that pdf'/pdf^2 decreases monotonically on (0, eps] with
    eps = mode/2 (log-spaced grid over six decades, compared in the log
    domain), then bounds M0 by the maximum of pdf'(1-F)/pdf^2 over
    z > eps, located by a grid scan refined with golden-section. A
    positive density limit at the edge needs no monotonicity condition;
    only the bound is computed, over (0, mode].
    """
    info = noise.mode_info()
    lo = noise.support().lo
    mode = info.mode - lo

    if info.unimodal_class is UnimodalClass.ZERO_MODE:
        return UnimodalityReport(info.unimodal_class, 0.0, None, 1, True)

    eps = mode / 2.0

    if info.unimodal_class is UnimodalClass.POSITIVE_MODE_ZERO_LIMIT:
        zs = lo + np.logspace(math.log10(eps) - 6.0, math.log10(eps), grid_points)
        vals = np.array([_log_lemma1_ratio(noise, z) for z in zs])
        bad = np.nonzero(np.diff(vals) >= 0.0)[0]
        if bad.size:
            return UnimodalityReport(
                info.unimodal_class, eps, None, 0, False, violation_at=float(zs[bad[0] + 1])
            )
        search_lo = eps * (1.0 + 1e-9)
    else:
        search_lo = eps * 1e-6

    # pdf' <= 0 past the mode makes the ratio negative there, so the
    # maximum lives in (search_lo, mode] and the search never needs the
    # far tail (where the ratio -> 0 from below anyway)
    grid = np.linspace(lo + search_lo, lo + mode, grid_points)
    ratios = np.array([_m0_ratio(noise, z) for z in grid])
    k = int(ratios.argmax())
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid_points - 1)]
    xi, neg = minimize_1d(lambda z: -_m0_ratio(noise, z), Interval(a, b), tol=1e-10)
    peak = max(-neg, float(ratios[k]))
    m0 = max(int(math.ceil(peak)) + 1, 1)
    return UnimodalityReport(info.unimodal_class, eps, float(xi), m0, True)


@dataclass(frozen=True)
class ClosedForms:
    """Exact-formula exponents, None where the family has no closed form."""

    d_ml: float | None
    d_fa: float | None
    d_lin: float | None
    alpha: float | None


def closed_form_diversity(noise: NoiseModel, delta: float) -> ClosedForms:
    """Closed-form reference values used as oracles for the numeric paths."""
    if not delta > 0:
        raise ValueError("delta must be positive")

    if isinstance(noise, Uniform):
        b = noise.b
        d = math.log(b / (b - delta)) if delta < b else math.inf
        return ClosedForms(d_ml=d, d_fa=d, d_lin=None, alpha=None)

    if isinstance(noise, Exponential):
        bd = noise.b * delta
        e = math.exp(bd)
        alpha = (1.0 - e * (1.0 - bd)) / ((e - 1.0) * noise.b)
        d_lin = (1.0 + e * (bd - 1.0) - (e - 1.0) * math.log(bd * e / (e - 1.0))) / (e - 1.0)
        return ClosedForms(d_ml=bd, d_fa=bd, d_lin=d_lin, alpha=alpha)

    if isinstance(noise, InverseGaussian):
        return ClosedForms(d_ml=None, d_fa=fa_diversity(noise, delta), d_lin=None, alpha=None)

    if isinstance(noise, Levy):
        return ClosedForms(d_ml=None, d_fa=fa_diversity(noise, delta), d_lin=0.0, alpha=None)

    raise TypeError(f"no closed forms for {noise!r}")


def ig_rate_function(mu: float, b: float, v: float) -> float:
    """Closed-form inverse-Gaussian rate function b (v - mu)^2 / (2 mu^2 v)."""
    if not v > 0:
        return math.inf
    return b * (v - mu) ** 2 / (2.0 * mu * mu * v)


def diversity_report(noise: NoiseModel, delta: float) -> DiversityReport:
    """All three exponents with solver diagnostics, infinities tagged."""
    ml = chernoff_diversity(noise, delta)
    lin = linear_diversity(noise, delta)
    fa = fa_diversity(noise, delta)
    return DiversityReport(
        d_ml=Exponent.of(ml.d),
        d_fa=Exponent.of(fa),
        d_lin=Exponent.of(lin.d),
        s_star=ml.s_star,
        alpha=lin.alpha,
        ml_diagnostics=ml.diagnostics,
        lin_diagnostics=lin.diagnostics,
    )
