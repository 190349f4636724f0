"""Self-contained real-analysis kernel.

Adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals,
bracketed root-finding (bisection with secant acceleration), bounded 1-D
minimization (golden section), and a numerical Legendre transform built on
top of the minimizer.

All functions here are pure; there is no shared mutable state, so every
operation is safe to call concurrently.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Interval",
    "SolverDiagnostics",
    "NoRootError",
    "QuadratureError",
    "integrate",
    "find_root",
    "minimize_1d",
    "legendre_transform",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Interval:
    """A real interval [lo, hi].

    hi may be +inf; lo may be -inf so that the same type can describe CGF
    domains, but integrate() requires a finite lo and find_root() requires
    both endpoints finite.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if not self.lo < self.hi:
            raise ValueError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    residual: float
    converged: bool


class NoRootError(ValueError):
    """The bracket shows no sign change; callers map this to boundary cases."""


class QuadratureError(RuntimeError):
    """Adaptive subdivision hit its panel cap.

    Carries the best estimate and its error bound so callers can decide
    whether the partial answer is still usable.
    """

    def __init__(self, message, best, err_bound):
        super().__init__(message)
        self.best = best
        self.err_bound = err_bound


# 15-point Kronrod nodes with the embedded 7-point Gauss rule on [-1, 1].
_XGK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
# Gauss-7 weights aligned with every other Kronrod node.
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])


def _as_vectorized(f):
    """Adapt f so it maps an ndarray of nodes to an ndarray of values."""
    probe = f(np.array([0.5]))
    if isinstance(probe, np.ndarray) and probe.shape == (1,):
        return f
    return lambda x: np.array([f(float(v)) for v in x])


def _gk_panel(fv, a, b):
    """One Gauss-Kronrod pass over [a, b]: (K15 value, error estimate)."""
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * _XGK
    y = fv(nodes)
    if np.any(np.isnan(y)):
        raise ValueError(f"integrand returned NaN inside [{a}, {b}]")
    k15 = half * float(np.dot(_WGK, y))
    g7 = half * float(np.dot(_WG, y[1::2]))
    return k15, abs(k15 - g7)


def integrate(
    f: Callable[[float], float],
    domain: Interval,
    rel_tol: float = 1e-9,
    max_panels: int = 4096,
) -> float:
    """Integrate f over the domain to the requested relative accuracy.

    Semi-infinite domains are mapped to [0, 1) by y = lo + t/(1-t), then
    handled by the same adaptive Gauss-Kronrod subdivision as finite ones.
    The worst panel (largest local error) is split until the summed error
    estimate drops below rel_tol * |integral|.
    """
    if not 0.0 < rel_tol <= 1e-2:
        raise ValueError(f"rel_tol must be in (0, 1e-2], got {rel_tol}")
    if not math.isfinite(domain.lo):
        raise ValueError("integration domain must have a finite lower end")

    fv = _as_vectorized(f)
    if math.isinf(domain.hi):
        lo = domain.lo
        g = lambda t: fv(lo + t / (1.0 - t)) / (1.0 - t) ** 2
        cuts = np.linspace(0.0, 1.0, 9)
        seed_panels = [(cuts[i], cuts[i + 1]) for i in range(8)]
        fv = g
    else:
        mid = 0.5 * (domain.lo + domain.hi)
        seed_panels = [(domain.lo, mid), (mid, domain.hi)]

    panels = [(*p, *_gk_panel(fv, *p)) for p in seed_panels]
    while True:
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        scale = max(abs(total), 1e-300)
        if err <= rel_tol * scale:
            return total
        if len(panels) >= max_panels:
            raise QuadratureError(
                f"no convergence after {max_panels} panels "
                f"(estimate {total:.6e}, error bound {err:.3e})",
                best=total,
                err_bound=err,
            )
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        a, b, _, _ = panels.pop(worst)
        m = 0.5 * (a + b)
        panels.append((a, m, *_gk_panel(fv, a, m)))
        panels.append((m, b, *_gk_panel(fv, m, b)))


def _sign(x: float) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def find_root(
    h: Callable[[float], float],
    bracket: Interval,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> tuple[float, SolverDiagnostics]:
    """Locate a root of h inside a sign-changing bracket.

    Secant steps are taken whenever they land strictly inside the current
    bracket and both endpoint values are finite; otherwise the step falls
    back to bisection, which guarantees convergence. Infinite endpoint
    values are legal (only their sign is used).

    Raises NoRootError when h has the same (nonzero) sign at both ends.
    """
    if not bracket.finite:
        raise ValueError("root bracket must be finite")
    a, b = bracket.lo, bracket.hi
    fa, fb = h(a), h(b)
    if math.isnan(fa) or math.isnan(fb):
        raise ValueError("h returned NaN at a bracket endpoint")
    if fa == 0.0:
        return a, SolverDiagnostics(0, 0.0, True)
    if fb == 0.0:
        return b, SolverDiagnostics(0, 0.0, True)
    if _sign(fa) == _sign(fb):
        raise NoRootError(f"no sign change on [{a}, {b}]")

    x, fx = a, fa
    for it in range(1, max_iter + 1):
        use_secant = math.isfinite(fa) and math.isfinite(fb) and fa != fb
        if use_secant:
            x = b - fb * (b - a) / (fb - fa)
            if not (a < x < b) or not math.isfinite(x):
                x = 0.5 * (a + b)
        else:
            x = 0.5 * (a + b)
        fx = h(x)
        if math.isnan(fx):
            raise ValueError(f"h returned NaN at {x}")
        if abs(fx) <= tol:
            return x, SolverDiagnostics(it, abs(fx), True)
        if _sign(fx) == _sign(fa):
            a, fa = x, fx
        else:
            b, fb = x, fx
        if b - a <= tol:
            x = 0.5 * (a + b)
            return x, SolverDiagnostics(it, b - a, True)
    return x, SolverDiagnostics(max_iter, abs(fx), False)


def minimize_1d(
    g: Callable[[float], float],
    domain: Interval,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """Golden-section minimum of g over a closed bounded interval.

    Assumes a unimodal objective (the Chernoff objectives this library
    feeds in are convex, so the assumption holds); both endpoints are
    evaluated and returned when they beat the interior optimum, which
    matters because the Chernoff minimum can sit at s = 1.
    """
    if not domain.finite:
        raise ValueError("minimize_1d requires a bounded domain")
    a, b = domain.lo, domain.hi
    glo, ghi = g(a), g(b)

    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    g1, g2 = g(x1), g(x2)
    while b - a > tol:
        if g1 <= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - _INV_PHI * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + _INV_PHI * (b - a)
            g2 = g(x2)
    xm = x1 if g1 <= g2 else x2
    gm = min(g1, g2)

    best_x, best_g = xm, gm
    if glo < best_g:
        best_x, best_g = domain.lo, glo
    if ghi < best_g:
        best_x, best_g = domain.hi, ghi
    return best_x, best_g


_LEGENDRE_FLOOR = -1e300
_WINDOW_CAP = 2.0**52


def legendre_transform(
    lam: Callable[[float], float],
    v: float,
    domain: Interval | None = None,
    tol: float = 1e-10,
) -> float:
    """sup over lambda of lambda*v - lam(lambda).

    lam may return NaN/inf outside its finite region; those points are
    treated as objective -inf. The search window starts at [-1, 1] clipped
    to the declared domain and expands geometrically while the maximizer
    pins to an artificial window edge; if it is still pinned at the cap
    the supremum is reported as +inf (divergent rate).
    """
    if domain is None:
        domain = Interval(-math.inf, math.inf)

    def neg_objective(l):
        val = lam(l)
        if not math.isfinite(val):
            return -_LEGENDRE_FLOOR
        obj = l * v - val
        if not math.isfinite(obj):
            return -_LEGENDRE_FLOOR
        return -obj

    width = 1.0
    while True:
        lo = max(domain.lo, -width)
        hi = min(domain.hi, width)
        if not lo < hi:
            # degenerate clip (domain entirely outside the window); widen
            width *= 8.0
            continue
        x, neg = minimize_1d(neg_objective, Interval(lo, hi), tol=tol)
        pinned_lo = lo > domain.lo and (x - lo) < 1e-3 * (hi - lo) + tol
        pinned_hi = hi < domain.hi and (hi - x) < 1e-3 * (hi - lo) + tol
        if not (pinned_lo or pinned_hi):
            sup = -neg
            if sup >= 1e290:
                return math.inf
            # lambda = 0 lies in the domain and yields 0, so the true sup
            # is nonnegative; tiny negatives are golden-section slack.
            return max(sup, 0.0)
        if width >= _WINDOW_CAP:
            return math.inf
        width *= 8.0
