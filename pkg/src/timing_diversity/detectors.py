"""Decision rules mapping arrival times to an estimated release time.

Three detectors over an L-point release-time constellation:

* ML: full L-hypothesis argmax of summed log-densities. Causality is
  exploited exactly: an arrival earlier than a hypothesis gets that
  hypothesis log-likelihood -inf. Exact likelihood ties go to the LARGER
  point, which is what makes the detector coincide with the first-arrival
  rule for zero-mode noise (flat densities tie with positive probability).
* linear: compares the arrival sample mean against per-adjacent-pair
  thresholds point + mean + alpha; ties go to the smaller point.
* first-arrival: compares min(arrivals) against per-pair thresholds
  theta_M; the boundary goes to the larger point.

The scalar functions here are the reference implementations; the
simulation module carries batched kernels that must agree with them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .distributions import NoiseModel
from .diversity import fa_threshold, linear_diversity

__all__ = [
    "Constellation",
    "ArrivalSet",
    "DetectorKind",
    "DetectorSpec",
    "build_detector",
    "decide_ml",
    "decide_linear",
    "decide_fa",
]

import enum


class DetectorKind(enum.Enum):
    ML = "ml"
    LINEAR = "lin"
    FA = "fa"


@dataclass(frozen=True)
class Constellation:
    """Strictly increasing release times, first point >= 0."""

    points: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a constellation needs at least two points")
        if self.points[0] < 0:
            raise ValueError("release times must be nonnegative")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError("release times must be strictly increasing")

    @classmethod
    def binary(cls, delta: float) -> "Constellation":
        return cls((0.0, float(delta)))

    @property
    def delta(self) -> float:
        return self.points[-1]

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.points, self.points[1:]))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64)


@dataclass(frozen=True)
class ArrivalSet:
    """One trial's arrival times (M simultaneous releases, M >= 1)."""

    y: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.y, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("arrivals must be a nonempty 1-D vector")
        object.__setattr__(self, "y", arr)

    @property
    def m(self) -> int:
        return self.y.size

    @property
    def first(self) -> float:
        return float(self.y.min())


@dataclass(frozen=True)
class DetectorSpec:
    """A detector with its thresholds precomputed.

    linear_thresholds: absolute mean thresholds, one per adjacent pair.
    fa_thresholds: per M, absolute first-arrival thresholds per pair.
    linear_fallback marks thresholds that came from the empirical rule
    (median + gap/2) because the noise has no finite mean.
    """

    kind: DetectorKind
    noise: NoiseModel
    constellation: Constellation
    linear_thresholds: tuple[float, ...] | None = None
    linear_fallback: bool = False
    fa_thresholds: dict[int, tuple[float, ...]] = field(default_factory=dict)

    def fa_thresholds_for(self, m: int) -> tuple[float, ...]:
        try:
            return self.fa_thresholds[m]
        except KeyError:
            raise KeyError(f"first-arrival thresholds were not precomputed for M={m}") from None


def _linear_thresholds(
    noise: NoiseModel, constellation: Constellation, override: float | None
) -> tuple[tuple[float, ...], bool]:
    spec = noise.cgf_spec()
    if spec is None:
        # no finite mean (Levy): empirical fallback, flagged
        med = noise.median()
        base = [
            p + (med + g / 2.0 if override is None else override)
            for p, g in zip(constellation.points, constellation.gaps)
        ]
        return tuple(base), True
    out = []
    for p, g in zip(constellation.points, constellation.gaps):
        res = linear_diversity(noise, g)
        if res.alpha is None:
            raise ValueError(
                f"no balance threshold for gap {g}: the hypotheses separate "
                "(infinite exponent); the linear detector is degenerate here"
            )
        out.append(p + spec.mean + res.alpha)
    return tuple(out), False


def _fa_thresholds(
    noise: NoiseModel, constellation: Constellation, m_values: Iterable[int]
) -> dict[int, tuple[float, ...]]:
    out: dict[int, tuple[float, ...]] = {}
    for m in m_values:
        row = []
        for p, g in zip(constellation.points, constellation.gaps):
            # theta is in arrival coordinates for the {0, gap} sub-problem,
            # so the pair threshold only shifts by the pair's lower point
            th = fa_threshold(noise, g, m)
            row.append(p + th.theta)
        if any(b <= a for a, b in zip(row, row[1:])):
            raise ValueError(
                f"first-arrival thresholds are not increasing at M={m}; "
                "the constellation spacing is too small for this noise mode"
            )
        out[m] = tuple(row)
    return out


def build_detector(
    kind: DetectorKind,
    noise: NoiseModel,
    constellation: Constellation,
    m_values: Iterable[int] = (),
    linear_threshold_override: float | None = None,
) -> DetectorSpec:
    """Precompute thresholds and freeze the detector."""
    if kind is DetectorKind.LINEAR:
        thresholds, fallback = _linear_thresholds(noise, constellation, linear_threshold_override)
        return DetectorSpec(kind, noise, constellation, thresholds, fallback)
    if kind is DetectorKind.FA:
        fa = _fa_thresholds(noise, constellation, m_values)
        return DetectorSpec(kind, noise, constellation, fa_thresholds=fa)
    return DetectorSpec(kind, noise, constellation)


def _arrivals(y) -> np.ndarray:
    if isinstance(y, ArrivalSet):
        return y.y
    return np.asarray(y, dtype=np.float64)


def decide_ml(spec: DetectorSpec, y) -> float:
    """Release time maximizing the summed log-density of the arrivals."""
    if spec.kind is not DetectorKind.ML:
        raise ValueError("spec is not an ML detector")
    arr = _arrivals(y)
    best = -math.inf
    best_idx = 0
    for idx, p in enumerate(spec.constellation.points):
        ll = 0.0
        for v in arr:
            ll += spec.noise.logpdf(v - p)
            if ll == -math.inf:
                break
        if ll >= best:  # ties toward the larger point
            best = ll
            best_idx = idx
    return spec.constellation.points[best_idx]


def decide_linear(spec: DetectorSpec, y) -> float:
    """Release time bracketed by the arrival mean (ties to the smaller)."""
    if spec.kind is not DetectorKind.LINEAR:
        raise ValueError("spec is not a linear detector")
    arr = _arrivals(y)
    total = 0.0
    for v in arr:  # fixed order, matches the batched kernels bit for bit
        total += v
    mean = total / arr.size
    idx = 0
    for t in spec.linear_thresholds:
        if mean > t:
            idx += 1
        else:
            break
    return spec.constellation.points[idx]


def decide_fa(spec: DetectorSpec, y, m: int | None = None) -> float:
    """Release time bracketed by the first arrival (boundary to the larger)."""
    if spec.kind is not DetectorKind.FA:
        raise ValueError("spec is not a first-arrival detector")
    arr = _arrivals(y)
    if m is None:
        m = arr.size
    thresholds = spec.fa_thresholds_for(m)
    y_fa = arr[0]
    for v in arr[1:]:
        if v < y_fa:
            y_fa = v
    idx = 0
    for t in thresholds:
        if y_fa >= t:
            idx += 1
        else:
            break
    return spec.constellation.points[idx]
