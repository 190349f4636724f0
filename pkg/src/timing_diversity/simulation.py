"""Seeded Monte Carlo error-rate harness.

Trials are processed in fixed chunks of 16384; each (M, chunk) pair owns
an independent counter-based Philox stream derived from (seed, M, first
trial index of the chunk), so the work units can run in any order, on any
number of workers, and still merge to identical integer tallies. Within a
trial the draw order is: release index first, then the noise matrix.

All requested detectors see the same arrival matrix (paired comparison),
which removes comparison variance and lets the FA-vs-ML agreement be
checked per trial rather than in distribution.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .detectors import Constellation, DetectorKind, _fa_thresholds, _linear_thresholds
from .distributions import NoiseModel

__all__ = [
    "CHUNK_TRIALS",
    "SimConfig",
    "CellStats",
    "FitResult",
    "DetectorSeries",
    "SimulationResult",
    "rng_stream_for",
    "run_trials",
    "fit_diversity_slope",
    "fit_empirical_diversity",
]

CHUNK_TRIALS = 1 << 14  # frozen: part of the reproducibility contract
MIN_ERRORS_FOR_FIT = 100
_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class SimConfig:
    noise: NoiseModel
    constellation: Constellation
    detectors: tuple[DetectorKind, ...]
    m_grid: tuple[int, ...]
    trials: int
    seed: int
    workers: int = 1
    linear_threshold_override: float | None = None

    def __post_init__(self):
        if not self.detectors:
            raise ValueError("at least one detector kind is required")
        if len(set(self.detectors)) != len(self.detectors):
            raise ValueError("duplicate detector kinds")
        if not self.m_grid or any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ValueError("M grid must be nonempty and strictly increasing")
        if self.m_grid[0] < 1:
            raise ValueError("M values must be >= 1")
        if self.trials < 1000:
            raise ValueError("at least 1000 trials per grid point are required")
        if not 0 <= self.seed < 2**63:
            raise ValueError("seed must fit in 63 bits")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def rng_stream_for(seed: int, m: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one (seed, M, trial) triple.

    The Philox key packs M into the high 24 bits and the trial index into
    the low 40 bits of the second key word; distinct triples can never
    collide, and no stream depends on any other having been drawn.
    """
    if not 0 <= m < (1 << 24):
        raise ValueError("M out of the 24-bit stream-key range")
    if not 0 <= trial_index < (1 << 40):
        raise ValueError("trial index out of the 40-bit stream-key range")
    key = np.array([seed, (m << 40) | trial_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class CellStats:
    m: int
    n_trials: int
    n_errors: int
    p_hat: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class FitResult:
    d_hat: float
    stderr: float
    points_used: int
    truncated: bool


@dataclass(frozen=True)
class DetectorSeries:
    kind: DetectorKind
    cells: tuple[CellStats, ...]
    fit: FitResult | None


@dataclass(frozen=True)
class SimulationResult:
    # config echo: everything that determines the tallies (the worker
    # count deliberately does not, so it is not echoed and output files
    # are identical across worker counts)
    noise: NoiseModel
    constellation: Constellation
    m_grid: tuple[int, ...]
    trials: int
    seed: int
    series: tuple[DetectorSeries, ...]
    fa_ml_disagreements: dict[int, int] | None
    linear_fallback: bool = False

    def series_for(self, kind: DetectorKind) -> DetectorSeries:
        for s in self.series:
            if s.kind is kind:
                return s
        raise KeyError(f"no series for {kind}")


def _wilson(errors: int, n: int) -> tuple[float, float, float]:
    p = errors / n
    z2 = _WILSON_Z * _WILSON_Z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = _WILSON_Z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    return p, max(center - half, 0.0), min(center + half, 1.0)


def fit_diversity_slope(
    ms, p_hats, n_errors, min_errors: int = MIN_ERRORS_FOR_FIT
) -> FitResult | None:
    """Weighted LS slope of -log p against M, intercept unconstrained.

    Weights are the observed error counts (inverse-variance up to a
    constant for binomial tallies). Cells with fewer than min_errors
    observed errors are dropped; fewer than 3 surviving cells means no
    usable exponent, reported as None.
    """
    ms = np.asarray(ms, dtype=np.float64)
    p_hats = np.asarray(p_hats, dtype=np.float64)
    w = np.asarray(n_errors, dtype=np.float64)
    keep = (w >= min_errors) & (p_hats > 0.0) & (p_hats < 1.0)
    truncated = bool((~keep).any())
    if keep.sum() < 3:
        return None
    x = ms[keep]
    y = -np.log(p_hats[keep])
    wk = w[keep]
    sw = wk.sum()
    xbar = (wk * x).sum() / sw
    ybar = (wk * y).sum() / sw
    sxx = (wk * (x - xbar) ** 2).sum()
    slope = (wk * (x - xbar) * (y - ybar)).sum() / sxx
    resid = y - ybar - slope * (x - xbar)
    dof = max(keep.sum() - 2, 1)
    sigma2 = (wk * resid * resid).sum() / dof
    stderr = math.sqrt(sigma2 / sxx)
    return FitResult(float(slope), float(stderr), int(keep.sum()), truncated)


def fit_empirical_diversity(series: DetectorSeries) -> FitResult | None:
    return fit_diversity_slope(
        [c.m for c in series.cells],
        [c.p_hat for c in series.cells],
        [c.n_errors for c in series.cells],
    )


def _chunk_payload(config: SimConfig):
    """Everything a worker needs, picklable and small."""
    fam, *params = config.noise.kernel_params()
    points = config.constellation.as_array()
    kinds = tuple(config.detectors)
    lin_thresholds = None
    lin_fallback = False
    if DetectorKind.LINEAR in kinds:
        lt, lin_fallback = _linear_thresholds(
            config.noise, config.constellation, config.linear_threshold_override
        )
        lin_thresholds = np.asarray(lt)
    fa_tables = {}
    if DetectorKind.FA in kinds:
        fa_tables = {
            m: np.asarray(row)
            for m, row in _fa_thresholds(config.noise, config.constellation, config.m_grid).items()
        }
    return {
        "noise": config.noise,
        "fam": fam,
        "params": np.asarray(params, dtype=np.float64),
        "points": points,
        "kinds": kinds,
        "lin": lin_thresholds,
        "fa": fa_tables,
        "seed": config.seed,
        "trials": config.trials,
    }, lin_fallback


def _run_chunk(payload, m: int, start: int):
    nt = min(CHUNK_TRIALS, payload["trials"] - start)
    rng = rng_stream_for(payload["seed"], m, start)
    points = payload["points"]
    x_idx = rng.integers(0, points.size, size=nt)
    z = payload["noise"].sample((nt, m), rng)
    y = points[x_idx][:, None] + z

    errors = {}
    decisions = {}
    for kind in payload["kinds"]:
        if kind is DetectorKind.ML:
            dec = _kernels.ml_decide_batch(payload["fam"], payload["params"], points, y)
        elif kind is DetectorKind.FA:
            dec = _kernels.fa_decide_batch(y, payload["fa"][m])
        else:
            dec = _kernels.linear_decide_batch(y, payload["lin"])
        decisions[kind] = dec
        errors[kind] = int(np.count_nonzero(dec != x_idx))

    disagree = None
    if DetectorKind.FA in decisions and DetectorKind.ML in decisions:
        disagree = int(np.count_nonzero(decisions[DetectorKind.FA] != decisions[DetectorKind.ML]))
    return m, errors, disagree


def run_trials(config: SimConfig) -> SimulationResult:
    """Estimate error probabilities for every (detector, M) grid cell.

    Identical (seed, config-minus-workers) inputs produce bit-identical
    tallies for any worker count: chunks are keyed by (M, start) and the
    merge is integer addition.
    """
    payload, lin_fallback = _chunk_payload(config)
    tasks = [(m, start) for m in config.m_grid for start in range(0, config.trials, CHUNK_TRIALS)]

    err_tally: dict[tuple[DetectorKind, int], int] = {
        (k, m): 0 for k in config.detectors for m in config.m_grid
    }
    dis_tally: dict[int, int] = {m: 0 for m in config.m_grid}
    track_disagreement = (
        DetectorKind.FA in config.detectors and DetectorKind.ML in config.detectors
    )

    if config.workers == 1:
        results = (_run_chunk(payload, m, s) for m, s in tasks)
        for m, errors, disagree in results:
            for kind, e in errors.items():
                err_tally[(kind, m)] += e
            if disagree is not None:
                dis_tally[m] += disagree
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_chunk, payload, m, s) for m, s in tasks]
            for fut in futures:
                m, errors, disagree = fut.result()
                for kind, e in errors.items():
                    err_tally[(kind, m)] += e
                if disagree is not None:
                    dis_tally[m] += disagree

    series = []
    for kind in config.detectors:
        cells = []
        for m in config.m_grid:
            e = err_tally[(kind, m)]
            p, lo, hi = _wilson(e, config.trials)
            cells.append(CellStats(m, config.trials, e, p, lo, hi))
        cells = tuple(cells)
        series.append(DetectorSeries(kind, cells, fit_empirical_diversity(DetectorSeries(kind, cells, None))))

    return SimulationResult(
        noise=config.noise,
        constellation=config.constellation,
        m_grid=config.m_grid,
        trials=config.trials,
        seed=config.seed,
        series=tuple(series),
        fa_ml_disagreements=dict(dis_tally) if track_disagreement else None,
        linear_fallback=lin_fallback,
    )
