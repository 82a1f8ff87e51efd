"""Monte Carlo machinery: multinomial sampling, empirical critical values,
power experiments and the asymptotic-validity check.

Randomness comes from counter-based Philox streams keyed by (seed, phase,
block): simulations are generated in fixed-size blocks, each with its own
stream, so results are bit-identical for a given SimulationConfig no matter
how blocks are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import eigen, wsumchi2
from .errors import LengthMismatch, NotBracketed
from .model import ModelDistribution
from .stats import DrawCounts, batch_statistic

BLOCK_SIZE = 4096

_PHASE_CALIBRATE = 0
_PHASE_EVALUATE = 1
_PHASE_VALIDATE = 2


@dataclass(frozen=True)
class SimulationConfig:
    """Seeded simulation plan.

    The benchmark power studies use n_sims=40000; the default is desk-scale.
    confidence_threshold sets the calibrated critical value's quantile,
    success_fraction the required detection rate for "distinguishing".
    """

    seed: int
    n_sims: int = 10_000
    m: int = 200
    confidence_threshold: float = 0.99
    success_fraction: float = 0.99

    def __post_init__(self):
        if self.n_sims < 1:
            raise ValueError("n_sims must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        for name in ("confidence_threshold", "success_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass(frozen=True)
class PowerResult:
    """Detection rates of each statistic against model-calibrated critical values."""

    rates: dict
    critical_values: dict
    n: int
    m: int
    n_sims: int
    seed: int


@dataclass(frozen=True)
class DistinguishResult:
    """Smallest draw count reaching the target rate, with its bisection certificate."""

    m: int
    rate_at_m: float
    rate_at_half_m: float
    evaluations: tuple = field(default_factory=tuple)  # (m, rate) pairs in eval order


def _block_rng(seed: int, phase: int, block_index: int) -> np.random.Generator:
    key = np.array(
        [np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64((phase << 48) | block_index)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def sample_counts(model: ModelDistribution, m: int, rng: np.random.Generator) -> DrawCounts:
    """One multinomial sample of m draws (sequential conditional binomials)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return DrawCounts(rng.multinomial(m, model.probs))


def _simulate_statistics(
    draw_from: ModelDistribution,
    against: ModelDistribution,
    m: int,
    n_sims: int,
    seed: int,
    phase: int,
    statistic_ids: Sequence[str],
    threads: int = 1,
) -> dict:
    """n_sims statistics per id: draws sampled from ``draw_from``, statistics
    measured against the null model ``against``; all ids share each draw."""
    out = {sid: np.empty(n_sims) for sid in statistic_ids}
    sample_probs = draw_from.probs
    null_probs = against.probs

    def run_block(block_index: int) -> None:
        start = block_index * BLOCK_SIZE
        stop = min(start + BLOCK_SIZE, n_sims)
        rng = _block_rng(seed, phase, block_index)
        counts = rng.multinomial(m, sample_probs, size=stop - start)
        for sid in statistic_ids:
            out[sid][start:stop] = batch_statistic(counts, null_probs, sid)

    n_blocks = (n_sims + BLOCK_SIZE - 1) // BLOCK_SIZE
    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, range(n_blocks)))
    else:
        for b in range(n_blocks):
            run_block(b)
    return out


def critical_value(
    statistic_id: str,
    model: ModelDistribution,
    cfg: SimulationConfig,
    threads: int = 1,
) -> float:
    """Empirical quantile of the statistic under the model.

    cfg.n_sims simulations of cfg.m draws each; the quantile at
    cfg.confidence_threshold uses linear interpolation of order statistics.
    """
    samples = _simulate_statistics(
        model, model, cfg.m, cfg.n_sims, cfg.seed, _PHASE_CALIBRATE, (statistic_id,), threads
    )[statistic_id]
    return float(np.quantile(samples, cfg.confidence_threshold, method="linear"))


def power_experiment(
    model: ModelDistribution,
    actual: ModelDistribution,
    statistic_ids: Sequence[str],
    cfg: SimulationConfig,
    threads: int = 1,
) -> PowerResult:
    """Calibrate critical values on the model, then measure detection rates
    on draws from the actual distribution.

    All statistics are evaluated on the same simulated draws within each
    phase.  A detection is a statistic at or above its critical value.
    """
    if model.n != actual.n:
        raise LengthMismatch(f"model has {model.n} bins, actual has {actual.n}")
    statistic_ids = tuple(statistic_ids)
    null_stats = _simulate_statistics(
        model, model, cfg.m, cfg.n_sims, cfg.seed, _PHASE_CALIBRATE, statistic_ids, threads
    )
    criticals = {
        sid: float(np.quantile(null_stats[sid], cfg.confidence_threshold, method="linear"))
        for sid in statistic_ids
    }
    alt_stats = _simulate_statistics(
        actual, model, cfg.m, cfg.n_sims, cfg.seed, _PHASE_EVALUATE, statistic_ids, threads
    )
    rates = {
        sid: float(np.mean(alt_stats[sid] >= criticals[sid])) for sid in statistic_ids
    }
    return PowerResult(
        rates=rates,
        critical_values=criticals,
        n=model.n,
        m=cfg.m,
        n_sims=cfg.n_sims,
        seed=cfg.seed,
    )


def distinguish_m(
    model: ModelDistribution,
    actual: ModelDistribution,
    statistic_id: str,
    cfg: SimulationConfig,
    search_bounds: tuple[int, int],
    threads: int = 1,
) -> DistinguishResult:
    """Smallest m whose detection rate reaches cfg.success_fraction.

    Bisection over m, assuming the rate is monotone in m; the returned
    certificate records the rate at m and at m // 2 so the assumption can be
    audited.  Raises NotBracketed if even the upper bound falls short.
    """
    lo, hi = int(search_bounds[0]), int(search_bounds[1])
    if not 1 <= lo < hi:
        raise ValueError("search_bounds must satisfy 1 <= lo < hi")
    target = cfg.success_fraction
    trace: list[tuple[int, float]] = []
    cache: dict[int, float] = {}

    def rate(m: int) -> float:
        if m not in cache:
            result = power_experiment(
                model, actual, (statistic_id,), replace(cfg, m=m), threads
            )
            cache[m] = result.rates[statistic_id]
            trace.append((m, cache[m]))
        return cache[m]

    if rate(hi) < target:
        raise NotBracketed(
            f"rate {cache[hi]:.4f} at upper bound m={hi} is below target {target}"
        )
    if rate(lo) < target:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if rate(mid) >= target:
                hi = mid
            else:
                lo = mid
    else:
        hi = lo
    return DistinguishResult(
        m=hi,
        rate_at_m=rate(hi),
        rate_at_half_m=rate(max(hi // 2, 1)),
        evaluations=tuple(trace),
    )


def asymptotic_pvalue_validation(
    model: ModelDistribution,
    m: int,
    cfg: SimulationConfig,
    quadrature: wsumchi2.QuadratureConfig | None = None,
    grid_size: int = 1024,
    threads: int = 1,
) -> float:
    """Kolmogorov-Smirnov distance between simulated finite-m statistics and
    the asymptotic CDF.

    Simulates cfg.n_sims squared-RMS statistics under the model with m draws
    each, then compares their empirical CDF against the contour-integral CDF
    driven by the model's variance spectrum.  The asymptotic CDF is evaluated
    on a quantile grid and interpolated linearly between grid points (the
    grid is fine enough that interpolation error is far below Monte Carlo
    noise).
    """
    samples = _simulate_statistics(
        model, model, m, cfg.n_sims, cfg.seed, _PHASE_VALIDATE, ("rms",), threads
    )["rms"]
    samples = np.sort(samples)
    spectrum = eigen.variance_spectrum(eigen.build_b(model))

    qs = np.linspace(0.0, 1.0, grid_size + 1)
    grid = np.unique(np.quantile(samples, qs, method="linear"))
    f_grid = np.array([wsumchi2.cdf(float(g), spectrum, quadrature).p for g in grid])
    f_at = np.interp(samples, grid, f_grid)

    n = samples.size
    upper = np.arange(1, n + 1) / n - f_at
    lower = f_at - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
