"""Monte-Carlo checks of the estimator's statistical behaviour.

Two data models are simulated:

* ``independent``: the m renormalized k-th minima are drawn directly as
  i.i.d. Gamma variates, offsets ``entry / m`` following Gamma(k, theta).
* ``exact``: theta i.i.d. uniforms are pushed through a real :class:`Sketch`
  and its k-th minima are read back, so cross-bucket dependence and empty
  buckets are present.

Every trial draws from its own generator seeded by ``(rng_seed, trial)``,
so results do not depend on batching or execution order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .estimators import estimate_batch, parse_estimator_id
from .sketch import Sketch, SketchConfig
from .special import gamma_cdf

INDEPENDENT = "independent"
EXACT = "exact"
_CHUNK = 1 << 20
_NAIVE_BLOCK = 1000


@dataclass(frozen=True)
class ModelSpec:
    model: str
    theta: int
    k: int
    m: int
    trials: int
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in (INDEPENDENT, EXACT):
            raise ValueError(f"model must be {INDEPENDENT!r} or {EXACT!r}, got {self.model!r}")
        if self.theta < 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        SketchConfig(self.k, self.m)


@dataclass(frozen=True)
class TrialStats:
    estimator_id: str
    sample_mean: float
    sample_variance: float
    standard_error_of_mean: float
    trials: int
    theta: int
    k: int
    m: int
    model: str = INDEPENDENT
    rng_seed: int = 0
    mse: float = math.nan
    mse_standard_error: float = math.nan

    @property
    def rel_bias(self) -> float:
        return (self.sample_mean - self.theta) / self.theta

    @property
    def rel_var_ratio(self) -> float:
        """``variance * (km - 2) / theta^2``; 1 when the variance matches theta^2/(km-2)."""
        return self.sample_variance * (self.k * self.m - 2) / self.theta**2

    def csv_row(self) -> dict:
        return {
            "model": self.model,
            "estimator": self.estimator_id,
            "theta": self.theta,
            "k": self.k,
            "m": self.m,
            "trials": self.trials,
            "mean": self.sample_mean,
            "variance": self.sample_variance,
            "se": self.standard_error_of_mean,
            "rel_bias": self.rel_bias,
            "rel_var_ratio": self.rel_var_ratio,
            "seed": self.rng_seed,
        }


CSV_COLUMNS = ("model", "estimator", "theta", "k", "m", "trials", "mean", "variance",
               "se", "rel_bias", "rel_var_ratio", "seed")


@dataclass(frozen=True)
class CoverageReport:
    empirical_p: float
    bound: float
    trials: int

    def satisfied(self, sigmas: float = 3.0) -> bool:
        """True unless empirical_p falls more than ``sigmas`` binomial SEs (p = 1/2) below the bound."""
        return self.empirical_p >= self.bound - sigmas * math.sqrt(0.25 / self.trials)


def trial_rng(rng_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([rng_seed, trial])))


def _unit_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    # (0, 1]: zero would be an absorbing minimum
    return 1.0 - rng.random(size)


def sample_gamma(k: int, theta: float, rng: np.random.Generator, size=None):
    """Gamma(k, rate theta) as a sum of k Exponential(theta) draws, ``-sum log U / theta``."""
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    u = _unit_uniforms(rng, shape + (int(k),))
    out = -np.log(u).sum(axis=-1) / theta
    return float(out) if size is None else out


def independent_entries(spec: ModelSpec) -> np.ndarray:
    """(trials, m) renormalized k-th minima under the independent model."""
    if spec.model != INDEPENDENT:
        raise ValueError("independent_entries needs model='independent'")
    rate = spec.theta / spec.m  # offsets ~ Gamma(k, theta) <=> entries ~ Gamma(k, theta/m)
    out = np.empty((spec.trials, spec.m))
    for t in range(spec.trials):
        out[t] = sample_gamma(spec.k, rate, trial_rng(spec.rng_seed, t), spec.m)
    return out


def _exact_trial(spec: ModelSpec, t: int) -> Sketch:
    rng = trial_rng(spec.rng_seed, t)
    sk = Sketch(SketchConfig(spec.k, spec.m))
    left = spec.theta
    while left:
        n = min(left, _CHUNK)
        sk.insert_values(_unit_uniforms(rng, n))
        left -= n
    return sk


def exact_trials(spec: ModelSpec) -> Iterable[Sketch]:
    """Yield one sketch per trial, each fed theta fresh uniforms."""
    if spec.model != EXACT:
        raise ValueError("exact_trials needs model='exact'")
    for t in range(spec.trials):
        yield _exact_trial(spec, t)


def exact_entries(spec: ModelSpec) -> np.ndarray:
    """(trials, m) renormalized k-th minima read back from real sketches."""
    out = np.empty((spec.trials, spec.m))
    for t, sk in enumerate(exact_trials(spec)):
        out[t] = sk.kth_values().values
    return out


def model_entries(spec: ModelSpec) -> np.ndarray:
    return independent_entries(spec) if spec.model == INDEPENDENT else exact_entries(spec)


def trial_stats(estimates: np.ndarray, spec: ModelSpec, estimator_id: str) -> TrialStats:
    est = np.asarray(estimates, dtype=np.float64)
    n = est.size
    mean = float(est.mean())
    var = float(est.var(ddof=1)) if n > 1 else 0.0
    sq = (est - spec.theta) ** 2
    mse_se = float(sq.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return TrialStats(
        estimator_id=parse_estimator_id(estimator_id)[0],
        sample_mean=mean,
        sample_variance=var,
        standard_error_of_mean=math.sqrt(var / n),
        trials=n,
        theta=spec.theta,
        k=spec.k,
        m=spec.m,
        model=spec.model,
        rng_seed=spec.rng_seed,
        mse=float(sq.mean()),
        mse_standard_error=mse_se,
    )


def run_model(spec: ModelSpec, estimator_ids: Sequence[str]) -> dict[str, TrialStats]:
    """Simulate once and evaluate several estimators on the same trials."""
    entries = model_entries(spec)
    return {
        eid: trial_stats(estimate_batch(entries, spec.k, eid), spec, eid) for eid in estimator_ids
    }


def run_independent(spec: ModelSpec, estimator_id: str = "xi_hat") -> TrialStats:
    if spec.model != INDEPENDENT:
        raise ValueError("run_independent needs model='independent'")
    return run_model(spec, [estimator_id])[estimator_id]


def run_exact(spec: ModelSpec, estimator_id: str = "xi_hat") -> TrialStats:
    if spec.model != EXACT:
        raise ValueError("run_exact needs model='exact'")
    return run_model(spec, [estimator_id])[estimator_id]


def mse_dominance(
    entries: np.ndarray, spec: ModelSpec, best: str, other: str
) -> tuple[float, float]:
    """Paired MSE gap ``MSE(other) - MSE(best)`` and its standard error over the same trials."""
    a = (estimate_batch(entries, spec.k, best) - spec.theta) ** 2
    b = (estimate_batch(entries, spec.k, other) - spec.theta) ** 2
    d = b - a
    n = d.size
    se = float(d.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(d.mean()), se


def coverage_bound(theta: float, m: int) -> float:
    """``1 - 2 m exp(-theta / (2 m^2))``; negative (vacuous) for small theta."""
    return 1.0 - 2.0 * m * math.exp(-theta / (2.0 * m * m))


def coverage_probability(spec: ModelSpec) -> CoverageReport:
    """Fraction of exact-model trials in which every bucket receives k values."""
    if spec.model != EXACT:
        raise ValueError("coverage_probability needs model='exact'")
    hits = sum(sk.is_covered() for sk in exact_trials(spec))
    return CoverageReport(hits / spec.trials, coverage_bound(spec.theta, spec.m), spec.trials)


def ks_statistic(samples: np.ndarray, cdf: Callable[[float], float]) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the sample ECDF and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    f = np.array([cdf(v) for v in x])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_critical_1pct(n: int) -> float:
    """Asymptotic 1% critical value ``1.63 / sqrt(n)``."""
    return 1.63 / math.sqrt(n)


def limit_law_samples(theta: int, k: int, m: int, trials: int, rng_seed: int = 0) -> np.ndarray:
    """Pooled ``theta * offset`` values, offset = entry / m, over exact-model trials."""
    spec = ModelSpec(EXACT, theta, k, m, trials, rng_seed)
    return (exact_entries(spec) * (theta / m)).reshape(-1)


def limit_law_ks(theta: int, k: int, m: int, trials: int, rng_seed: int = 0) -> float:
    """KS statistic of the pooled scaled k-th minima against Gamma(k, 1)."""
    pooled = limit_law_samples(theta, k, m, trials, rng_seed)
    return ks_statistic(pooled, lambda t: gamma_cdf(t, k))


@dataclass(frozen=True)
class NaiveMinResult:
    mean: float
    standard_error: float
    trials: int
    theta: int

    @property
    def target(self) -> float:
        return 1.0 / (self.theta + 1)


def _naive_minima(theta: int, trials: int, rng_seed: int):
    # seeds are per block of _NAIVE_BLOCK trials; 10^6 generators would dominate the run
    per_block = max(1, min(_NAIVE_BLOCK, _CHUNK // theta))
    for b, start in enumerate(range(0, trials, per_block)):
        rng = trial_rng(rng_seed, b)
        n = min(per_block, trials - start)
        yield _unit_uniforms(rng, (n, theta)).min(axis=1)


def naive_min_expectation(theta: int, trials: int, rng_seed: int = 0) -> NaiveMinResult:
    """Monte-Carlo mean of the smallest of theta uniforms (brute force)."""
    if theta < 1 or trials < 1:
        raise ValueError("theta and trials must be >= 1")
    total = 0.0
    total_sq = 0.0
    for mins in _naive_minima(theta, trials, rng_seed):
        total += float(mins.sum())
        total_sq += float((mins * mins).sum())
    mean = total / trials
    var = (total_sq - trials * mean * mean) / (trials - 1) if trials > 1 else 0.0
    return NaiveMinResult(mean, math.sqrt(max(var, 0.0) / trials), trials, theta)


def reciprocal_min_running_means(theta: int, checkpoints: Sequence[int], rng_seed: int = 0) -> list[float]:
    """Running means of ``1 / min`` at increasing trial counts (heavy tail: no limit)."""
    last = max(checkpoints)
    recips = np.concatenate([1.0 / mins for mins in _naive_minima(theta, last, rng_seed)])
    csum = np.cumsum(recips)
    return [float(csum[c - 1] / c) for c in checkpoints]


def stats_dict(stats: TrialStats) -> dict:
    d = asdict(stats)
    d["rel_bias"] = stats.rel_bias
    d["rel_var_ratio"] = stats.rel_var_ratio
    return d
