"""Cardinality estimators computed from a sketch's renormalized k-th minima.

All estimators work on the bucket-offset scale ``x_i = entry_i / m``: the
offset of the k-th minimum above its bucket's left edge.  For a stream of
``theta`` distinct elements the offsets are asymptotically i.i.d.
Gamma(k, theta) (rate theta), so every estimator below returns a value on
the scale of theta itself.

Estimator ids
-------------
``xi_hat``        (km - 1) / sum(x); unbiased with variance theta^2 / (km - 2)
``xi3_log``       geometric-mean estimator with the Gamma(k - 1/m) constant
``xi1_inverse``   moment family with alpha = -1
``xi2_sqrt``      moment family with alpha = 1/2
``moment(a)``     moment family with exponent ``a``
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .sketch import KthValues, left_sum
from .special import log_gamma

XI_HAT = "xi_hat"
XI1 = "xi1_inverse"
XI2 = "xi2_sqrt"
XI3 = "xi3_log"

_ALIASES = {
    "xi_hat": XI_HAT,
    "xi-hat": XI_HAT,
    "xihat": XI_HAT,
    "xi3": XI3,
    "xi3_log": XI3,
    "xi3-log": XI3,
    "log": XI3,
    "xi1": XI1,
    "xi1_inverse": XI1,
    "xi2": XI2,
    "xi2_sqrt": XI2,
}
_MOMENT_RE = re.compile(r"^moment(?::|\()\s*([-+0-9.eE/]+)\s*\)?$")


@dataclass(frozen=True)
class Estimate:
    estimator_id: str
    value: float
    k: int
    m: int


def _parse_alpha(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_estimator_id(name: str) -> tuple[str, float | None]:
    """Normalize an estimator name to ``(canonical_id, alpha)``.

    Accepts the canonical ids, the command-line spellings ``xi-hat``,
    ``xi3`` and ``moment:ALPHA``, and ``moment(ALPHA)``.

    >>> parse_estimator_id("moment:-1")
    ('xi1_inverse', -1.0)
    """
    key = name.strip().lower()
    if key in _ALIASES:
        cid = _ALIASES[key]
        return cid, {XI1: -1.0, XI2: 0.5}.get(cid)
    match = _MOMENT_RE.match(key)
    if not match:
        raise ValueError(f"unknown estimator {name!r}")
    try:
        alpha = _parse_alpha(match.group(1))
    except ValueError:
        raise ValueError(f"bad moment exponent in {name!r}") from None
    if alpha == -1.0:
        return XI1, alpha
    if alpha == 0.5:
        return XI2, alpha
    return f"moment({alpha:g})", alpha


# -- constants ---------------------------------------------------------------


def log_constant(k: int, m: int) -> float:
    """``m * [log Gamma(k - 1/m) - log Gamma(k)]``, the log of xi3's inverse constant."""
    if k - 1.0 / m <= 0:
        raise ValueError(f"xi3 needs k - 1/m > 0, got k={k}, m={m}")
    return m * (log_gamma(k - 1.0 / m) - log_gamma(k))


def gamma_moment(k: float, alpha: float) -> float:
    """E[z^alpha] for z ~ Gamma(k, 1): Gamma(k + alpha) / Gamma(k)."""
    if k + alpha <= 0:
        raise ValueError(f"Gamma moment needs k + alpha > 0, got k={k}, alpha={alpha}")
    return math.exp(log_gamma(k + alpha) - log_gamma(k))


def _check_moment(k: int, alpha: float) -> None:
    if alpha == 0 or not math.isfinite(alpha):
        raise ValueError("moment exponent must be finite and non-zero (use xi3 for the log family)")
    if k + alpha <= 0:
        raise ValueError(f"moment estimator needs k + alpha > 0, got k={k}, alpha={alpha}")
    if alpha < 0 and k <= 1:
        raise ValueError("negative-exponent moment estimators have infinite mean when k = 1")


def _shifted_moments(k: int, alpha: float, n: int, u: float) -> list[float]:
    """E[w^j exp(-u w)] for w = z^alpha, z ~ Gamma(k, 1), j = 0..n."""
    lg = log_gamma(k)
    if u == 0.0:
        return [math.exp(log_gamma(k + j * alpha) - lg) for j in range(n + 1)]
    out = []
    for j in range(n + 1):
        def f(z: float, j: int = j) -> float:
            if z <= 0.0:
                return 0.0
            w = z**alpha
            return math.exp(j * alpha * math.log(z) - u * w + (k - 1) * math.log(z) - z - lg)

        val = integrate.quad(f, 0.0, 1.0, limit=200, epsabs=1e-15, epsrel=1e-12)[0]
        val += integrate.quad(f, 1.0, np.inf, limit=200, epsabs=1e-15, epsrel=1e-12)[0]
        out.append(val)
    return out


def _power_of_mean(moments: list[float], m: int, n: int) -> float:
    """E[T^n exp(-s T)] for T the mean of m i.i.d. copies, from per-copy moments.

    ``moments[j]`` must be E[(w/m)^j exp(-(s/m) w)].
    """
    acc = [1.0] + [0.0] * n
    for _ in range(m):
        nxt = [0.0] * (n + 1)
        for j in range(n + 1):
            nxt[j] = sum(math.comb(j, l) * acc[l] * moments[j - l] for l in range(j + 1))
        acc = nxt
    return acc[n]


@lru_cache(maxsize=256)
def mean_power_factor(k: int, alpha: float, m: int) -> float:
    """E[T^(-1/alpha)] for T = (1/m) sum z_i^alpha, z_i i.i.d. Gamma(k, 1).

    The moment estimator built from the plain Gamma moment has mean
    ``theta * gamma_moment(k, alpha)^(1/alpha) * factor``; this factor is
    what the finite-m unbiasing constant corrects.  Positive powers that
    are integers come from the moment recursion, everything else from
    ``E[T^-q] = 1/Gamma(q) int s^(q-1) E[exp(-s T)] ds``.
    """
    _check_moment(k, alpha)
    p = -1.0 / alpha
    if p > 0 and abs(p - round(p)) < 1e-12:
        n = int(round(p))
        moments = [mu / m**j for j, mu in enumerate(_shifted_moments(k, alpha, n, 0.0))]
        return _power_of_mean(moments, m, n)
    n = max(0, math.ceil(p))
    r = n - p  # E[T^p] = E[T^n T^-r]

    def integrand(s: float) -> float:
        u = s / m
        mom = _shifted_moments(k, alpha, n, u)
        if n == 0:
            if mom[0] <= 0.0:
                return 0.0
            return math.exp(m * math.log(mom[0]))
        mom = [v / m**j for j, v in enumerate(mom)]
        return _power_of_mean(mom, m, n)

    log_norm = -log_gamma(r)
    head = integrate.quad(integrand, 0.0, 1.0, weight="alg", wvar=(r - 1.0, 0.0), limit=200, epsrel=1e-10)[0]
    tail = integrate.quad(lambda s: s ** (r - 1.0) * integrand(s), 1.0, np.inf, limit=200, epsrel=1e-10)[0]
    return math.exp(log_norm) * (head + tail)


def moment_constant(k: int, alpha: float, m: int) -> float:
    """Constant c making ``(c / mean(x^alpha))^(1/alpha)`` exactly unbiased for theta.

    Under the independent Gamma(k, theta) model this is
    ``E[T^(-1/alpha)]^(-alpha)``; as m grows it tends to the Gamma moment
    ``Gamma(k + alpha) / Gamma(k)``, and for alpha = -1 the two coincide.
    """
    g = mean_power_factor(k, float(alpha), m)
    return g ** (-alpha)


# -- batch evaluation -----------------------------------------------------------


def _as_entries(entries: np.ndarray) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise ValueError("entries must be a (trials, m) array")
    if not np.all(arr > 0):
        raise ValueError("entries must be strictly positive")
    return arr


def estimate_batch(entries: np.ndarray, k: int, estimator_id: str) -> np.ndarray:
    """Apply an estimator to each row of a (trials, m) array of renormalized k-th minima."""
    arr = _as_entries(entries)
    m = arr.shape[1]
    cid, alpha = parse_estimator_id(estimator_id)
    if k * m < 3:
        raise ValueError(f"k*m must be at least 3, got {k * m}")
    if cid == XI_HAT:
        sums = np.cumsum(arr, axis=1)[:, -1]
        return (m * (k * m - 1)) / sums
    if cid == XI3:
        logc = log_constant(k, m)
        return m * np.exp(-logc - np.log(arr).mean(axis=1))
    assert alpha is not None
    _check_moment(k, alpha)
    logc = math.log(moment_constant(k, alpha, m))
    mean_pow = (arr**alpha).mean(axis=1)
    return m * np.exp((logc - np.log(mean_pow)) / alpha)


# -- single-sketch API ----------------------------------------------------------


def xi_hat(kv: KthValues) -> Estimate:
    """``(km - 1) / sum(x_i)`` with ``x_i = entry_i / m``, i.e. ``m (km - 1) / S``."""
    k, m = kv.k, kv.m
    if k * m < 3:
        raise ValueError(f"k*m must be at least 3, got {k * m}")
    return Estimate(XI_HAT, (m * (k * m - 1)) / kv.sum_s, k, m)


def xi3_log(kv: KthValues) -> Estimate:
    k, m = kv.k, kv.m
    logc = log_constant(k, m)
    mean_log = left_sum(np.log(kv.values)) / m
    return Estimate(XI3, m * math.exp(-logc - mean_log), k, m)


def xi_moment(kv: KthValues, alpha: float) -> Estimate:
    k, m = kv.k, kv.m
    _check_moment(k, alpha)
    cid, _ = parse_estimator_id(f"moment:{alpha!r}")
    logc = math.log(moment_constant(k, alpha, m))
    mean_pow = left_sum(kv.values**alpha) / m
    return Estimate(cid, m * math.exp((logc - math.log(mean_pow)) / alpha), k, m)


def estimate(kv: KthValues, estimator_id: str = XI_HAT) -> Estimate:
    cid, alpha = parse_estimator_id(estimator_id)
    if cid == XI_HAT:
        return xi_hat(kv)
    if cid == XI3:
        return xi3_log(kv)
    assert alpha is not None
    return xi_moment(kv, alpha)
