"""Bucketed k-minimum-values distinct counting.

Quick start::

    from kmvcount import Sketch, SketchConfig, estimate

    sk = Sketch(SketchConfig(k=8, m=128, seed=0))
    sk.insert_many(line.encode() for line in open("words.txt"))
    print(estimate(sk.kth_values()).value)
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .estimators import Estimate, estimate, estimate_batch, parse_estimator_id, xi3_log, xi_hat, xi_moment
from .hashing import UnitHash, hash_to_unit
from .sketch import (
    ConfigMismatchError,
    KthValues,
    Sketch,
    SketchConfig,
    SketchFormatError,
    deserialize,
    merge,
    serialize,
    sketch_new,
)
from .special import gamma_cdf, gamma_p, log_gamma

__all__ = [
    "BACKEND",
    "ConfigMismatchError",
    "Estimate",
    "KthValues",
    "Sketch",
    "SketchConfig",
    "SketchFormatError",
    "UnitHash",
    "deserialize",
    "estimate",
    "estimate_batch",
    "gamma_cdf",
    "gamma_p",
    "hash_to_unit",
    "log_gamma",
    "merge",
    "parse_estimator_id",
    "serialize",
    "sketch_new",
    "xi3_log",
    "xi_hat",
    "xi_moment",
]
