"""Centred singular value thresholding for the number of mixture components."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Union

import numpy as np

from .spectral import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_DIRECT_CUTOFF,
    SpectrumResult,
    Strategy,
    as_data_matrix,
    singular_values,
)

# "log" for t_n = ln(n), or an explicit non-negative number
TnRule = Union[str, float]


@dataclass(frozen=True)
class ThresholdSpec:
    rule: TnRule
    p: int
    n: int
    tn: float
    value: float  # T = sqrt(p) + sqrt(n) + tn

    @property
    def noise_level(self) -> float:
        return math.sqrt(self.p) + math.sqrt(self.n)


@dataclass(frozen=True)
class EstimateReport:
    k_hat: int
    r: int
    threshold: ThresholdSpec
    spectrum: SpectrumResult
    wall_time: float

    @property
    def singular_values(self) -> np.ndarray:
        return self.spectrum.singular_values


def parse_tn_rule(rule: TnRule) -> TnRule:
    """Normalise a t_n rule: ``"log"`` or a non-negative float."""
    if isinstance(rule, str):
        key = rule.strip().lower()
        if key in ("log", "log_n", "ln"):
            return "log"
        try:
            rule = float(key)
        except ValueError:
            raise ValueError(f"t_n rule must be 'log' or a number, got {rule!r}") from None
    value = float(rule)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"explicit t_n must be finite and >= 0, got {value}")
    return value


def threshold(p: int, n: int, rule: TnRule = "log") -> ThresholdSpec:
    """Noise threshold ``T = sqrt(p) + sqrt(n) + t_n``.

    With the default rule ``t_n = ln(n)``, which needs ``n >= 2``.
    """
    if p < 1 or n < 1:
        raise ValueError(f"p and n must be positive, got p={p}, n={n}")
    rule = parse_tn_rule(rule)
    if rule == "log":
        if n < 2:
            raise ValueError("the log rule needs n >= 2 (ln n must be positive)")
        tn = math.log(n)
    else:
        tn = float(rule)
    return ThresholdSpec(rule, int(p), int(n), tn, math.sqrt(p) + math.sqrt(n) + tn)


def count_above(values: np.ndarray, T: float) -> int:
    # strict: a value equal to T is not counted
    return int(np.count_nonzero(np.asarray(values) > T))


def csvt(
    X,
    tn: TnRule = "log",
    strategy: Strategy = "auto",
    *,
    direct_cutoff: int = DEFAULT_DIRECT_CUTOFF,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> EstimateReport:
    """Estimate the number of components in ``X`` (``p x n``, samples as columns).

    Centres the columns, counts the singular values strictly above the
    threshold ``T`` and returns one more than that count.

    Examples
    --------
    >>> import numpy as np
    >>> csvt(np.zeros((3, 5)), tn=1.0).k_hat
    1
    """
    t0 = time.perf_counter()
    X = as_data_matrix(X)
    p, n = X.shape
    if n < 2:
        raise ValueError("need at least two samples; centring one sample leaves nothing")
    spec = threshold(p, n, tn)
    spectrum = singular_values(
        X, strategy, center=True, direct_cutoff=direct_cutoff, block_size=block_size
    )
    r = count_above(spectrum.singular_values, spec.value)
    return EstimateReport(r + 1, r, spec, spectrum, time.perf_counter() - t0)


def raw_count(
    X,
    tn: TnRule = "log",
    strategy: Strategy = "auto",
    *,
    direct_cutoff: int = DEFAULT_DIRECT_CUTOFF,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> int:
    """Number of uncentred singular values strictly above ``T`` (no +1).

    This is the naive baseline that skips centring; it is kept for the
    counterexamples where it goes wrong.
    """
    X = as_data_matrix(X)
    p, n = X.shape
    spec = threshold(p, n, tn)
    spectrum = singular_values(
        X, strategy, center=False, direct_cutoff=direct_cutoff, block_size=block_size
    )
    return count_above(spectrum.singular_values, spec.value)
