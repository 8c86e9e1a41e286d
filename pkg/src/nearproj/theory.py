"""Closed-form superconvergence-order predictors and empirical order extraction.

delta = inf encodes the case of identical bilinear forms; the terms it
controls drop out of the minima explicitly rather than through float
arithmetic on infinities.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class RateInputs:
    gamma: float
    eta: float
    delta: float          # >= 0, or math.inf for identical forms
    mu: int = 0
    nu: int = 0
    s: int = 0
    r: int = 2
    log_factor: bool = False   # metadata only; no log(1/h) fitting is attempted

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidArgumentError("gamma must be >= 0")
        if self.eta < 2:
            raise InvalidArgumentError("eta must be >= 2")
        if self.delta < 0:
            raise InvalidArgumentError("delta must be >= 0 or inf")
        if self.s not in (0, 1):
            raise InvalidArgumentError("s must be 0 or 1")
        if not (0 <= self.mu <= self.s and 0 <= self.nu <= self.s):
            raise InvalidArgumentError("mu, nu must lie in {0,...,s}")
        if self.r <= self.s:
            raise InvalidArgumentError("r must exceed s")


def _gamma_term(ri):
    inv_eta = 0.0 if math.isinf(ri.eta) else 1.0 / ri.eta
    return ri.gamma * (0.5 - inv_eta)


def predicted_sigma(ri):
    """Extra order of the H^s-norm supercloseness beyond the projection rate."""
    terms = [_gamma_term(ri)]
    if not math.isinf(ri.delta):
        terms.append((ri.delta + 2 * ri.s - ri.mu - ri.nu) / 2.0)
    return min(terms)


def predicted_sigma_prime(ri):
    """Extra order of the L2-norm supercloseness of elliptic projections."""
    if ri.s != 1:
        raise InvalidArgumentError("sigma' applies only to s = 1 forms")
    terms = [_gamma_term(ri)]
    if not math.isinf(ri.delta):
        terms.append((ri.delta + 2 - ri.mu - ri.nu) / 2.0)
        terms.append(ri.delta - ri.mu)
    return min(terms)


def q_restriction_ok(d, nu, q):
    """Sobolev-embedding restriction on q for the L2 estimate."""
    if d < 4 - 2 * nu:
        return True
    if d == 4 - 2 * nu:
        return not math.isinf(q)
    return q <= 2.0 * d / (d - 4 + 2 * nu)


def observed_orders(hs, values):
    """order_i = log(v_{i-1}/v_i) / log(h_{i-1}/h_i) for successive rows."""
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values, dtype=float)
    if hs.shape != values.shape or hs.size < 2:
        raise InvalidArgumentError("need equally many (>= 2) mesh sizes and values")
    if np.any(np.diff(hs) >= 0):
        raise InvalidArgumentError("mesh sizes must be strictly decreasing")
    if np.any(values <= 0):
        raise InvalidArgumentError("values must be positive")
    return list(np.log(values[:-1] / values[1:]) / np.log(hs[:-1] / hs[1:]))
