"""Closed-form non-asymptotic bounds: confidence-ball radii for the raw
and averaged iterates, the validity rank from which the averaged ball is
guaranteed, and the exponential tail bound they rest on.

Everything here is a deterministic, pure function of its arguments.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def averaged_radius(n: int, delta: float, lambda_min: float) -> float:
    """Radius of the confidence ball for the averaged iterate:

        (4 / lambda_min) * (2/(3n) + 1/sqrt(n)) * ln(4/delta).

    lambda_min is the smallest eigenvalue of the Hessian at the median and
    must be strictly positive, else the ball is undefined. As a pure
    formula this accepts any delta with ln(4/delta) > 0; a meaningful
    confidence level lies in (0, 1), which ConfidenceBall enforces.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if not 0.0 < delta < 4.0:
        raise ConfigError("delta must lie in (0, 4) for ln(4/delta) > 0")
    if not lambda_min > 0:
        raise ConfigError("lambda_min must be > 0; the ball is undefined otherwise")
    return (4.0 / lambda_min) * (2.0 / (3.0 * n) + 1.0 / math.sqrt(n)) * math.log(4.0 / delta)


def rm_radius_shape(n: int, delta: float, alpha: float, scale_c: float) -> float:
    """Shape of the raw-iterate ball, scale_c * n**(-alpha/2) * ln(4/delta).

    The guarantee only asserts that some constant makes this work, so
    scale_c is caller-supplied; calibrate_rm_constant() fits one from
    Monte Carlo quantiles.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if not 0.0 < delta < 4.0:
        raise ConfigError("delta must lie in (0, 4) for ln(4/delta) > 0")
    if not scale_c > 0:
        raise ConfigError("scale_c must be > 0")
    return scale_c * float(n) ** (-alpha / 2.0) * math.log(4.0 / delta)


def n_delta(delta: float, alpha: float, c1: float = 1.0, c2: float = 1.0, c3: float = 1.0) -> int:
    """Rank from which the averaged ball's guarantee holds,

        max( (6 c1 / (delta ln(4/delta)))**(1/(1/2 - alpha/2)),
             (6 c2 / (delta ln(4/delta)))**(1/(alpha - 1/2)),
             (6 c3 / (delta ln(4/delta)))**(1/2) ), rounded up.

    The three constants are existential; they default to 1 and can be
    overridden. At alpha = 2/3 the first two exponents coincide (both 6).
    """
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    if not 0.5 < alpha < 1.0:
        raise ConfigError("alpha must lie in (1/2, 1)")
    if min(c1, c2, c3) <= 0:
        raise ConfigError("n_delta constants must be > 0")
    denom = delta * math.log(4.0 / delta)
    terms = (
        (6.0 * c1 / denom) ** (1.0 / (0.5 - alpha / 2.0)),
        (6.0 * c2 / denom) ** (1.0 / (alpha - 0.5)),
        (6.0 * c3 / denom) ** 0.5,
    )
    worst = max(terms)
    if not math.isfinite(worst):
        raise ConfigError("n_delta overflows a float for these parameters")
    return max(1, math.ceil(worst))


def bernstein_tail(t: float, sigma_sq: float, big_n: float) -> float:
    """Exponential tail bound 2 exp(-t^2 / (2 (sigma_sq + t big_n / 3))).

    sigma_sq bounds the sum of conditional second moments of the weighted
    martingale increments and big_n their almost-sure maximum magnitude.
    With big_n = 0 this is the sub-Gaussian form.
    """
    if not t > 0:
        raise ConfigError("t must be > 0")
    if sigma_sq < 0 or big_n < 0:
        raise ConfigError("sigma_sq and big_n must be >= 0")
    denom = 2.0 * (sigma_sq + t * big_n / 3.0)
    if denom == 0.0:
        return 0.0
    return 2.0 * math.exp(-(t * t) / denom)


def tail_inversion(target_delta: float, sigma_sq: float, big_n: float) -> float:
    """Deviation level t* = 4 (big_n/3 + sqrt(sigma_sq)) ln(4/delta).

    Chosen so that bernstein_tail(t*, sigma_sq, big_n) <= delta/2 on the
    whole meaningful range delta in (0, 1); the formula itself is defined
    whenever ln(4/delta) > 0.
    """
    if not 0.0 < target_delta < 4.0:
        raise ConfigError("target_delta must lie in (0, 4) for ln(4/delta) > 0")
    if sigma_sq < 0 or big_n < 0:
        raise ConfigError("sigma_sq and big_n must be >= 0")
    return 4.0 * (big_n / 3.0 + math.sqrt(sigma_sq)) * math.log(4.0 / target_delta)


@dataclass(frozen=True)
class BernsteinParams:
    """Variance proxy, magnitude bound and deviation level for the tail bound."""

    sigma_sq: float
    big_n: float
    t: float

    def __post_init__(self):
        if self.sigma_sq < 0 or self.big_n < 0:
            raise ConfigError("sigma_sq and big_n must be >= 0")
        if not self.t > 0:
            raise ConfigError("t must be > 0")

    def tail(self) -> float:
        return bernstein_tail(self.t, self.sigma_sq, self.big_n)


@dataclass(frozen=True, eq=False)
class ConfidenceBall:
    """A ball containing the median with probability at least 1 - delta.

    n_delta is the rank from which the guarantee is claimed, or None when
    unknown (raw-iterate balls); below_validity_rank flags balls emitted
    before that rank.
    """

    center: np.ndarray
    radius: float
    delta: float
    method: str
    n: int
    lambda_min_used: float | None = None
    n_delta: int | None = None

    def __post_init__(self):
        if self.method not in ("averaged", "robbins-monro"):
            raise ConfigError(f"unknown ball method {self.method!r}")
        if not self.radius > 0:
            raise ConfigError("radius must be > 0")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.method == "averaged" and not (self.lambda_min_used or 0) > 0:
            raise ConfigError("averaged ball requires lambda_min_used > 0")

    @property
    def below_validity_rank(self) -> bool | None:
        if self.n_delta is None:
            return None
        return self.n < self.n_delta

    def to_dict(self) -> dict:
        return {
            "center": [float(v) for v in self.center],
            "radius": self.radius,
            "delta": self.delta,
            "method": self.method,
            "n": self.n,
            "lambda_min_used": self.lambda_min_used,
            "n_delta": self.n_delta,
            "below_validity_rank": self.below_validity_rank,
        }


def averaged_ball(
    center,
    n: int,
    delta: float,
    lambda_min: float,
    alpha: float | None = None,
    n_delta_constants: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> ConfidenceBall:
    """Ball around the averaged iterate; alpha, when given, fixes the
    validity rank via n_delta()."""
    rank = n_delta(delta, alpha, *n_delta_constants) if alpha is not None else None
    return ConfidenceBall(
        center=np.asarray(center, dtype=np.float64),
        radius=averaged_radius(n, delta, lambda_min),
        delta=delta,
        method="averaged",
        n=n,
        lambda_min_used=lambda_min,
        n_delta=rank,
    )


def rm_ball(center, n: int, delta: float, alpha: float, scale_c: float) -> ConfidenceBall:
    """Ball around the raw iterate with a caller-calibrated scale constant."""
    return ConfidenceBall(
        center=np.asarray(center, dtype=np.float64),
        radius=rm_radius_shape(n, delta, alpha, scale_c),
        delta=delta,
        method="robbins-monro",
        n=n,
        lambda_min_used=None,
        n_delta=None,
    )
