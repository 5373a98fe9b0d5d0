"""Online geometric median: unit-step stochastic gradient plus averaging.

Each observation x moves the iterate by a step of length gamma_n toward x,

    Z_{n+1} = Z_n + gamma_n * (x - Z_n) / ||x - Z_n||,

and the averaged iterate tracks the running mean of Z_1, ..., Z_n. The
whole mutable state is (n, Z_n, Zbar_n) plus a skip counter, so memory is
O(d) regardless of stream length.
"""
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import ConfigError, DataError, DimensionMismatchError
from .hilbert import as_vector

# steps where x falls on the current iterate carry no direction; anything
# below this relative radius is treated as coincident
DEGENERACY_TOL = 1e-12

DEFAULT_TRUNCATION_RADIUS = 1e3


@dataclass(frozen=True)
class StepSchedule:
    """Gain sequence gamma_n = c_gamma * n**(-alpha).

    alpha must lie strictly between 1/2 and 1: the steps are then square
    summable but not summable, which is what the convergence guarantees
    require. The default alpha = 2/3 balances the two leading terms of the
    validity rank of the averaged confidence ball.
    """

    c_gamma: float = 1.0
    alpha: float = 2.0 / 3.0

    def __post_init__(self):
        if not self.c_gamma > 0:
            raise ConfigError("c_gamma must be > 0")
        if not 0.5 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in the open interval (1/2, 1)")

    def step_size(self, n: int) -> float:
        if n < 1:
            raise ConfigError("step index n must be >= 1")
        return self.c_gamma * float(n) ** -self.alpha


class MartingaleIncrement(NamedTuple):
    """Diagnostics of one accepted update.

    u is the unit direction whose conditional mean is the objective
    gradient at the pre-update iterate; xi = gradient(Z_n) - u is the noise
    increment, available only when a gradient oracle is attached, and has
    norm at most 2.
    """

    u: np.ndarray
    xi: np.ndarray | None


class MedianEstimator:
    """Single-pass estimator state.

    Parameters:
        x1: first observation; becomes Z_1 unless it falls outside the
            truncation ball, in which case Z_1 is the origin.
        schedule: step-size schedule, default StepSchedule().
        truncation_radius: bound enforced on Z_1. Defaults to 10x the
            scale_estimate when one is supplied, else 1e3.
        scale_estimate: optional typical data magnitude.
        gradient_oracle: optional callable h -> gradient vector; when set,
            update() reports the noise increment xi.
    """

    def __init__(
        self,
        x1,
        schedule: StepSchedule | None = None,
        truncation_radius: float | None = None,
        scale_estimate: float | None = None,
        gradient_oracle: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        x1 = as_vector(x1)
        if truncation_radius is None:
            truncation_radius = (
                10.0 * scale_estimate if scale_estimate is not None else DEFAULT_TRUNCATION_RADIUS
            )
        if truncation_radius <= 0:
            raise ConfigError("truncation_radius must be > 0")
        self.schedule = schedule if schedule is not None else StepSchedule()
        self.gradient_oracle = gradient_oracle
        if float(np.sqrt(np.sum(x1 * x1))) <= truncation_radius:
            self.z = x1.copy()
        else:
            self.z = np.zeros_like(x1)
        self.z_bar = self.z.copy()
        self.n = 1
        self.skipped = 0

    @property
    def dim(self) -> int:
        return self.z.shape[0]

    def update(self, x) -> MartingaleIncrement | None:
        """Consume one observation; returns None when the step is degenerate."""
        x = as_vector(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatchError(f"observation dim {x.shape[0]} != state dim {self.dim}")
        diff = x - self.z
        r = float(np.sqrt(np.sum(diff * diff)))
        nx = float(np.sqrt(np.sum(x * x)))
        if r <= DEGENERACY_TOL * max(1.0, nx):
            self.skipped += 1
            self.n += 1
            self.z_bar = self.z_bar + (self.z - self.z_bar) / self.n
            return None
        gamma = self.schedule.step_size(self.n)
        u = -diff / r
        xi = None
        if self.gradient_oracle is not None:
            xi = self.gradient_oracle(self.z) - u
        self.z = self.z + gamma * (diff / r)
        self.n += 1
        self.z_bar = self.z_bar + (self.z - self.z_bar) / self.n
        return MartingaleIncrement(u=u, xi=xi)


class Snapshot(NamedTuple):
    n: int
    z: np.ndarray
    z_bar: np.ndarray


def run_stream(
    observations: Iterable,
    schedule: StepSchedule | None = None,
    checkpoints: Iterable[int] = (),
    truncation_radius: float | None = None,
    scale_estimate: float | None = None,
    gradient_oracle=None,
) -> tuple[MedianEstimator, dict[int, Snapshot]]:
    """Drive the estimator over a stream, snapshotting at the given ranks.

    checkpoints must be within [1, stream length]; snapshots are taken at
    exactly those observation counts. Returns the final state and a dict
    n -> Snapshot in checkpoint order.
    """
    cps = sorted(set(int(c) for c in checkpoints))
    if cps and cps[0] < 1:
        raise ConfigError("checkpoints must be >= 1")
    want = set(cps)
    est = None
    snaps: dict[int, Snapshot] = {}
    for x in observations:
        if est is None:
            est = MedianEstimator(
                x,
                schedule=schedule,
                truncation_radius=truncation_radius,
                scale_estimate=scale_estimate,
                gradient_oracle=gradient_oracle,
            )
        else:
            est.update(x)
        if est.n in want:
            snaps[est.n] = Snapshot(est.n, est.z.copy(), est.z_bar.copy())
    if est is None:
        raise DataError("no observations")
    if cps and cps[-1] > est.n:
        raise ConfigError(f"checkpoint {cps[-1]} exceeds stream length {est.n}")
    return est, snaps
