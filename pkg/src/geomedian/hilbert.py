"""Vector arithmetic on R^d and seeded random data generation.

Points live in a finite-dimensional proxy of a separable Hilbert space:
plain 1-D float64 numpy arrays. Functional data are handled as fixed-grid
discretizations, so everything reduces to inner products and norms.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DimensionMismatchError

KINDS = (
    "gaussian-isotropic",
    "gaussian-anisotropic",
    "mixture-contaminated",
    "sphere-shell",
    "discretized-process",
)


def as_vector(x) -> np.ndarray:
    """Validate and return a point as a 1-D float64 array.

    Rejects empty, non-1-D and non-finite input.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise DataError(f"expected a 1-D vector with dim >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("vector has non-finite coordinates")
    return a


def inner(a, b) -> float:
    """Euclidean inner product <a, b> = sum_i a_i b_i."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.sum(a * b))


def norm(a) -> float:
    """Norm induced by ``inner``: sqrt(<a, a>)."""
    a = as_vector(a)
    return float(np.sqrt(np.sum(a * a)))


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based generator derived from (seed, key).

    Philox substreams keyed this way are reproducible and safe to use in
    parallel: one generator per Monte Carlo replication.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=key)))


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """Recipe for i.i.d. draws used by the experiment harness.

    kind selects the sampler:
      gaussian-isotropic    N(center, scale^2 I)
      gaussian-anisotropic  independent N(center_j, scales_j^2) coordinates
      mixture-contaminated  (1-fraction) N(center, scale^2 I) + fraction
                            point mass at center + outlier_magnitude * e1
      sphere-shell          uniform on the sphere of radius scale around center
      discretized-process   scaled Brownian path on a dim-point grid of [0,1],
                            shifted by center

    All kinds except mixture-contaminated are symmetric about center, so
    their geometric median is exactly center.
    """

    kind: str
    dim: int
    seed: int = 0
    center: np.ndarray | None = None
    scale: float = 1.0
    scales: np.ndarray | None = None
    fraction: float = 0.1
    outlier_magnitude: float = 50.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown distribution kind {self.kind!r}; choose from {KINDS}")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.center is not None:
            c = as_vector(self.center)
            if c.shape[0] != self.dim:
                raise ConfigError(f"center has dim {c.shape[0]}, spec has dim {self.dim}")
            object.__setattr__(self, "center", c)
        if self.scale <= 0:
            raise ConfigError("scale must be > 0")
        if self.kind == "gaussian-anisotropic":
            if self.scales is None:
                raise ConfigError("gaussian-anisotropic requires per-coordinate scales")
            s = as_vector(self.scales)
            if s.shape[0] != self.dim or np.any(s <= 0):
                raise ConfigError("scales must be positive and of length dim")
            object.__setattr__(self, "scales", s)
        if self.kind == "mixture-contaminated":
            if not 0.0 <= self.fraction < 1.0:
                raise ConfigError("contamination fraction must lie in [0, 1)")

    @property
    def uniqueness_warning(self) -> bool:
        # dim = 1 data are concentrated on a straight line, where the
        # uniqueness assumption behind all guarantees may fail
        return self.dim == 1

    def resolved_center(self) -> np.ndarray:
        return np.zeros(self.dim) if self.center is None else self.center


def known_median(spec: DistributionSpec) -> np.ndarray | None:
    """Exact geometric median when the distribution is symmetric, else None."""
    if spec.kind == "mixture-contaminated" and spec.fraction > 0:
        return None
    return spec.resolved_center()


def sample(spec: DistributionSpec, count: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``count`` i.i.d. observations as a (count, dim) array.

    Deterministic given (spec, count, generator state); with rng=None a
    fresh substream is derived from spec.seed. Successive calls on one
    generator continue its stream.
    """
    if count < 1:
        raise ConfigError("count must be >= 1")
    if rng is None:
        rng = substream(spec.seed, 0)
    d = spec.dim
    c = spec.resolved_center()
    if spec.kind == "gaussian-isotropic":
        return c + spec.scale * rng.standard_normal((count, d))
    if spec.kind == "gaussian-anisotropic":
        return c + spec.scales * rng.standard_normal((count, d))
    if spec.kind == "mixture-contaminated":
        x = c + spec.scale * rng.standard_normal((count, d))
        if spec.fraction > 0:
            outlier = c.copy()
            outlier[0] += spec.outlier_magnitude
            mask = rng.random(count) < spec.fraction
            x[mask] = outlier
        return x
    if spec.kind == "sphere-shell":
        g = rng.standard_normal((count, d))
        r = np.sqrt(np.sum(g * g, axis=1))
        r[r == 0] = 1.0
        return c + spec.scale * g / r[:, None]
    # discretized-process: Brownian increments over a uniform grid of [0, 1]
    steps = rng.standard_normal((count, d)) * (spec.scale / np.sqrt(d))
    return c + np.cumsum(steps, axis=1)
