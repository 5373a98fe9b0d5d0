"""Monte Carlo harness: convergence-rate fits, confidence-ball coverage,
tail-bound dominance on synthetic martingales, online-vs-batch agreement,
and calibration of the raw-iterate ball constant.

Replications are mutually independent; replication r draws from the
counter-based substream (master_seed, 0, r) in fixed-size chunks, so a
report is bit-identical for a given config no matter how replications are
distributed over workers. Auxiliary samples (surrogate median, oracle
eigenvalue) use the (master_seed, 1, k) substreams.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import averaged_radius, bernstein_tail, n_delta
from .errors import ConfigError, NumericalError
from .estimator import DEFAULT_TRUNCATION_RADIUS, DEGENERACY_TOL, StepSchedule, run_stream
from .hilbert import DistributionSpec, known_median, sample, substream
from .oracle import _power_lambda_max, as_sample, gradient, lambda_min_estimate, weiszfeld

# observations are drawn per replication in chunks of this fixed size; the
# chunk pattern is part of the algorithm so that results never depend on
# how work is split
CHUNK = 2048

DEFAULT_CHECKPOINTS = (100, 316, 1000, 3162, 10000, 31623, 100000)

MIN_SLOPE_CHECKPOINTS = 4
MIN_SLOPE_DECADES = 2.0


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything a Monte Carlo run needs.

    true_median may be left None: symmetric distributions expose their
    exact median, otherwise a Weiszfeld surrogate is computed on an
    independent sample of surrogate_size points (default: at least 10x the
    largest checkpoint and at least 1e6).
    """

    distribution: DistributionSpec
    schedule: StepSchedule = StepSchedule()
    replications: int = 200
    checkpoints: tuple = DEFAULT_CHECKPOINTS
    delta: float = 0.05
    true_median: np.ndarray | None = None
    parallel_workers: int = 1
    master_seed: int = 0
    surrogate_size: int | None = None
    truncation_radius: float | None = None

    def __post_init__(self):
        if self.replications < 2:
            raise ConfigError("replications must be >= 2")
        cps = tuple(int(c) for c in self.checkpoints)
        if len(cps) == 0:
            raise ConfigError("checkpoints must be non-empty")
        if cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigError("checkpoints must be ascending integers >= 1")
        object.__setattr__(self, "checkpoints", cps)
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.parallel_workers < 1:
            raise ConfigError("parallel_workers must be >= 1")
        if self.true_median is not None:
            m = np.asarray(self.true_median, dtype=np.float64)
            if m.shape != (self.distribution.dim,):
                raise ConfigError("true_median dimension does not match the distribution")
            object.__setattr__(self, "true_median", m)
        if self.surrogate_size is not None and self.surrogate_size < 10 * cps[-1]:
            raise ConfigError("surrogate_size must be at least 10x the largest checkpoint")

    def to_dict(self) -> dict:
        spec = self.distribution
        return {
            "distribution": {
                "kind": spec.kind,
                "dim": spec.dim,
                "seed": spec.seed,
                "center": None if spec.center is None else [float(v) for v in spec.center],
                "scale": spec.scale,
                "scales": None if spec.scales is None else [float(v) for v in spec.scales],
                "fraction": spec.fraction,
                "outlier_magnitude": spec.outlier_magnitude,
                "uniqueness_warning": spec.uniqueness_warning,
            },
            "schedule": {"c_gamma": self.schedule.c_gamma, "alpha": self.schedule.alpha},
            "replications": self.replications,
            "checkpoints": list(self.checkpoints),
            "delta": self.delta,
            "true_median": None if self.true_median is None else [float(v) for v in self.true_median],
            "master_seed": self.master_seed,
            "surrogate_size": self.surrogate_size,
            "truncation_radius": self.truncation_radius,
        }


@dataclass
class ExperimentReport:
    """Serializable result bundle.

    scalars hold named numbers, tables hold named column-oriented blocks
    ({"columns": [...], "rows": [[...], ...]}). runtime carries wall-clock
    metadata and is excluded from equality: two runs of the same config and
    seed compare equal whatever the worker count or machine load.
    """

    kind: str
    config: dict
    scalars: dict
    tables: dict
    runtime: dict = field(compare=False, default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "scalars": self.scalars,
            "tables": self.tables,
            "runtime": self.runtime,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            kind=d["kind"],
            config=d["config"],
            scalars=d["scalars"],
            tables=d["tables"],
            runtime=d.get("runtime", {}),
        )

    def long_rows(self) -> list:
        """Plot-ready rows (quantity, n, value, stderr).

        Table columns named '<q>_stderr' attach to column '<q>'; the first
        column of each table is the index (n, or t for tail tables).
        Scalars follow with an empty index.
        """
        rows = []
        for name in sorted(self.tables):
            tbl = self.tables[name]
            cols = tbl["columns"]
            stderr_of = {c[: -len("_stderr")]: i for i, c in enumerate(cols) if c.endswith("_stderr")}
            prefix = "" if name in ("mse", "coverage") else name + ":"
            for row in tbl["rows"]:
                for j, c in enumerate(cols[1:], start=1):
                    if c.endswith("_stderr"):
                        continue
                    se = row[stderr_of[c]] if c in stderr_of else None
                    rows.append((prefix + c, row[0], row[j], se))
        for name in sorted(self.scalars):
            v = self.scalars[name]
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                rows.append((name, None, v, None))
        return rows


def resolve_median(cfg: ExperimentConfig) -> tuple[np.ndarray, dict]:
    """Reference median for error measurement, with provenance info."""
    if cfg.true_median is not None:
        return cfg.true_median, {"median_source": "supplied"}
    m = known_median(cfg.distribution)
    if m is not None:
        return m, {"median_source": "symmetric-exact"}
    size = cfg.surrogate_size
    if size is None:
        size = max(10 * cfg.checkpoints[-1], 1_000_000)
    pts = sample(cfg.distribution, size, substream(cfg.master_seed, 1, 0))
    res = weiszfeld(pts, tol=1e-10, max_iter=500)
    if not res.converged:
        raise NumericalError("surrogate median did not converge; cannot measure errors")
    g = float(np.linalg.norm(gradient(pts, res.point)))
    return res.point, {
        "median_source": "surrogate",
        "surrogate_sample_size": size,
        "surrogate_gradient_norm": g,
    }


def _advance_block(spec, schedule, truncation_radius, master_seed, reps, n_max, checkpoints):
    """Advance a block of replications in lockstep.

    Returns (z_snaps, zbar_snaps, skipped) with snapshot arrays of shape
    (len(checkpoints), len(reps), dim). Row r is IEEE-identical to feeding
    the same substream through MedianEstimator one observation at a time.
    """
    radius = truncation_radius if truncation_radius is not None else DEFAULT_TRUNCATION_RADIUS
    rngs = [substream(master_seed, 0, r) for r in reps]
    b, d = len(reps), spec.dim
    cps = list(checkpoints)
    cp_index = {n: i for i, n in enumerate(cps)}
    z_snaps = np.empty((len(cps), b, d))
    zb_snaps = np.empty((len(cps), b, d))
    skipped = np.zeros(b, dtype=np.int64)
    z = None
    zbar = None
    n = 0
    produced = 0
    while produced < n_max:
        c = min(CHUNK, n_max - produced)
        x_chunk = np.stack([sample(spec, c, rng) for rng in rngs])
        produced += c
        for j in range(c):
            x = x_chunk[:, j, :]
            if z is None:
                nx = np.sqrt(np.sum(x * x, axis=1))
                z = np.where((nx <= radius)[:, None], x, 0.0)
                zbar = z.copy()
                n = 1
            else:
                diff = x - z
                r = np.sqrt(np.sum(diff * diff, axis=1))
                nx = np.sqrt(np.sum(x * x, axis=1))
                deg = r <= DEGENERACY_TOL * np.maximum(1.0, nx)
                gamma = schedule.step_size(n)
                safe_r = np.where(deg, 1.0, r)
                z = np.where(deg[:, None], z, z + gamma * (diff / safe_r[:, None]))
                skipped += deg
                n += 1
                zbar = zbar + (z - zbar) / n
            i = cp_index.get(n)
            if i is not None:
                z_snaps[i] = z
                zb_snaps[i] = zbar
    return z_snaps, zb_snaps, skipped


def _block_worker(args):
    return _advance_block(*args)


def _run_all(cfg: ExperimentConfig):
    """Snapshots for every replication, reduced in replication order."""
    n_max = cfg.checkpoints[-1]
    r = cfg.replications
    workers = min(cfg.parallel_workers, r)
    if workers == 1:
        return _advance_block(
            cfg.distribution, cfg.schedule, cfg.truncation_radius, cfg.master_seed,
            list(range(r)), n_max, cfg.checkpoints,
        )
    bounds_ = np.linspace(0, r, workers + 1).astype(int)
    tasks = [
        (cfg.distribution, cfg.schedule, cfg.truncation_radius, cfg.master_seed,
         list(range(bounds_[i], bounds_[i + 1])), n_max, cfg.checkpoints)
        for i in range(workers)
        if bounds_[i] < bounds_[i + 1]
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_block_worker, tasks))
    z = np.concatenate([p[0] for p in parts], axis=1)
    zb = np.concatenate([p[1] for p in parts], axis=1)
    sk = np.concatenate([p[2] for p in parts])
    return z, zb, sk


def _ols_loglog(ns, values):
    """Least-squares slope of log(value) against log(n), with its stderr."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    xc = x - x.mean()
    slope = float(np.sum(xc * y) / np.sum(xc * xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    dof = len(x) - 2
    se = float(np.sqrt(np.sum(resid**2) / dof / np.sum(xc * xc))) if dof > 0 else float("nan")
    return slope, se


def _slopes_eligible(cps) -> bool:
    return len(cps) >= MIN_SLOPE_CHECKPOINTS and math.log10(cps[-1] / cps[0]) >= MIN_SLOPE_DECADES - 1e-9


def rate_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Mean squared errors of both iterates at each checkpoint, with
    log-log slope fits for the raw (target -alpha) and averaged (target -1)
    rates. Slopes are only fitted over >= 4 checkpoints spanning >= 2
    decades."""
    t0 = time.monotonic()
    m, minfo = resolve_median(cfg)
    z, zb, skipped = _run_all(cfg)
    r = cfg.replications
    sq_rm = np.sum((z - m) ** 2, axis=2)
    sq_av = np.sum((zb - m) ** 2, axis=2)
    rm_mse = sq_rm.mean(axis=1)
    av_mse = sq_av.mean(axis=1)
    rm_se = sq_rm.std(axis=1, ddof=1) / math.sqrt(r)
    av_se = sq_av.std(axis=1, ddof=1) / math.sqrt(r)
    scalars = {
        "replications": r,
        "skipped_steps_total": int(skipped.sum()),
        "rm_slope": None,
        "rm_slope_stderr": None,
        "avg_slope": None,
        "avg_slope_stderr": None,
        **minfo,
    }
    if _slopes_eligible(cfg.checkpoints):
        scalars["rm_slope"], scalars["rm_slope_stderr"] = _ols_loglog(cfg.checkpoints, rm_mse)
        scalars["avg_slope"], scalars["avg_slope_stderr"] = _ols_loglog(cfg.checkpoints, av_mse)
    rows = [
        [int(n), float(rm_mse[i]), float(rm_se[i]), float(av_mse[i]), float(av_se[i])]
        for i, n in enumerate(cfg.checkpoints)
    ]
    return ExperimentReport(
        kind="rates",
        config=cfg.to_dict(),
        scalars=scalars,
        tables={
            "mse": {
                "columns": ["n", "rm_mse", "rm_mse_stderr", "avg_mse", "avg_mse_stderr"],
                "rows": rows,
            }
        },
        runtime={"seconds": time.monotonic() - t0, "workers": cfg.parallel_workers},
    )


def _prefix_moments(spec, master_seed, rep, n, n_max, center):
    """Replay the first n observations of a replication substream and
    accumulate the inverse-distance moments at a fixed center.

    The replay draws with the same chunk pattern as the main run so the
    observations are identical. Returns (a, b, min_r) with a = mean(1/r)
    and b = mean(d d^T / r^3).
    """
    rng = substream(master_seed, 0, rep)
    d = spec.dim
    a_sum = 0.0
    b_sum = np.zeros((d, d))
    min_r = np.inf
    produced = 0
    used = 0
    while used < n:
        c = min(CHUNK, n_max - produced)
        x = sample(spec, c, rng)
        produced += c
        take = min(c, n - used)
        dd = x[:take] - center
        rr = np.sqrt(np.sum(dd * dd, axis=1))
        min_r = min(min_r, float(np.min(rr)))
        if min_r <= 0.0:
            break
        a_sum += float(np.sum(1.0 / rr))
        b_sum += (dd.T * (1.0 / rr**3)) @ dd
        used += take
    return a_sum / n, b_sum / n, min_r


def coverage_experiment(
    cfg: ExperimentConfig,
    lambda_min_mode: str = "oracle",
    lambda_min_override: float | None = None,
) -> ExperimentReport:
    """Empirical coverage of the averaged-iterate confidence ball.

    oracle mode estimates the smallest Hessian eigenvalue once from a
    large independent sample at the reference median; plug-in mode
    re-estimates it per replication and checkpoint at the averaged iterate
    from that replication's own prefix. Replications whose estimate is not
    strictly positive are excluded and counted.
    """
    if lambda_min_mode not in ("oracle", "plug-in"):
        raise ConfigError(f"unknown lambda_min_mode {lambda_min_mode!r}")
    t0 = time.monotonic()
    m, minfo = resolve_median(cfg)
    _, zb, _ = _run_all(cfg)
    r = cfg.replications
    cps = cfg.checkpoints
    err = np.sqrt(np.sum((zb - m) ** 2, axis=2))  # (C, R)
    oracle_lambda = None
    if lambda_min_mode == "oracle":
        if lambda_min_override is not None:
            oracle_lambda = float(lambda_min_override)
        else:
            size = min(max(10 * cps[-1], 100_000), 1_000_000)
            pts = sample(cfg.distribution, size, substream(cfg.master_seed, 1, 1))
            oracle_lambda = lambda_min_estimate(pts, m)
        if oracle_lambda <= 0:
            raise NumericalError("oracle lambda_min estimate is not positive")
    rank = n_delta(cfg.delta, cfg.schedule.alpha)
    rows = []
    invalid_total = 0
    for i, n in enumerate(cps):
        covered = 0
        valid = 0
        radius_sum = 0.0
        for rep in range(r):
            if oracle_lambda is not None:
                lam = oracle_lambda
            else:
                a, b, min_r = _prefix_moments(
                    cfg.distribution, cfg.master_seed, rep, n, cps[-1], zb[i, rep]
                )
                lam = a - _power_lambda_max(b) if min_r > 0 else -1.0
            if lam <= 0:
                invalid_total += 1
                continue
            radius = averaged_radius(n, cfg.delta, lam)
            radius_sum += radius
            valid += 1
            if err[i, rep] <= radius:
                covered += 1
        p = covered / valid if valid else float("nan")
        se = math.sqrt(p * (1.0 - p) / valid) if valid else float("nan")
        rows.append(
            [int(n), p, se, radius_sum / valid if valid else float("nan"), valid, bool(n < rank)]
        )
    return ExperimentReport(
        kind="coverage",
        config=cfg.to_dict(),
        scalars={
            "delta": cfg.delta,
            "lambda_min_mode": lambda_min_mode,
            "lambda_min_oracle": oracle_lambda,
            "n_delta_default_constants": rank,
            "invalid_replications": invalid_total,
            **minfo,
        },
        tables={
            "coverage": {
                "columns": [
                    "n", "coverage", "coverage_stderr", "mean_radius", "valid_replications",
                    "below_validity_rank",
                ],
                "rows": rows,
            }
        },
        runtime={"seconds": time.monotonic() - t0, "workers": cfg.parallel_workers},
    )


@dataclass(frozen=True, eq=False)
class TailScenario:
    """Synthetic weighted martingale: S = sum_k w_k xi_{k+1} with bounded
    increments.

    increment kinds:
      rademacher-e1  +-bound * e1 coin flips
      sphere         uniform on the sphere of radius bound
    Per-step magnitude is |w_k| * bound a.s.; per-step conditional second
    moment is w_k^2 * bound^2.
    """

    name: str
    dim: int
    weights: np.ndarray
    increment: str = "sphere"
    bound: float = 1.0

    def __post_init__(self):
        if self.increment not in ("rademacher-e1", "sphere"):
            raise ConfigError(f"unknown increment kind {self.increment!r}")
        if self.dim < 1 or self.bound <= 0:
            raise ConfigError("dim must be >= 1 and bound > 0")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or not np.all(np.isfinite(w)):
            raise ConfigError("weights must be a finite 1-D array")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def sigma_sq(self) -> float:
        return float(np.sum(self.weights**2)) * self.bound**2

    @property
    def big_n(self) -> float:
        return float(np.max(np.abs(self.weights))) * self.bound


def default_tail_scenarios() -> list:
    """The three shipped bounded-martingale scenarios."""
    k = np.arange(1, 1001, dtype=np.float64)
    return [
        TailScenario("coin-flip-e1", dim=2, weights=np.ones(1000), increment="rademacher-e1", bound=1.0),
        TailScenario("decaying-weights-sphere", dim=5, weights=k ** (-2.0 / 3.0), increment="sphere", bound=1.0),
        TailScenario("averaged-sphere-radius2", dim=3, weights=np.full(1000, 1e-3), increment="sphere", bound=2.0),
    ]


def _draw_increments(scenario: TailScenario, rng, count: int) -> np.ndarray:
    if scenario.increment == "rademacher-e1":
        xi = np.zeros((count, scenario.dim))
        xi[:, 0] = scenario.bound * (2.0 * rng.integers(0, 2, count) - 1.0)
        return xi
    g = rng.standard_normal((count, scenario.dim))
    nrm = np.sqrt(np.sum(g * g, axis=1))
    nrm[nrm == 0] = 1.0
    return scenario.bound * g / nrm[:, None]


def default_t_grid(scenario: TailScenario) -> np.ndarray:
    # spans the region where Monte Carlo can resolve the tail; beyond ~3
    # standard deviations the bound dwarfs any empirical frequency anyway
    base = math.sqrt(scenario.sigma_sq) if scenario.sigma_sq > 0 else scenario.big_n
    return base * np.array([0.5, 1.0, 1.5, 2.0, 3.0])


def martingale_tail_experiment(
    scenarios=None,
    t_grids: dict | None = None,
    replications: int = 10_000,
    seed: int = 0,
) -> ExperimentReport:
    """Empirical tail of ||sum_k w_k xi_{k+1}|| against the closed-form
    bound, per scenario and grid point.

    Every simulated increment is checked against the declared almost-sure
    bound; a violation means the harness itself is wrong and aborts.
    """
    if scenarios is None:
        scenarios = default_tail_scenarios()
    if isinstance(scenarios, TailScenario):
        scenarios = [scenarios]
    if replications < 1:
        raise ConfigError("replications must be >= 1")
    t0 = time.monotonic()
    tables = {}
    for idx, sc in enumerate(scenarios):
        rng = substream(seed, 0, idx)
        s = np.zeros((replications, sc.dim))
        tol = sc.bound * (1.0 + 1e-9)
        for k in range(sc.n):
            xi = _draw_increments(sc, rng, replications)
            if float(np.max(np.sum(xi * xi, axis=1))) > tol * tol:
                raise NumericalError(f"harness bug: increment bound violated in {sc.name}")
            if sc.weights[k] != 0.0:
                s += sc.weights[k] * xi
        norms = np.sqrt(np.sum(s * s, axis=1))
        grid = t_grids.get(sc.name) if t_grids else None
        if grid is None:
            grid = default_t_grid(sc)
        rows = []
        for t in np.asarray(grid, dtype=np.float64):
            emp = float(np.mean(norms >= t))
            rows.append([float(t), emp, bernstein_tail(float(t), sc.sigma_sq, sc.big_n)])
        tables[f"tails:{sc.name}"] = {
            "columns": ["t", "empirical_tail", "bound"],
            "rows": rows,
        }
    return ExperimentReport(
        kind="tails",
        config={"replications": replications, "seed": seed,
                "scenarios": [sc.name for sc in scenarios]},
        scalars={"replications": replications},
        tables=tables,
        runtime={"seconds": time.monotonic() - t0, "workers": 1},
    )


@dataclass(frozen=True)
class AgreementResult:
    distance: float
    passed: bool | None
    status: str
    n: int
    weiszfeld_iterations: int


def estimator_agreement(points, schedule=None, tol: float = 0.05, seed: int = 0) -> AgreementResult:
    """Distance between the averaged online estimate (over one random
    permutation of the sample) and the batch Weiszfeld median.

    Returns status 'inconclusive' with passed None when Weiszfeld fails to
    converge.
    """
    points = as_sample(points)
    if points.shape[0] < 10:
        raise ConfigError("agreement check needs at least 10 observations")
    order = substream(seed, 0).permutation(points.shape[0])
    est, _ = run_stream(points[order], schedule=schedule)
    w = weiszfeld(points, tol=1e-10, max_iter=500)
    if not w.converged:
        return AgreementResult(
            distance=float("nan"), passed=None, status="inconclusive",
            n=points.shape[0], weiszfeld_iterations=w.iterations,
        )
    dist = float(np.linalg.norm(est.z_bar - w.point))
    return AgreementResult(
        distance=dist, passed=bool(dist <= tol), status="ok",
        n=points.shape[0], weiszfeld_iterations=w.iterations,
    )


def calibrate_rm_constant(cfg: ExperimentConfig) -> float:
    """Smallest scale for the raw-iterate ball that covers a (1 - delta)
    fraction of replications at every checkpoint of this config.

    Computed as the largest per-checkpoint empirical (1 - delta) order
    quantile of ||Z_n - m|| n^(alpha/2) / ln(4/delta).
    """
    m, _ = resolve_median(cfg)
    z, _, _ = _run_all(cfg)
    err = np.sqrt(np.sum((z - m) ** 2, axis=2))  # (C, R)
    log_term = math.log(4.0 / cfg.delta)
    best = 0.0
    for i, n in enumerate(cfg.checkpoints):
        stat = err[i] * float(n) ** (cfg.schedule.alpha / 2.0) / log_term
        q = float(np.quantile(stat, 1.0 - cfg.delta, method="inverted_cdf"))
        best = max(best, q)
    return best
