"""Command-line entry points: streaming estimation, batch Weiszfeld, and
the Monte Carlo experiment commands, with JSON/CSV serialization.

Exit codes: 0 success, 2 configuration or usage error, 3 data error,
4 I/O error, 5 numerical error.
"""
import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .bounds import averaged_ball
from .errors import (
    ConfigError,
    DataError,
    GeomedianError,
    InputOutputError,
    SingularPointError,
)
from .estimator import MedianEstimator, StepSchedule
from .experiments import (
    DEFAULT_CHECKPOINTS,
    ExperimentConfig,
    ExperimentReport,
    calibrate_rm_constant,
    coverage_experiment,
    estimator_agreement,
    martingale_tail_experiment,
    rate_experiment,
)
from .hilbert import DistributionSpec, sample, substream
from .oracle import gradient, objective, weiszfeld

SEED_ENV_VAR = "GEOMED_SEED"

DIM1_WARNING = "dim-1 data: uniqueness of the median is not guaranteed"


def ingest_csv(path, dim: int | None = None):
    """Yield one vector per CSV row; strict about arity and finiteness.

    Rows must be comma-separated finite reals of constant dimension. Blank
    lines are skipped. Any malformed row aborts with a diagnostic naming
    its line number.
    """
    try:
        f = open(path, "r", encoding="utf-8")
    except OSError as e:
        raise InputOutputError(f"cannot read {path}: {e}") from e
    with f:
        count = 0
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                row = np.array([float(p) for p in parts])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric value") from None
            if not np.all(np.isfinite(row)):
                raise DataError(f"{path}: line {lineno}: non-finite value")
            if dim is None:
                dim = row.shape[0]
            elif row.shape[0] != dim:
                raise DataError(
                    f"{path}: line {lineno}: expected {dim} values, got {row.shape[0]}"
                )
            count += 1
            yield row
        if count == 0:
            raise DataError(f"{path}: no observations")


def parse_generator_spec(text: str, default_seed: int | None = None):
    """Parse a --generate spec into (DistributionSpec, count or None).

    Accepts either a JSON object, e.g.
      {"kind": "gaussian-isotropic", "dim": 5, "count": 10000, "seed": 1}
    or the shorthand  kind:key=value,key=value  with numeric values, e.g.
      gaussian-isotropic:dim=5,count=10000,seed=1
    Vector-valued parameters (center, scales) need the JSON form.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid generator spec JSON: {e}") from e
    else:
        head, _, rest = text.partition(":")
        obj = {"kind": head.strip()}
        if rest:
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                if not eq:
                    raise ConfigError(f"invalid generator spec item {item!r}")
                key = key.strip()
                try:
                    num = float(val)
                except ValueError:
                    raise ConfigError(f"invalid numeric value in generator spec: {item!r}") from None
                obj[key] = int(num) if num == int(num) and key in ("dim", "count", "seed") else num
    if "kind" not in obj or "dim" not in obj:
        raise ConfigError("generator spec requires at least kind and dim")
    count = obj.pop("count", None)
    if count is not None:
        count = int(count)
        if count < 1:
            raise ConfigError("generator spec count must be >= 1")
    if "seed" not in obj and default_seed is not None:
        obj["seed"] = default_seed
    known = {"kind", "dim", "seed", "center", "scale", "scales", "fraction", "outlier_magnitude"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown generator spec keys: {sorted(unknown)}")
    return DistributionSpec(**obj), count


def _resolve_seed(args) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return None


def _schedule(args) -> StepSchedule:
    return StepSchedule(c_gamma=args.c_gamma, alpha=args.alpha)


def _spec_dict(spec: DistributionSpec) -> dict:
    return {
        "kind": spec.kind,
        "dim": spec.dim,
        "seed": spec.seed,
        "center": None if spec.center is None else [float(v) for v in spec.center],
        "scale": spec.scale,
        "scales": None if spec.scales is None else [float(v) for v in spec.scales],
        "fraction": spec.fraction,
        "outlier_magnitude": spec.outlier_magnitude,
    }


def _load_sample_source(args):
    """Materialized --input/--generate handling for the batch commands."""
    seed = _resolve_seed(args)
    if args.input is not None:
        rows = list(ingest_csv(args.input))
        return np.vstack(rows), {"input": args.input}, seed
    spec, count = parse_generator_spec(args.generate, default_seed=seed if seed is not None else 0)
    if count is None:
        raise ConfigError("generator spec needs count=N for this command")
    pts = sample(spec, count, substream(spec.seed, 0))
    src = {"generate": _spec_dict(spec), "count": count}
    if spec.uniqueness_warning:
        src["uniqueness_warning"] = True
    return pts, src, seed


GENERATE_CHUNK = 2048


def _stream_source(args):
    """Replayable bounded-memory stream: factory() yields row vectors."""
    seed = _resolve_seed(args)
    if args.input is not None:
        path = args.input

        def factory():
            return ingest_csv(path)

        return factory, {"input": path}, seed
    spec, count = parse_generator_spec(args.generate, default_seed=seed if seed is not None else 0)
    if count is None:
        raise ConfigError("generator spec needs count=N for this command")

    def factory():
        rng = substream(spec.seed, 0)
        left = count
        while left > 0:
            c = min(GENERATE_CHUNK, left)
            yield from sample(spec, c, rng)
            left -= c

    src = {"generate": _spec_dict(spec), "count": count}
    if spec.uniqueness_warning:
        src["uniqueness_warning"] = True
    return factory, src, seed


def _streamed_lambda_min(rows, center: np.ndarray) -> float:
    """Plug-in smallest-eigenvalue estimate at a fixed center, accumulated
    one observation at a time (second pass, O(d^2) memory)."""
    from .oracle import SINGULARITY_TOL, _power_lambda_max

    d = center.shape[0]
    a_sum = 0.0
    b_sum = np.zeros((d, d))
    n = 0
    min_r = np.inf
    max_r = 0.0
    for x in rows:
        diff = x - center
        r = float(np.sqrt(np.sum(diff * diff)))
        min_r = min(min_r, r)
        max_r = max(max_r, r)
        if r > 0.0:
            a_sum += 1.0 / r
            b_sum += np.outer(diff, diff) / r**3
        n += 1
    if min_r <= SINGULARITY_TOL * max(1.0, max_r):
        raise SingularPointError("a data point coincides with the averaged estimate")
    return a_sum / n - _power_lambda_max(b_sum / n)


def cmd_estimate(args) -> dict:
    factory, src, _ = _stream_source(args)
    sched = _schedule(args)
    est = None
    for x in factory():
        if est is None:
            est = MedianEstimator(x, schedule=sched)
        else:
            est.update(x)
    if est is None:
        raise DataError("no observations")
    warnings = []
    if est.dim == 1:
        warnings.append(DIM1_WARNING)
    payload = {
        "command": "estimate",
        "n": est.n,
        "dim": est.dim,
        "skipped": est.skipped,
        "schedule": {"c_gamma": sched.c_gamma, "alpha": sched.alpha},
        "delta": args.delta,
        "source": src,
        "z": [float(v) for v in est.z],
        "z_bar": [float(v) for v in est.z_bar],
        "lambda_min": None,
        "lambda_min_mode": "plug-in",
        "lambda_min_center": "averaged-iterate",
        "ball": None,
        "ball_omitted_reason": None,
        "warnings": warnings,
    }
    try:
        lam = _streamed_lambda_min(factory(), est.z_bar)
    except SingularPointError:
        payload["ball_omitted_reason"] = "lambda-min undefined: a data point coincides with the averaged estimate"
        return payload
    payload["lambda_min"] = float(lam)
    if lam <= 0:
        payload["ball_omitted_reason"] = "lambda-min estimate is not positive"
        return payload
    ball = averaged_ball(est.z_bar, est.n, args.delta, lam, alpha=sched.alpha)
    payload["ball"] = ball.to_dict()
    return payload


def cmd_weiszfeld(args) -> dict:
    points, src, _ = _load_sample_source(args)
    res = weiszfeld(points)
    try:
        gnorm = float(np.linalg.norm(gradient(points, res.point)))
    except SingularPointError:
        gnorm = None
    warnings = [DIM1_WARNING] if points.shape[1] == 1 else []
    return {
        "command": "weiszfeld",
        "n": int(points.shape[0]),
        "dim": int(points.shape[1]),
        "source": src,
        "median": [float(v) for v in res.point],
        "iterations": res.iterations,
        "converged": res.converged,
        "gradient_norm": gnorm,
        "objective": objective(points, res.point),
        "warnings": warnings,
    }


def _experiment_config(args) -> ExperimentConfig:
    if args.generate is None:
        raise ConfigError("experiment commands need --generate")
    seed = _resolve_seed(args)
    spec, _ = parse_generator_spec(args.generate, default_seed=seed if seed is not None else 0)
    return ExperimentConfig(
        distribution=spec,
        schedule=_schedule(args),
        replications=args.replications,
        checkpoints=tuple(args.checkpoints),
        delta=args.delta,
        parallel_workers=args.workers,
        master_seed=seed if seed is not None else spec.seed,
    )


def cmd_experiment(args) -> dict:
    if args.command == "rates":
        report = rate_experiment(_experiment_config(args))
    elif args.command == "coverage":
        report = coverage_experiment(_experiment_config(args), lambda_min_mode=args.lambda_min_mode)
    elif args.command == "tails":
        seed = _resolve_seed(args)
        report = martingale_tail_experiment(replications=args.replications, seed=seed if seed is not None else 0)
    elif args.command == "calibrate":
        cfg = _experiment_config(args)
        scale_c = calibrate_rm_constant(cfg)
        report = ExperimentReport(
            kind="calibrate",
            config=cfg.to_dict(),
            scalars={"scale_c": scale_c, "delta": cfg.delta, "alpha": cfg.schedule.alpha},
            tables={},
            runtime={"workers": cfg.parallel_workers},
        )
    else:
        raise ConfigError(f"unknown experiment command {args.command!r}")
    payload = report.to_dict()
    payload["command"] = args.command
    if args.output:
        base, _ = os.path.splitext(args.output)
        _write_long_csv(base + "_long.csv", report)
    return payload


def cmd_agree(args) -> dict:
    points, src, seed = _load_sample_source(args)
    res = estimator_agreement(points, schedule=_schedule(args), tol=args.tol,
                              seed=seed if seed is not None else 0)
    return {
        "command": "agree",
        "source": src,
        "n": res.n,
        "tol": args.tol,
        "distance": res.distance,
        "passed": res.passed,
        "status": res.status,
        "weiszfeld_iterations": res.weiszfeld_iterations,
    }


def _write_long_csv(path: str, report: ExperimentReport):
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["quantity", "n", "value", "stderr"])
            for quantity, n, value, stderr in report.long_rows():
                w.writerow([quantity, _csv_scalar(n), _csv_scalar(value), _csv_scalar(stderr)])
    except OSError as e:
        raise InputOutputError(f"cannot write {path}: {e}") from e


def _csv_scalar(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def _flatten(obj, prefix, rows):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(v, f"{prefix}.{k}" if prefix else str(k), rows)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(v, f"{prefix}.{i}", rows)
    else:
        rows.append((prefix, _csv_scalar(obj)))


def render_payload(payload: dict, fmt: str) -> str:
    """JSON (indented) or a flat path,value CSV with identical content."""
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    rows = []
    _flatten(payload, "", rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "value"])
    w.writerows(rows)
    return buf.getvalue()


def _emit(payload: dict, args):
    text = render_payload(payload, args.format)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as f:
                f.write(text)
        except OSError as e:
            raise InputOutputError(f"cannot write {args.output}: {e}") from e
    else:
        sys.stdout.write(text)


def _add_source_args(p, generate_only=False):
    if generate_only:
        p.add_argument("--generate", metavar="SPEC", help="distribution spec (JSON or kind:key=val,...)")
    else:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--input", metavar="PATH", help="CSV file, one observation per row")
        g.add_argument("--generate", metavar="SPEC", help="distribution spec (JSON or kind:key=val,...)")


def _add_common_args(p, checkpoints=False, replications=None, lambda_mode=False):
    p.add_argument("--alpha", type=float, default=2.0 / 3.0, help="step exponent in (1/2, 1)")
    p.add_argument("--c-gamma", type=float, default=1.0, dest="c_gamma", help="step constant > 0")
    p.add_argument("--delta", type=float, default=0.05, help="confidence level in (0, 1)")
    p.add_argument("--seed", type=int, default=None,
                   help=f"master seed (falls back to ${SEED_ENV_VAR}, then the spec seed)")
    p.add_argument("--workers", type=int, default=1, help="parallel replication workers")
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    if checkpoints:
        p.add_argument("--checkpoints", type=_parse_checkpoints, default=list(DEFAULT_CHECKPOINTS),
                       help="comma-separated snapshot ranks")
    if replications is not None:
        p.add_argument("--replications", type=int, default=replications)
    if lambda_mode:
        p.add_argument("--lambda-min-mode", choices=("oracle", "plug-in"), default="oracle",
                       dest="lambda_min_mode")


def _parse_checkpoints(text: str):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid checkpoints {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geomedian",
                                 description="Streaming geometric median with confidence balls")
    ap.add_argument("--version", action="version", version=f"geomedian {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="stream observations through the online estimator")
    _add_source_args(p)
    _add_common_args(p)

    p = sub.add_parser("weiszfeld", help="batch empirical median")
    _add_source_args(p)
    _add_common_args(p)

    p = sub.add_parser("rates", help="Monte Carlo convergence-rate experiment")
    _add_source_args(p, generate_only=True)
    _add_common_args(p, checkpoints=True, replications=200)

    p = sub.add_parser("coverage", help="confidence-ball coverage experiment")
    _add_source_args(p, generate_only=True)
    _add_common_args(p, checkpoints=True, replications=500, lambda_mode=True)

    p = sub.add_parser("tails", help="martingale tail bound experiment")
    _add_common_args(p, replications=10_000)

    p = sub.add_parser("agree", help="online vs batch estimator agreement")
    _add_source_args(p)
    _add_common_args(p)
    p.add_argument("--tol", type=float, default=0.05)

    p = sub.add_parser("calibrate", help="calibrate the raw-iterate ball constant")
    _add_source_args(p, generate_only=True)
    _add_common_args(p, checkpoints=True, replications=200)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        if args.command == "estimate":
            payload = cmd_estimate(args)
        elif args.command == "weiszfeld":
            payload = cmd_weiszfeld(args)
        elif args.command == "agree":
            payload = cmd_agree(args)
        else:
            payload = cmd_experiment(args)
        _emit(payload, args)
        return 0
    except GeomedianError as e:
        print(f"geomedian: error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"geomedian: i/o error: {e}", file=sys.stderr)
        return InputOutputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
