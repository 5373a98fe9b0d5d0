import json
import math
from pathlib import Path

import numpy as np
import pytest

from geomedian import DataError, ExperimentReport, InputOutputError, NumericalError
from geomedian.cli import ingest_csv, main, parse_generator_spec, render_payload

GOLDEN = Path(__file__).parent / "golden"

CROSS_ROWS = "1,0\n-1,0\n0,1\n0,-1\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ------------------------------------------------------------------ ingest

def test_ingest_two_rows(tmp_path):
    path = write(tmp_path, "a.csv", "1,2\n3,4\n")
    rows = list(ingest_csv(path))
    assert np.array_equal(np.vstack(rows), [[1.0, 2.0], [3.0, 4.0]])


def test_ingest_empty_file(tmp_path):
    path = write(tmp_path, "e.csv", "")
    with pytest.raises(DataError, match="no observations"):
        list(ingest_csv(path))


def test_ingest_parse_failure_names_line(tmp_path):
    path = write(tmp_path, "b.csv", "1,abc\n")
    with pytest.raises(DataError, match="line 1"):
        list(ingest_csv(path))


def test_ingest_non_finite_names_line(tmp_path):
    path = write(tmp_path, "c.csv", "1,2\n3,inf\n")
    with pytest.raises(DataError, match="line 2"):
        list(ingest_csv(path))


def test_ingest_inconsistent_dimension_names_first_offender(tmp_path):
    path = write(tmp_path, "d.csv", "1,2\n3,4\n5,6,7\n")
    with pytest.raises(DataError, match="line 3"):
        list(ingest_csv(path))


def test_ingest_missing_file():
    with pytest.raises(InputOutputError):
        list(ingest_csv("/no/such/file.csv"))


def test_ingest_skips_blank_lines(tmp_path):
    path = write(tmp_path, "f.csv", "1,2\n\n3,4\n\n")
    assert len(list(ingest_csv(path))) == 2


# ---------------------------------------------------------- generator spec

def test_parse_generator_spec_shorthand():
    spec, count = parse_generator_spec("gaussian-isotropic:dim=5,count=100,seed=3,scale=2.5")
    assert spec.kind == "gaussian-isotropic" and spec.dim == 5 and spec.seed == 3
    assert spec.scale == 2.5
    assert count == 100


def test_parse_generator_spec_json():
    spec, count = parse_generator_spec(
        '{"kind": "mixture-contaminated", "dim": 3, "fraction": 0.2, "center": [1, 2, 3]}'
    )
    assert spec.fraction == 0.2
    assert np.array_equal(spec.center, [1.0, 2.0, 3.0])
    assert count is None


@pytest.mark.parametrize("text", ["gaussian-isotropic", "dim=5", "gaussian-isotropic:dim", "gaussian-isotropic:dim=x", '{"dim": 5}', "gaussian-isotropic:dim=2,bogus=1"])
def test_parse_generator_spec_rejects(text):
    from geomedian import ConfigError

    with pytest.raises(ConfigError):
        parse_generator_spec(text)


# ---------------------------------------------------------------- estimate

def estimate_payload(tmp_path, rows, extra=()):
    path = write(tmp_path, "obs.csv", rows)
    out = str(tmp_path / "out.json")
    code = main(["estimate", "--input", path, "--output", out, *extra])
    assert code == 0
    return json.loads(Path(out).read_text())


def test_estimate_symmetric_cloud(tmp_path):
    # four-point cross repeated to n = 1e4: median is the origin
    payload = estimate_payload(tmp_path, CROSS_ROWS * 2500, ("--delta", "0.05"))
    assert payload["n"] == 10_000
    assert np.linalg.norm(payload["z_bar"]) < 0.1
    ball = payload["ball"]
    assert ball is not None
    assert 0 < ball["radius"] < math.inf
    assert ball["method"] == "averaged"
    assert payload["lambda_min"] > 0


def test_estimate_dim1_warning(tmp_path):
    payload = estimate_payload(tmp_path, "1\n2\n3\n4\n5\n")
    assert any("uniqueness" in w for w in payload["warnings"])


def test_estimate_identical_points_omits_ball(tmp_path):
    payload = estimate_payload(tmp_path, "1,1\n" * 20)
    assert payload["ball"] is None
    assert "coincides" in payload["ball_omitted_reason"]
    assert payload["skipped"] == 19


def test_estimate_deterministic_bytes(tmp_path):
    path = write(tmp_path, "obs.csv", CROSS_ROWS * 10)
    out1, out2 = str(tmp_path / "o1.json"), str(tmp_path / "o2.json")
    assert main(["estimate", "--input", path, "--output", out1]) == 0
    assert main(["estimate", "--input", path, "--output", out2]) == 0
    assert Path(out1).read_bytes() == Path(out2).read_bytes()


# --------------------------------------------------------------- exit codes

def test_unknown_command_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_missing_source_is_usage_error(capsys):
    assert main(["estimate"]) == 2


def test_bad_alpha_is_config_error(tmp_path, capsys):
    path = write(tmp_path, "a.csv", "1,2\n3,4\n")
    assert main(["estimate", "--input", path, "--alpha", "0.4"]) == 2


def test_data_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "bad.csv", "1,oops\n")
    assert main(["estimate", "--input", path]) == 3


def test_io_error_exit_code(capsys):
    assert main(["estimate", "--input", "/no/such/file.csv"]) == 4


def test_numerical_error_exit_code(monkeypatch, capsys):
    import geomedian.cli as cli

    def boom(args):
        raise NumericalError("synthetic failure")

    monkeypatch.setattr(cli, "cmd_estimate", boom)
    assert main(["estimate", "--generate", "gaussian-isotropic:dim=2,count=10"]) == 5


def test_unwritable_output_is_io_error(tmp_path, capsys):
    path = write(tmp_path, "a.csv", "1,2\n3,4\n")
    assert main(["estimate", "--input", path, "--output", "/no/such/dir/out.json"]) == 4


# ------------------------------------------------------------------- seeds

def test_env_seed_fallback(tmp_path, monkeypatch):
    out1, out2 = str(tmp_path / "s1.json"), str(tmp_path / "s2.json")
    spec = "gaussian-isotropic:dim=2,count=200"
    monkeypatch.setenv("GEOMED_SEED", "11")
    assert main(["estimate", "--generate", spec, "--output", out1]) == 0
    monkeypatch.delenv("GEOMED_SEED")
    assert main(["estimate", "--generate", spec, "--seed", "11", "--output", out2]) == 0
    assert Path(out1).read_bytes() == Path(out2).read_bytes()


def test_flag_overrides_env_seed(tmp_path, monkeypatch):
    out1, out2 = str(tmp_path / "s1.json"), str(tmp_path / "s2.json")
    spec = "gaussian-isotropic:dim=2,count=200"
    monkeypatch.setenv("GEOMED_SEED", "11")
    assert main(["estimate", "--generate", spec, "--seed", "12", "--output", out1]) == 0
    assert main(["estimate", "--generate", spec, "--seed", "11", "--output", out2]) == 0
    assert Path(out1).read_bytes() != Path(out2).read_bytes()


# ------------------------------------------------------- experiment commands

def test_rates_command_schema_and_long_csv(tmp_path):
    out = str(tmp_path / "rates.json")
    code = main([
        "rates", "--generate", "gaussian-isotropic:dim=2,seed=5", "--replications", "3",
        "--checkpoints", "10,100", "--seed", "4", "--output", out,
    ])
    assert code == 0
    payload = json.loads(Path(out).read_text())
    assert payload["kind"] == "rates"
    assert payload["tables"]["mse"]["columns"][0] == "n"
    # report JSON re-parses into an equal in-memory report
    rep = ExperimentReport.from_dict(payload)
    assert rep.to_dict()["tables"] == payload["tables"]
    long_csv = Path(str(tmp_path / "rates_long.csv")).read_text().splitlines()
    assert long_csv[0] == "quantity,n,value,stderr"
    assert any(line.startswith("rm_mse,10,") for line in long_csv)


def test_coverage_command(tmp_path):
    out = str(tmp_path / "cov.json")
    code = main([
        "coverage", "--generate", "gaussian-isotropic:dim=2,seed=5", "--replications", "5",
        "--checkpoints", "50", "--delta", "0.2", "--seed", "4", "--output", out,
        "--lambda-min-mode", "oracle",
    ])
    assert code == 0
    payload = json.loads(Path(out).read_text())
    cols = payload["tables"]["coverage"]["columns"]
    assert cols[:3] == ["n", "coverage", "coverage_stderr"]
    assert payload["scalars"]["lambda_min_mode"] == "oracle"


def test_tails_command(tmp_path):
    out = str(tmp_path / "tails.json")
    assert main(["tails", "--replications", "200", "--seed", "3", "--output", out]) == 0
    payload = json.loads(Path(out).read_text())
    assert len(payload["tables"]) == 3


def test_agree_command(tmp_path):
    out = str(tmp_path / "agree.json")
    code = main([
        "agree", "--generate", "gaussian-isotropic:dim=3,count=2000,seed=8",
        "--tol", "0.5", "--output", out,
    ])
    assert code == 0
    payload = json.loads(Path(out).read_text())
    assert payload["status"] == "ok"
    assert payload["passed"] is True


def test_calibrate_command(tmp_path):
    out = str(tmp_path / "cal.json")
    code = main([
        "calibrate", "--generate", "gaussian-isotropic:dim=2,seed=5", "--replications", "4",
        "--checkpoints", "10,50", "--seed", "4", "--output", out,
    ])
    assert code == 0
    payload = json.loads(Path(out).read_text())
    assert payload["scalars"]["scale_c"] > 0


def test_experiment_requires_generate(capsys):
    assert main(["rates"]) == 2


def test_workers_do_not_change_output_bytes(tmp_path):
    args = ["rates", "--generate", "gaussian-isotropic:dim=2,seed=5", "--replications", "4",
            "--checkpoints", "10,50", "--seed", "4"]
    out1, out2 = str(tmp_path / "w1.json"), str(tmp_path / "w2.json")
    assert main([*args, "--workers", "1", "--output", out1]) == 0
    assert main([*args, "--workers", "3", "--output", out2]) == 0
    p1 = json.loads(Path(out1).read_text())
    p2 = json.loads(Path(out2).read_text())
    p1.pop("runtime"), p2.pop("runtime")
    assert p1 == p2


# ------------------------------------------------------------ serialization

def _flat_numbers(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flat_numbers(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.update(_flat_numbers(v, f"{prefix}.{i}"))
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        out[prefix] = float(obj)
    return out


def test_csv_json_numeric_equality(tmp_path):
    path = write(tmp_path, "obs.csv", CROSS_ROWS * 50)
    ja, ca = str(tmp_path / "r.json"), str(tmp_path / "r.csv")
    assert main(["estimate", "--input", path, "--output", ja, "--format", "json"]) == 0
    assert main(["estimate", "--input", path, "--output", ca, "--format", "csv"]) == 0
    payload = json.loads(Path(ja).read_text())
    want = _flat_numbers(payload)
    import csv as csvmod

    with open(ca, newline="") as f:
        got = {row["path"]: row["value"] for row in csvmod.DictReader(f)}
    for key, val in want.items():
        assert key in got
        assert float(got[key]) == pytest.approx(val, rel=1e-15)


def test_render_payload_csv_escapes_strings():
    text = render_payload({"a": "x,y", "b": None, "c": True}, "csv")
    lines = text.splitlines()
    assert lines[0] == "path,value"
    assert '"x,y"' in lines[1]


# ------------------------------------------------------------- golden files

def test_golden_estimate(tmp_path, monkeypatch):
    # run from tmp with a copied input so the echoed path is stable
    (tmp_path / "obs.csv").write_bytes((GOLDEN / "obs.csv").read_bytes())
    monkeypatch.chdir(tmp_path)
    assert main(["estimate", "--input", "obs.csv", "--delta", "0.05", "--output", "estimate.json"]) == 0
    assert (tmp_path / "estimate.json").read_bytes() == (GOLDEN / "estimate.json").read_bytes()


def test_golden_rates(tmp_path):
    out = str(tmp_path / "rates.json")
    code = main([
        "rates", "--generate", "gaussian-isotropic:dim=3,seed=2", "--replications", "3",
        "--checkpoints", "10,32,100,316,1000", "--seed", "1", "--output", out,
    ])
    assert code == 0
    got = json.loads(Path(out).read_text())
    want = json.loads((GOLDEN / "rates.json").read_text())
    got.pop("runtime"), want.pop("runtime")
    assert got == want
    long_bytes = (tmp_path / "rates_long.csv").read_bytes()
    assert long_bytes == (GOLDEN / "rates_long.csv").read_bytes()
