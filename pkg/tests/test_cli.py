import csv
import json
from fractions import Fraction

import pytest

from opttree.cli import main

TOY = "a,b,y\n0,1,1\n1,0,0\n0,1,1\n1,1,0\n0,0,1\n1,0,0\n"
NOISY = ("a,b,y\n0,1,1\n1,0,0\n0,1,1\n1,1,0\n0,0,1\n1,0,0\n"
         "0,0,0\n1,1,0\n")


@pytest.fixture
def toy_csv(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text(TOY)
    return p


def _fit(tmp_path, toy_csv, *extra):
    out = tmp_path / "model.json"
    code = main(["fit", "--data", str(toy_csv), "--label", "y",
                 "--lambda", "0.01", "--out", str(out), *extra])
    return code, out


def test_fit_writes_certified_model(tmp_path, toy_csv, capsys):
    code, out = _fit(tmp_path, toy_csv)
    assert code == 0
    model = json.loads(out.read_text())
    assert model["certified"] is True
    assert model["lambda"] == "0.01"
    assert model["objective"] == "1/50"
    assert model["training_accuracy"] == 1.0
    assert len(model["leaves"]) == 2
    clauses = [c for leaf in model["leaves"] for c in leaf["clauses"]]
    assert all(c["feature"] in ("a", "b") for c in clauses)
    captured = capsys.readouterr().out
    assert "certified: true" in captured
    assert "objective: 1/50" in captured


def test_fit_lambda_zero_is_usage_error(tmp_path, toy_csv, capsys):
    code, _ = _fit(tmp_path, toy_csv, "--lambda")
    # missing value -> argparse usage error is also exit 1
    assert code == 1
    out = tmp_path / "model.json"
    code = main(["fit", "--data", str(toy_csv), "--label", "y",
                 "--lambda", "0", "--out", str(out)])
    assert code == 1
    assert "lambda" in capsys.readouterr().err.lower()


def test_fit_bad_csv_is_format_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n2,0\n")
    code = main(["fit", "--data", str(bad), "--label", "y",
                 "--lambda", "0.01", "--out", str(tmp_path / "m.json")])
    assert code == 1


def test_fit_time_limit_uncertified(tmp_path):
    hard = tmp_path / "hard.csv"
    import random
    rng = random.Random(1)
    rows = ["".join(str(rng.randint(0, 1)) for _ in range(9))
            for _ in range(80)]
    hard.write_text("a,b,c,d,e,f,g,h,y\n"
                    + "\n".join(",".join(r) for r in rows) + "\n")
    code = main(["fit", "--data", str(hard), "--label", "y",
                 "--lambda", "0.002", "--out", str(tmp_path / "m.json"),
                 "--time-limit", "0.01", "--trace-interval", "5"])
    assert code == 3
    model = json.loads((tmp_path / "m.json").read_text())
    assert model["certified"] is False


def test_fit_trace_csv(tmp_path, toy_csv):
    trace = tmp_path / "trace.csv"
    code, _ = _fit(tmp_path, toy_csv, "--trace", str(trace),
                   "--trace-interval", "1", "--policy", "lower_bound")
    assert code == 0
    with open(trace, newline="") as fh:
        records = list(csv.DictReader(fh))
    assert records
    assert list(records[0]) == ["elapsed_s", "trees_evaluated",
                                "best_objective", "min_queue_lower_bound",
                                "queue_size", "log10_remaining_bound"]
    objs = [Fraction(r["best_objective"]) for r in records]
    assert objs == sorted(objs, reverse=True)
    mins = [Fraction(r["min_queue_lower_bound"]) for r in records
            if r["min_queue_lower_bound"]]
    assert mins == sorted(mins)


def test_predict_roundtrip_identity(tmp_path, toy_csv, capsys):
    code, out = _fit(tmp_path, toy_csv)
    model = json.loads(out.read_text())
    capsys.readouterr()
    code = main(["predict", "--model", str(out), "--data", str(toy_csv),
                 "--label", "y"])
    assert code == 0
    text = capsys.readouterr().out
    acc = float(text.split("accuracy: ")[1])
    lam = Fraction(model["lambda"])
    h = len(model["leaves"])
    objective = Fraction(model["objective"])
    assert acc == pytest.approx(float(1 - objective + lam * h))


def test_predict_missing_feature(tmp_path, toy_csv, capsys):
    code, out = _fit(tmp_path, toy_csv)
    other = tmp_path / "other.csv"
    other.write_text("c,y\n0,1\n1,0\n")
    code = main(["predict", "--model", str(out), "--data", str(other),
                 "--label", "y"])
    assert code == 1


def test_predict_broken_partition_is_internal_error(tmp_path, toy_csv,
                                                    capsys):
    code, out = _fit(tmp_path, toy_csv)
    model = json.loads(out.read_text())
    model["leaves"] = model["leaves"][:1]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(model))
    code = main(["predict", "--model", str(broken), "--data", str(toy_csv),
                 "--label", "y"])
    assert code == 2


def test_count(capsys):
    assert main(["count", "--features", "10", "--depth", "2"]) == 0
    assert capsys.readouterr().out.strip() == "1000"
    assert main(["count", "--features", "20", "--depth", "2"]) == 0
    assert capsys.readouterr().out.strip() == "8000"
    assert main(["count", "--features", "10", "--depth", "1"]) == 0
    assert capsys.readouterr().out.strip() == "10"


def test_oracle_command(tmp_path, toy_csv, capsys):
    code = main(["oracle", "--data", str(toy_csv), "--label", "y",
                 "--lambda", "0.01"])
    assert code == 0
    text = capsys.readouterr().out
    assert "objective: 1/50" in text
    assert "leaves: 2" in text


def test_oracle_resource_error(tmp_path, toy_csv, capsys):
    code = main(["oracle", "--data", str(toy_csv), "--label", "y",
                 "--lambda", "0.01", "--max-features", "1"])
    assert code == 1


def test_ablate_table(tmp_path, capsys):
    data = tmp_path / "noisy.csv"
    data.write_text(NOISY)
    out = tmp_path / "ablate.csv"
    code = main(["ablate", "--data", str(data), "--label", "y",
                 "--lambda", "0.05", "--out", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    header = ["variant", "total_time_s", "time_to_optimum_s",
              "trees_evaluated", "trees_to_optimum", "max_queue_size"]
    with open(out, newline="") as fh:
        assert next(csv.reader(fh)) == header
    variants = {r["variant"] for r in rows}
    assert "all_bounds" in variants
    assert "no_lookahead" in variants
    assert any(v.startswith("policy_") for v in variants)


def test_determinism_byte_identical_models(tmp_path, toy_csv):
    _, out1 = _fit(tmp_path, toy_csv)
    first = out1.read_bytes()
    _, out2 = _fit(tmp_path, toy_csv)
    assert out2.read_bytes() == first


def test_unknown_subcommand_exit_code():
    assert main(["frobnicate"]) == 1
