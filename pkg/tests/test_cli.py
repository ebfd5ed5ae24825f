from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import yaml

from arffml.arff import read_arff
from arffml.cli import main

GOLDEN = Path(__file__).parent / "golden"

WEATHER = """\
@relation weather
@attribute outlook {sunny,overcast,rainy}
@attribute temperature numeric
@attribute humidity numeric
@attribute play {yes,no}
@data
sunny,85,85,no
sunny,80,90,no
overcast,83,86,yes
rainy,70,96,yes
rainy,68,80,yes
rainy,65,70,no
overcast,64,65,yes
sunny,72,?,no
sunny,69,70,yes
rainy,75,80,yes
sunny,75,70,yes
overcast,72,90,yes
overcast,81,75,yes
rainy,71,91,no
"""


@pytest.fixture
def weather(tmp_path):
    p = tmp_path / "weather.arff"
    p.write_text(WEATHER)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_inspect_matches_golden(capsys, weather):
    code, out, _ = run(capsys, "inspect", weather)
    assert code == 0
    assert out == (GOLDEN / "inspect_weather.txt").read_text()


def test_inspect_single_attribute(capsys, weather):
    code, out, _ = run(capsys, "inspect", weather, "--attribute", "humidity")
    assert code == 0
    assert "Name: humidity\t\tType: Numeric" in out
    assert "Missing: 1 (7%)" in out
    assert "outlook" not in out


def test_usage_errors_exit_1(capsys, weather):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "train", weather)[0] == 1  # missing required options
    code, _, err = run(capsys, "filter", weather)
    assert code == 1 and "--step" in err
    code, _, err = run(capsys, "filter", weather, "--step", "{kind: wobble}")
    assert code == 1 and "bad --step" in err


def test_data_errors_exit_2(capsys, tmp_path, weather):
    bad = tmp_path / "bad.arff"
    bad.write_text("@relation r\n@attribute a numeric\n@data\nxyz\n")
    code, _, err = run(capsys, "inspect", bad)
    assert code == 2 and "line 4" in err
    code, _, err = run(capsys, "inspect", tmp_path / "absent.arff")
    assert code == 2
    code, _, err = run(capsys, "inspect", weather, "--attribute", "nope")
    assert code == 2 and err.strip() == "arffml: error: no attribute named 'nope'"


def test_generate_is_seeded(capsys, tmp_path):
    a = run(capsys, "generate", "--rows", 50, "--seed", 3, "--city", "perth")[1]
    b = run(capsys, "--seed", 3, "generate", "--rows", 50, "--city", "perth")[1]
    c = run(capsys, "generate", "--rows", 50, "--seed", 4, "--city", "perth")[1]
    assert a == b != c
    out = tmp_path / "g.arff"
    assert run(capsys, "generate", "--rows", 20, "--missing-rate", 0.1, "--out", out)[0] == 0
    assert read_arff(out).n_rows == 20


def test_filter_save_and_load(capsys, tmp_path, weather):
    saved = tmp_path / "f.txt"
    code, fitted, _ = run(capsys, "filter", weather, "--class", "play", "--step", "replace_missing",
                          "--step", "{kind: equal_width, bins: 3}", "--save-filter", saved)
    assert code == 0
    assert "@attribute temperature {(-inf-71],(71-78],(78-inf)}" in fitted
    code, again, _ = run(capsys, "filter", weather, "--load-filter", saved)
    assert code == 0 and again == fitted
    steps = tmp_path / "steps.yaml"
    steps.write_text(yaml.safe_dump({"steps": [{"kind": "supervised_mdl"}]}))
    assert run(capsys, "filter", weather, "--class", "play", "--steps", steps)[0] == 0


@pytest.mark.parametrize("algorithm", ["naive_bayes", "random_forest", "j48", "ib1"])
def test_train_then_predict(capsys, tmp_path, weather, algorithm):
    model = tmp_path / "m.model"
    code, _, err = run(capsys, "train", weather, "--algorithm", algorithm, "--class", "play",
                       "--model", model, *(["--param", "n_trees=7"] if algorithm == "random_forest" else []))
    assert code == 0 and "trained" in err
    code, out, _ = run(capsys, "predict", model, weather)
    assert code == 0
    predicted = out.splitlines()
    assert len(predicted) == 14 and set(predicted) <= {"yes", "no"}
    if algorithm == "ib1":
        truth = [line.rsplit(",", 1)[1] for line in WEATHER.split("@data\n")[1].splitlines()]
        assert predicted == truth
    code, out, _ = run(capsys, "predict", model, weather, "--distribution", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "row,predicted,p_yes,p_no"
    for line in lines[1:]:
        _, label, *p = line.split(",")
        probs = np.array(p, dtype=float)
        assert probs.sum() == pytest.approx(1)
        assert label == ("yes", "no")[int(np.argmax(probs))]


def test_predict_on_mismatched_schema_exits_2(capsys, tmp_path, weather):
    model = tmp_path / "m.model"
    run(capsys, "train", weather, "--algorithm", "naive_bayes", "--class", "play", "--model", model)
    other = tmp_path / "other.arff"
    other.write_text(WEATHER.replace("@attribute humidity numeric", "@attribute humidity {lo,hi}")
                     .split("@data")[0] + "@data\n")
    code, _, err = run(capsys, "predict", model, other)
    assert code == 2 and "'humidity'" in err


def test_bad_param_is_reported(capsys, tmp_path, weather):
    code, _, err = run(capsys, "train", weather, "--algorithm", "j48", "--class", "play",
                       "--param", "confidence=2", "--model", tmp_path / "m")
    assert code == 2 and "confidence" in err
    code, _, err = run(capsys, "train", weather, "--algorithm", "j48", "--class", "play",
                       "--param", "depth", "--model", tmp_path / "m")
    assert code == 1


def _config(tmp_path, weather, **over):
    doc = {
        "name": "cli grid",
        "classifiers": ["naive_bayes", "j48"],
        "datasets": [{"name": "w", "train": weather.name, "dev": weather.name}],
        "rows": [{"label": "Raw", "target": "play"},
                 {"label": "Binned", "target": "play", "filters": [{"kind": "equal_width", "bins": 2}]}],
    }
    doc.update(over)
    p = tmp_path / "grid.yaml"
    p.write_text(yaml.safe_dump(doc))
    return p


def test_experiment_from_config(capsys, tmp_path, weather):
    report = tmp_path / "r.jsonl"
    code, out, _ = run(capsys, "experiment", _config(tmp_path, weather), "--format", "csv", "--report", report)
    assert code == 0
    assert out.splitlines()[0] == "dataset,configuration,class,naive_bayes,j48"
    assert len(out.splitlines()) == 3
    assert len(report.read_text().splitlines()) == 4


def test_unknown_classifier_lists_valid_names(capsys, tmp_path, weather):
    code, _, err = run(capsys, "experiment", _config(tmp_path, weather, classifiers=["naive_bayes", "svm"]))
    assert code == 2
    assert "config.classifiers[1]" in err
    for name in ("naive_bayes", "random_forest", "j48", "ib1"):
        assert name in err


@pytest.mark.parametrize(
    "over, where",
    [
        ({"datasets": [{"name": "w", "synthetic": {"city": "perth", "train_rows": -3}}]},
         "config.datasets[0].synthetic.train_rows"),
        ({"rows": [{"label": "x", "target": "play", "filters": [{"kind": "equal_width", "bins": "four"}]}]},
         "config.rows[0].filters[0].bins"),
        ({"seed": "one"}, "config.seed"),
    ],
)
def test_config_errors_name_their_path(capsys, tmp_path, weather, over, where):
    code, _, err = run(capsys, "experiment", _config(tmp_path, weather, **over))
    assert code == 2 and where in err


def test_missing_attribute_in_config_exits_2(capsys, tmp_path, weather):
    rows = [{"label": "x", "target": "nope"}]
    code, _, err = run(capsys, "experiment", _config(tmp_path, weather, rows=rows))
    assert code == 2 and "row 'x'" in err


def test_out_flag_writes_file(capsys, tmp_path, weather):
    out = tmp_path / "table.md"
    code, printed, _ = run(capsys, "experiment", _config(tmp_path, weather), "--format", "markdown", "--out", out)
    assert code == 0 and printed == ""
    assert out.read_text().startswith("# cli grid")
