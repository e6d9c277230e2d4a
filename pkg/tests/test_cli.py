import csv
import json

import pytest
import yaml

from swarmfs import config
from swarmfs.cli import main
from swarmfs.errors import ConfigError
from swarmfs.pipeline import _paired

from conftest import WDBC, CONFIG

SMALL = {
    "dataset": {"path": str(WDBC), "label_column": "diagnosis", "positive_label": "M", "drop_columns": ["id"]},
    "seed": 7,
    "seed_sweep": 2,
    "models": ["nearest_centroid", "gaussian_nb", "lda", "ridge"],
    "swarm": {"population": 4, "max_iterations": 3},
    "crossval": {"k": 5, "top": 3},
    "explain": {"background": 10},
}


def write_config(tmp_path, doc=None, name="run.yaml", **changes):
    doc = {**(doc or SMALL), **changes}
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


def run(cfg_path, out, *extra):
    return main([*extra[:1], "--config", str(cfg_path), "--out", str(out), "--quiet", *extra[1:]])


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("small")
    cfg = write_config(tmp)
    assert main(["run", "--all", "--config", str(cfg), "--out", str(tmp / "a"), "--quiet"]) == 0
    return cfg, tmp / "a", json.loads((tmp / "a" / "report.json").read_text())


def test_shipped_config_parses():
    cfg = config.load(CONFIG)
    assert len(cfg.models) == 22
    assert cfg.seeds == [42, 43, 44]
    assert cfg.swarm.fitness_eval_mode == "paper_faithful_test_set"
    assert cfg.dataset.path == WDBC


def test_config_rejects_bad_documents(tmp_path):
    bad = [
        {**SMALL, "models": ["svc"]},
        {**SMALL, "models": []},
        {**SMALL, "typo": 1},
        {**SMALL, "swarm": {"alpha": 0.5}},
        {**SMALL, "swarm": {"particles": 5}},
        {k: v for k, v in SMALL.items() if k != "seed"},
        {**SMALL, "seed": -1},
        {**SMALL, "models": ["knn", "knn"]},
        {**SMALL, "crossval": {"k": 1}},
    ]
    for doc in bad:
        with pytest.raises(ConfigError):
            config.parse(doc, tmp_path)
    with pytest.raises(ConfigError):
        config.load(tmp_path / "missing.yaml")


def test_overrides(tmp_path):
    cfg = config.parse(SMALL, tmp_path).with_overrides(seed="11", out=tmp_path / "o", eval_mode="validation")
    assert cfg.seed == 11 and cfg.seeds == [11, 12]
    assert cfg.swarm.fitness_eval_mode == "validation_split"
    with pytest.raises(ConfigError):
        cfg.with_overrides(seed="x")


def test_report_structure(small_run):
    cfg, out, report = small_run
    assert report["version"] and report["config"]["seeds"] == [7, 8]
    for name in SMALL["models"]:
        assert report["baseline"]["models"][name]["status"] == "ok"
        r = report["optimize"]["models"][name]
        assert abs(r["improvement_pp"] - 100 * (r["optimized_accuracy"] - r["baseline_accuracy"])) <= 1e-12
        assert [run["seed"] for run in r["runs"]] == [7, 8]
        assert 3 <= r["n_selected"] <= 12
    assert report["optimize"]["summary"]["all_masks_within_bounds"]
    freq = report["optimize"]["selection_frequency"]
    assert all(f["runs"] == 8 for f in freq)
    assert sum(f["count"] for f in freq) == sum(run["pso"]["n_selected"]
                                                for r in report["optimize"]["models"].values() for run in r["runs"])
    assert len(report["crossval"]["top"]) == 3
    assert len(report["stats"]["pairwise_fold_t_tests"]) == 3
    summary = report["preprocess"]["summary"]
    assert summary["class_counts"] == {"0": 357, "1": 212}
    assert (summary["train_size"], summary["test_size"]) == (455, 114)
    for table in ("baseline", "comparison", "selection_frequency", "crossval", "crossval_folds",
                  "pairwise_t_tests", "significance", "outliers"):
        assert (out / "tables" / f"{table}.csv").is_file()
    assert "seconds" in json.loads((out / "timings.json").read_text())["optimize"]


def test_attribution_rows(small_run):
    _, out, report = small_run
    e = report["explain"]
    rows = list(csv.DictReader((out / "attributions.csv").open()))
    assert len(rows) == 114 * len(e["features"])
    assert e["max_additivity_error"] <= 1e-6
    assert sorted(e["ranking"]) == sorted(e["features"])


def test_rerun_is_byte_identical_and_jobs_invariant(small_run, tmp_path):
    cfg, out, _ = small_run
    assert main(["run", "--all", "--config", str(cfg), "--out", str(tmp_path / "b"), "--jobs", "2", "--quiet"]) == 0
    assert (out / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert (out / "attributions.csv").read_bytes() == (tmp_path / "b" / "attributions.csv").read_bytes()


def test_preprocess_rerun_identical(small_run, tmp_path):
    cfg, out, _ = small_run
    assert main(["preprocess", "--config", str(cfg), "--out", str(tmp_path / "p"), "--quiet"]) == 0
    for name in ("data/train.csv", "data/test.csv", "stages/preprocess.json"):
        assert (out / name).read_bytes() == (tmp_path / "p" / name).read_bytes()


def test_seed_and_eval_mode_flags(small_run, tmp_path):
    cfg, _, report = small_run
    out = tmp_path / "v"
    assert main(["run", "--all", "--config", str(cfg), "--out", str(out), "--seed", "9",
                 "--eval-mode", "validation", "--quiet"]) == 0
    other = json.loads((out / "report.json").read_text())
    assert other["config"]["seed"] == 9
    assert other["config"]["swarm"]["fitness_eval_mode"] == "validation_split"
    assert other["optimize"] != report["optimize"]


def test_single_model_baseline(tmp_path):
    cfg = write_config(tmp_path, models=["knn"])
    out = tmp_path / "one"
    assert main(["preprocess", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    assert main(["baseline", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    rows = list(csv.DictReader((out / "tables" / "baseline.csv").open()))
    assert [r["model"] for r in rows] == ["knn"]


def test_exit_codes(tmp_path, capsys):
    assert main(["run", "--all", "--config", str(tmp_path / "nope.yaml")]) == 1
    assert main(["baseline", "--config", str(write_config(tmp_path, models=["svc"])), "--quiet"]) == 1
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    bad_data = write_config(tmp_path, name="bad.yaml", dataset={**SMALL["dataset"], "path": str(empty)})
    assert main(["preprocess", "--config", str(bad_data), "--out", str(tmp_path / "e"), "--quiet"]) == 2
    assert "empty file" in capsys.readouterr().err
    # a later stage without its prerequisites names the missing artifact
    assert main(["crossval", "--config", str(write_config(tmp_path)), "--out", str(tmp_path / "x"), "--quiet"]) == 2
    err = capsys.readouterr().err
    assert "missing artifact" in err and "'preprocess' stage first" in err


def test_partial_failure_exit_code(tmp_path):
    doc = {**SMALL, "models": ["nearest_centroid", {"family": "passive_aggressive", "hyperparameters": {"C": -1.0}}]}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "partial"
    assert main(["run", "--all", "--config", str(cfg), "--out", str(out), "--quiet"]) == 3
    report = json.loads((out / "report.json").read_text())
    assert report["baseline"]["models"]["passive_aggressive"]["status"] == "error"
    assert report["optimize"]["models"]["passive_aggressive"]["status"] == "error"
    assert "C > 0" in report["optimize"]["models"]["passive_aggressive"]["error"]
    assert report["optimize"]["models"]["nearest_centroid"]["status"] == "ok"


def test_identical_vectors_give_null_test():
    assert _paired([0.9, 0.95, 0.97], [0.9, 0.95, 0.97])["t_statistic"] == 0.0
    assert _paired([0.9, 0.95, 0.97], [0.9, 0.95, 0.97])["p_value"] == 1.0
