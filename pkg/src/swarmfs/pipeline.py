"""Pipeline stages behind the command line.

Every stage reads the artifacts of the stages before it from the output
directory and writes ``stages/<stage>.json`` plus CSV projections under
``tables/``. ``report`` merges the stage documents into ``report.json``.
Wall-clock timings go to ``timings.json`` so that the report itself is a
pure function of the configuration.

Model-level work may run in worker processes (``jobs > 1``). Each model's
computation depends only on its own seeds, and results are collected in
configuration order, so the number of workers never changes a number.
"""
import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from swarmfs import __version__, classifiers, evaluation, explain, pso, stats
from swarmfs.errors import ConfigError, DataError, DegenerateError
from swarmfs.preprocess import DataTable, Prepared, load_csv, prepare

log = logging.getLogger("swarmfs")

STAGES = ("preprocess", "baseline", "optimize", "crossval", "stats", "explain")


def plain(obj):
    """Convert to JSON-ready builtins; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj):
    return json.dumps(plain(obj), indent=2, allow_nan=False) + "\n"


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _error(exc):
    return {"status": "error", "error": f"{type(exc).__name__}: {exc}"}


def _mask_from(indices, d):
    mask = np.zeros(d, dtype=bool)
    mask[list(indices)] = True
    return mask


# --- per-model work, top level so worker processes can import it ------------

def _baseline_task(spec, train, test, averaging):
    try:
        model = classifiers.fit(spec, train.X, train.y)
        m = evaluation.score_model(model, test.X, test.y, averaging)
        pred = model.predict(test.X)
        return {"status": "ok", "metrics": m.to_dict(), "confusion": evaluation.confusion(test.y, pred).to_dict()}
    except Exception as exc:
        return _error(exc)


def _optimize_task(family, hyperparameters, seeds, train, test, swarm, averaging):
    runs = []
    try:
        for s in seeds:
            spec = classifiers.ModelSpec(family, hyperparameters, seed=s)
            cfg = pso.SwarmConfig(**{**swarm.to_dict(), "seed": s})
            result = pso.optimize(train, test, spec, cfg)
            cols = np.flatnonzero(result.gbest_mask)
            model = classifiers.fit(spec, train.X[:, cols], train.y)
            m = evaluation.score_model(model, test.X[:, cols], test.y, averaging)
            pred = model.predict(test.X[:, cols])
            runs.append({
                "seed": s,
                "pso": result.to_dict(train.feature_names),
                "test_metrics": m.to_dict(),
                "confusion": evaluation.confusion(test.y, pred).to_dict(),
            })
    except Exception as exc:
        return {**_error(exc), "runs": runs}
    return {"status": "ok", "runs": runs}


def _crossval_task(spec, indices, table, k, seed, averaging):
    try:
        cv = evaluation.cross_validate(spec, _mask_from(indices, table.d), table, k, seed, averaging)
        return {"status": "ok", **cv.to_dict()}
    except Exception as exc:
        return _error(exc)


# --- stages ------------------------------------------------------------------

class Pipeline:
    def __init__(self, cfg, jobs=1):
        if jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        self.cfg = cfg
        self.jobs = jobs
        self.out = Path(cfg.output)
        self.failures = []

    # artifact helpers

    def _path(self, *parts):
        return self.out.joinpath(*parts)

    def _prepare_dirs(self):
        for sub in ("stages", "tables", "data"):
            try:
                self._path(sub).mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise ConfigError(f"output directory {self.out} is not writable: {exc}") from None

    def _save(self, stage, doc):
        self._prepare_dirs()
        self._path("stages", f"{stage}.json").write_text(dumps(doc), encoding="utf-8")

    def _load(self, stage):
        path = self._path("stages", f"{stage}.json")
        if not path.is_file():
            raise DataError(f"missing artifact {path}: run the '{stage}' stage first")
        return json.loads(path.read_text(encoding="utf-8"))

    def _record_time(self, stage, seconds):
        path = self._path("timings.json")
        timings = json.loads(path.read_text(encoding="utf-8")) if path.is_file() else {}
        timings[stage] = {"seconds": round(seconds, 3), "jobs": self.jobs}
        path.write_text(dumps(timings), encoding="utf-8")

    def _timed(self, stage, fn):
        self._prepare_dirs()
        log.info("%s: start", stage)
        t0 = time.perf_counter()
        doc = fn()
        self._save(stage, doc)
        self._record_time(stage, time.perf_counter() - t0)
        log.info("%s: done in %.1fs", stage, time.perf_counter() - t0)
        return doc

    def _write_table(self, path, table):
        header = ["row_id", "label", *table.feature_names]
        rows = ([int(r), int(lbl), *map(float, x)] for r, lbl, x in zip(table.row_ids, table.y, table.X))
        _write_csv(path, header, rows)

    def _read_table(self, path, row_ids):
        if not path.is_file():
            raise DataError(f"missing artifact {path}: run the 'preprocess' stage first")
        t = load_csv(path, "label", "1", drop_columns=("row_id",))
        return DataTable(t.feature_names, t.X, t.y, np.asarray(row_ids, dtype=np.int64))

    def prepared(self):
        doc = self._load("preprocess")
        train = self._read_table(self._path("data", "train.csv"), doc["train_rows"])
        test = self._read_table(self._path("data", "test.csv"), doc["test_rows"])
        return Prepared(train, test, doc["summary"])

    # stages

    def preprocess(self):
        def work():
            ds = self.cfg.dataset
            table = load_csv(ds.path, ds.label_column, ds.positive_label, ds.drop_columns)
            p = prepare(table, self.cfg.test_fraction, self.cfg.seed, self.cfg.preprocess_mode)
            self._write_table(self._path("data", "train.csv"), p.train)
            self._write_table(self._path("data", "test.csv"), p.test)
            _write_csv(self._path("tables", "outliers.csv"), ["feature", "iqr_outliers"],
                       p.summary["outliers_per_feature"].items())
            return {
                "dataset": ds.path.name,
                "positive_label": ds.positive_label,
                "feature_names": list(table.feature_names),
                "summary": p.summary,
                "split_seed": self.cfg.seed,
                "train_rows": p.train.row_ids,
                "test_rows": p.test.row_ids,
            }
        return self._timed("preprocess", work)

    def baseline(self):
        def work():
            p = self.prepared()
            specs = [classifiers.ModelSpec(m.family, m.hyperparameters, seed=self.cfg.seed) for m in self.cfg.models]
            results = _map(_baseline_task, [(s, p.train, p.test, self.cfg.averaging) for s in specs], self.jobs)
            models = {}
            for spec, res in zip(specs, results):
                models[spec.family] = {"spec": spec.to_dict(), **res}
                if res["status"] != "ok":
                    self.failures.append(f"baseline/{spec.family}")
            ranked = rank(models, lambda r: r["metrics"]["accuracy"])
            rows = []
            for name in ranked:
                m = models[name]["metrics"]
                rows.append([name, m["accuracy"], m["precision"], m["recall"], m["f1"], m["balanced_accuracy"], m["auc"]])
            _write_csv(self._path("tables", "baseline.csv"),
                       ["model", "accuracy", "precision", "recall", "f1", "balanced_accuracy", "auc"], rows)
            return {"n_features": p.train.d, "ranking": ranked, "models": models}
        return self._timed("baseline", work)

    def optimize(self):
        def work():
            p = self.prepared()
            base = self._load("baseline")["models"]
            names = list(p.train.feature_names)
            tasks = [(m.family, m.hyperparameters, self.cfg.seeds, p.train, p.test, self.cfg.swarm, self.cfg.averaging)
                     for m in self.cfg.models]
            results = _map(_optimize_task, tasks, self.jobs)
            models = {}
            for spec, res in zip(self.cfg.models, results):
                entry = dict(res)
                if res["status"] == "ok":
                    entry.update(_representative(res["runs"], base.get(spec.family)))
                else:
                    self.failures.append(f"optimize/{spec.family}")
                models[spec.family] = entry
            doc = {"seeds": self.cfg.seeds, "swarm": self.cfg.swarm.to_dict(), "models": models,
                   "summary": _optimize_summary(models, self.cfg.swarm),
                   "selection_frequency": _selection_frequency(models, names)}
            doc["swarm"].pop("seed", None)
            doc["ranking"] = rank(models, lambda r: r["optimized_accuracy"])
            self._optimize_tables(doc)
            return doc
        return self._timed("optimize", work)

    def _optimize_tables(self, doc):
        rows = []
        for name in doc["ranking"]:
            r = doc["models"][name]
            m = r["optimized_metrics"]
            rows.append([name, r["baseline_accuracy"], r["optimized_accuracy"], r["improvement_pp"], r["n_selected"],
                         m["precision"], m["recall"], m["f1"], m["auc"], r["representative_seed"],
                         ";".join(r["selected_features"])])
        _write_csv(self._path("tables", "comparison.csv"),
                   ["model", "baseline_accuracy", "optimized_accuracy", "improvement_pp", "n_selected", "precision",
                    "recall", "f1", "auc", "seed", "selected_features"], rows)
        _write_csv(self._path("tables", "selection_frequency.csv"), ["feature", "count", "runs", "frequency"],
                   ([f["feature"], f["count"], f["runs"], f["frequency"]] for f in doc["selection_frequency"]))

    def crossval(self):
        def work():
            full = self.prepared().full
            opt = self._load("optimize")
            top = opt["ranking"][: self.cfg.cv_top]
            specs = {m.family: m for m in self.cfg.models}
            tasks = []
            for name in top:
                spec = classifiers.ModelSpec(name, specs[name].hyperparameters, seed=self.cfg.seed)
                tasks.append((spec, opt["models"][name]["selected_indices"], full, self.cfg.cv_folds, self.cfg.seed,
                              self.cfg.averaging))
            results = _map(_crossval_task, tasks, self.jobs)
            models = {}
            for name, res in zip(top, results):
                models[name] = {"selected_features": opt["models"][name]["selected_features"], **res}
                if res["status"] != "ok":
                    self.failures.append(f"crossval/{name}")
            rows, fold_rows = [], []
            for name in top:
                r = models[name]
                if r["status"] != "ok":
                    continue
                rows.append([name] + [v for metric in evaluation.METRIC_NAMES
                                      for v in (r["mean"][metric], r["sd"][metric])])
                for f in r["folds"]:
                    fold_rows.append([name, f["fold"]] + [f[metric] for metric in evaluation.METRIC_NAMES])
            _write_csv(self._path("tables", "crossval.csv"),
                       ["model"] + [f"{m}_{s}" for m in evaluation.METRIC_NAMES for s in ("mean", "sd")], rows)
            _write_csv(self._path("tables", "crossval_folds.csv"), ["model", "fold", *evaluation.METRIC_NAMES],
                       fold_rows)
            return {"k": self.cfg.cv_folds, "seed": self.cfg.seed, "rows": full.N, "top": top,
                    "best_pipeline": top[0] if top else None, "models": models}
        return self._timed("crossval", work)

    def stats(self):
        def work():
            opt = self._load("optimize")
            cv = self._load("crossval")
            doc = {"alpha": stats.ALPHA}
            pairs = [(name, r) for name, r in opt["models"].items()
                     if r["status"] == "ok" and r["baseline_accuracy"] is not None]
            optimized = [r["optimized_accuracy"] for _, r in pairs]
            baseline = [r["baseline_accuracy"] for _, r in pairs]
            doc["baseline_vs_optimized"] = {
                "models": [name for name, _ in pairs],
                "paired_t_test": _paired(optimized, baseline),
                "effect_size": _effect(optimized, baseline),
            }
            fold_scores = {name: [f["accuracy"] for f in r["folds"]]
                           for name, r in cv["models"].items() if r["status"] == "ok"}
            pairwise = []
            rows = []
            for entry in stats.pairwise_t_tests(fold_scores):
                res = entry["result"]
                item = {"model_a": entry["model_a"], "model_b": entry["model_b"],
                        **(res.to_dict() if res is not None else {"degenerate": entry["degenerate"]})}
                pairwise.append(item)
                rows.append([item["model_a"], item["model_b"], item.get("t_statistic"),
                             item.get("degrees_of_freedom"), item.get("p_value"), item.get("interpretation", "degenerate")])
            doc["pairwise_fold_t_tests"] = pairwise
            best = opt["ranking"][0] if opt["ranking"] else None
            doc["chi_square"] = {"model": best}
            if best is not None:
                c = opt["models"][best]["optimized_confusion"]
                table = [[c["tn"], c["fp"]], [c["fn"], c["tp"]]]
                doc["chi_square"]["table"] = table
                try:
                    doc["chi_square"].update(stats.chi_square_independence(table).to_dict())
                except DataError as exc:
                    doc["chi_square"]["degenerate"] = str(exc)
            _write_csv(self._path("tables", "pairwise_t_tests.csv"),
                       ["model_a", "model_b", "t_statistic", "df", "p_value", "interpretation"], rows)
            t = doc["baseline_vs_optimized"]["paired_t_test"]
            e = doc["baseline_vs_optimized"]["effect_size"]
            sig_rows = [["paired_t_baseline_vs_optimized", t.get("t_statistic"), t.get("degrees_of_freedom"),
                         t.get("p_value"), t.get("interpretation", t.get("degenerate"))],
                        ["cohens_d_paired", e.get("d_paired"), None, None, ""],
                        ["cohens_d_pooled", e.get("d_pooled"), None, None, ""]]
            chi = doc["chi_square"]
            if "chi2" in chi:
                sig_rows.append([f"chi_square_{best}", chi["chi2"], chi["df"], chi["p_value"], chi["interpretation"]])
            _write_csv(self._path("tables", "significance.csv"), ["test", "statistic", "df", "p_value", "interpretation"],
                       sig_rows)
            return doc
        return self._timed("stats", work)

    def explain(self):
        def work():
            p = self.prepared()
            opt = self._load("optimize")
            if not opt["ranking"]:
                raise DataError("no optimized model is available to explain")
            best = opt["ranking"][0]
            r = opt["models"][best]
            cols = np.asarray(r["selected_indices"], dtype=np.int64)
            names = [p.train.feature_names[j] for j in cols]
            hp = {m.family: m.hyperparameters for m in self.cfg.models}[best]
            spec = classifiers.ModelSpec(best, hp, seed=r["representative_seed"])
            model = classifiers.fit(spec, p.train.X[:, cols], p.train.y)
            background = explain.sample_background(p.train.X[:, cols], self.cfg.background_size, self.cfg.seed)
            X = p.test.X[:, cols]
            atts = explain.explain_rows(model, background, X, self.cfg.explain_method, self.cfg.n_coalitions,
                                        self.cfg.seed)
            summary = explain.summarize(atts, names)
            explain.write_attribution_csv(self._path("attributions.csv"), summary, X, p.test.row_ids)
            return {
                "model": best,
                "seed": r["representative_seed"],
                "method": self.cfg.explain_method,
                "features": names,
                "background_rows": int(background.shape[0]),
                "explained_rows": int(X.shape[0]),
                "attribution_file": "attributions.csv",
                "max_additivity_error": max(abs(a.residual) for a in atts),
                "base_value": atts[0].base_value,
                **summary.to_dict(),
            }
        return self._timed("explain", work)

    def report(self):
        self._prepare_dirs()
        docs = {stage: self._load(stage) for stage in STAGES}
        pre = docs["preprocess"]
        doc = {
            "toolkit": "swarmfs",
            "version": __version__,
            "config": self.cfg.to_dict(),
            "preprocess": {k: pre[k] for k in ("dataset", "positive_label", "feature_names", "summary", "split_seed")},
            "baseline": docs["baseline"],
            "optimize": docs["optimize"],
            "crossval": docs["crossval"],
            "stats": docs["stats"],
            "explain": docs["explain"],
            "timings_file": "timings.json",
        }
        self._path("report.json").write_text(dumps(doc), encoding="utf-8")
        return doc

    def run_all(self):
        for stage in STAGES:
            getattr(self, stage)()
        return self.report()


# --- helpers -------------------------------------------------------------------

def rank(models, key):
    """Names of successful models by descending ``key``, ties broken by name."""
    ok = [(name, r) for name, r in models.items() if r.get("status") == "ok"]
    return [name for name, _ in sorted(ok, key=lambda item: (-key(item[1]), item[0]))]


def _representative(runs, base):
    """Pick the run with the lowest gbest fitness (earliest seed on ties) and compare it with the baseline."""
    best = min(range(len(runs)), key=lambda i: (runs[i]["pso"]["gbest_fitness"], i))
    run = runs[best]
    acc = run["test_metrics"]["accuracy"]
    base_acc = base["metrics"]["accuracy"] if base and base.get("status") == "ok" else None
    return {
        "representative_seed": run["seed"],
        "selected_indices": run["pso"]["selected_indices"],
        "selected_features": run["pso"]["selected_features"],
        "n_selected": run["pso"]["n_selected"],
        "optimized_metrics": run["test_metrics"],
        "optimized_confusion": run["confusion"],
        "optimized_accuracy": acc,
        "baseline_accuracy": base_acc,
        "improvement_pp": None if base_acc is None else (acc - base_acc) * 100.0,
        "per_seed_improvement_pp": None if base_acc is None else
        [(r["test_metrics"]["accuracy"] - base_acc) * 100.0 for r in runs],
    }


def _optimize_summary(models, swarm):
    ok = [r for r in models.values() if r["status"] == "ok" and r["baseline_accuracy"] is not None]
    runs = [run for r in models.values() for run in r.get("runs", [])]
    sizes_ok = all(swarm.k_min <= run["pso"]["min_evaluated_size"] and run["pso"]["max_evaluated_size"] <= swarm.k_max
                   for run in runs)
    improvements = [r["improvement_pp"] for r in ok]
    all_runs = [d for r in ok for d in r["per_seed_improvement_pp"]]
    return {
        "models_compared": len(ok),
        "models_not_worse": sum(1 for v in improvements if v >= 0),
        "fraction_not_worse": (sum(1 for v in improvements if v >= 0) / len(ok)) if ok else None,
        "models_improved": sum(1 for v in improvements if v > 0),
        "mean_improvement_pp": float(np.mean(improvements)) if ok else None,
        "runs": len(runs),
        "runs_not_worse": sum(1 for v in all_runs if v >= 0),
        "fraction_runs_not_worse": (sum(1 for v in all_runs if v >= 0) / len(all_runs)) if all_runs else None,
        "mean_run_improvement_pp": float(np.mean(all_runs)) if all_runs else None,
        "evaluated_masks": sum(run["pso"]["evaluations"] for run in runs),
        "all_masks_within_bounds": sizes_ok,
    }


def _selection_frequency(models, names):
    runs = [run for r in models.values() for run in r.get("runs", [])]
    counts = dict.fromkeys(names, 0)
    for run in runs:
        for f in run["pso"]["selected_features"]:
            counts[f] += 1
    order = sorted(names, key=lambda f: (-counts[f], f))
    return [{"feature": f, "count": counts[f], "runs": len(runs),
             "frequency": counts[f] / len(runs) if runs else 0.0} for f in order]


def _paired(a, b):
    if len(a) < 2:
        return {"degenerate": "fewer than two paired observations"}
    try:
        return stats.paired_t_test(a, b).to_dict()
    except DegenerateError as exc:
        if np.array_equal(np.asarray(a), np.asarray(b)):
            return stats.TTestResult(0.0, len(a) - 1, 1.0).to_dict()
        return {"degenerate": str(exc)}


def _effect(a, b):
    if len(a) < 2:
        return {"degenerate": ["d_paired", "d_pooled"]}
    return stats.cohens_d(a, b).to_dict()
