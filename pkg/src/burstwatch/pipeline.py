"""The end-to-end workflow as plain functions over a Store.

simulate -> detect -> featurize -> build-index -> train -> predict -> evaluate,
plus stats over an event log. Each step reads the artifacts of earlier steps
and fails with the name of the producing command when one is missing.
"""

from __future__ import annotations

import logging
from collections import defaultdict

import numpy as np

from . import synth
from .config import RunConfig
from .evaluation import (check_thresholds, class_balance, render_markdown, render_stats_markdown,
                         staged_evaluation)
from .features import (StageArtifacts, assemble_matrix, build_stage_artifacts, featurize_stream,
                       schema_document)
from .features.prototypes import PrototypeIndex
from .features.schema import stage_tag
from .ingest import load_emoticon_lexicon, load_sentiment_lexicon, read_stream
from .lifecycle import (DEFAULT_CHECKPOINTS, LifecycleEngine, cycles_from_events,
                        lifecycle_statistics)
from .models import (DegenerateDataError, dumps_model, loads_model, log_target, predict_label,
                     predict_time, stratified_split, sweep_weights, select_weight, train_regressor)
from .metrics import UndefinedMetricError
from .storage import (Store, dumps_csv, dumps_cycles, dumps_events, dumps_rows, loads_csv,
                      loads_cycles, loads_events, loads_rows)

log = logging.getLogger("burstwatch")

TASK_NAMES = {"burst": "task1", "tbb": "task2", "tra": "task3"}


class PipelineError(RuntimeError):
    pass


def _classifier_name(beta: float) -> str:
    return f"svm-f{beta:g}"


# ---- simulate ------------------------------------------------------------------

def simulate(store: Store, run: str, scenario: synth.StreamScenario):
    scenario.validate()
    cfg = {"scenario": scenario.to_json()}
    with store.writer("stream", run, "stream.jsonl", cfg) as fh:
        result = synth.generate(scenario, fh)
    store.save("truth", run, "truth.csv",
               dumps_csv(synth.TRUTH_HEADER, synth.truth_rows(result.truth)), cfg)
    store.save("scenario", run, "scenario.json", scenario.to_json(), cfg)
    log.info("simulate %s: %d tweets, %d triggered cycles", run, result.n_tweets, len(result.truth))
    return result


def load_scenario(store: Store, run: str) -> synth.StreamScenario | None:
    if not store.exists("scenario", run, "scenario.json"):
        return None
    return synth.StreamScenario.from_json(store.load_text("scenario", run, "scenario.json"))


def load_truth(store: Store, run: str) -> list[dict]:
    return loads_csv(store.load_text("truth", run, "truth.csv", producer="simulate"))


# ---- detect --------------------------------------------------------------------

def _emoticons(cfg: RunConfig):
    return load_emoticon_lexicon(cfg.emoticon_lexicon) if cfg.emoticon_lexicon else None


def detect(store: Store, run: str, cfg: RunConfig):
    path = store.verified_path("stream", run, "stream.jsonl", producer="simulate")
    errors: list = []
    engine = LifecycleEngine(cfg.lifecycle)
    for rec in read_stream(path, errors=errors, emoticons=_emoticons(cfg)):
        engine.feed(rec)
    events = engine.close()
    cycles = engine.cycle_records()
    meta = {"delta": cfg.delta, "window_minutes": cfg.window_minutes}
    store.save("events", run, "events.jsonl", dumps_events(events), meta)
    store.save("cycles", run, "cycles.jsonl", dumps_cycles(cycles), meta)
    if errors:
        store.save("events", run, "parse_errors.txt",
                   "".join(f"{e}\n" for e in errors), meta)
    log.info("detect %s: %d events, %d triggered cycles, %d bad lines",
             run, len(events), len(cycles), len(errors))
    return events, cycles, errors


def load_cycles(store: Store, run: str):
    return loads_cycles(store.load_text("cycles", run, "cycles.jsonl", producer="detect"))


def load_events(store: Store, run: str):
    return loads_events(store.load_text("events", run, "events.jsonl", producer="detect"))


# ---- featurize -----------------------------------------------------------------

def featurize(store: Store, run: str, cfg: RunConfig):
    cycles = load_cycles(store, run)
    path = store.verified_path("stream", run, "stream.jsonl", producer="simulate")
    sentiment = load_sentiment_lexicon(cfg.sentiment_lexicon)
    rows = featurize_stream(read_stream(path, errors=[], emoticons=_emoticons(cfg)), cycles,
                            sentiment, stages=cfg.stages, sax=cfg.sax)
    meta = {"stages": list(cfg.stages), "sax": [cfg.sax_alphabet, cfg.sax_segments]}
    store.save("features", run, "rows.csv", dumps_rows(rows), meta)
    store.save_json("features", run, "schema.json", schema_document(), meta)
    log.info("featurize %s: %d stage rows", run, len(rows))
    return rows


def load_rows(store: Store, run: str):
    return loads_rows(store.load_text("features", run, "rows.csv", producer="featurize"))


# ---- build-index ---------------------------------------------------------------

def build_index(store: Store, name: str, historic_run: str, training_run: str, cfg: RunConfig):
    historic = load_rows(store, historic_run)
    training = load_rows(store, training_run)
    meta = {"historic": historic_run, "training": training_run, "stages": list(cfg.stages)}
    out = {}
    for stage in cfg.stages:
        art = build_stage_artifacts(historic, training, stage)
        store.save_json("index", name, f"prototypes_{stage}.json",
                        {"stage": stage, "top_grams": list(art.top_grams),
                         "index": art.index.to_dict()}, meta)
        out[stage] = art
    store.save_json("index", name, "index_meta.json", meta, meta)
    return out


def load_artifacts(store: Store, name: str, stage: int) -> StageArtifacts:
    d = store.load_json("index", name, f"prototypes_{stage}.json", producer="build-index")
    return StageArtifacts(tuple(d["top_grams"]), PrototypeIndex.from_dict(d["index"]))


# ---- train ---------------------------------------------------------------------

def train(store: Store, name: str, training_run: str, index_name: str, cfg: RunConfig):
    rows = load_rows(store, training_run)
    registry = {"training": training_run, "index": index_name, "stages": list(cfg.stages),
                "betas": list(cfg.betas), "regressors": list(cfg.regressors),
                "config": cfg.to_dict(), "models": [], "skipped": [], "global_means": []}
    for stage in cfg.stages:
        art = load_artifacts(store, index_name, stage)
        srows = [r for r in rows if r.stage == stage]
        _train_classifiers(store, name, stage, srows, art, cfg, registry)
        for task in ("tbb", "tra"):
            _train_regressors(store, name, stage, task, srows, art, cfg, registry)
    store.save_json("model", name, "registry.json", registry, cfg.to_dict())
    return registry


def _train_classifiers(store, name, stage, srows, art, cfg, registry):
    elig = [r for r in srows if r.task1_eligible]
    y = np.array([1 if r.label == 1 else -1 for r in elig])
    if len(set(y.tolist())) < 2:
        registry["skipped"].append({"stage": stage, "task": "burst", "reason": "single class"})
        return
    X = assemble_matrix(elig, "burst", art)
    idents = [f"{r.key}#{r.cycle}" for r in elig]
    tns, tts = stratified_split(idents, y, cfg.train_fraction, cfg.seed)
    try:
        sweep = sweep_weights(X[tns], y[tns], X[tts], y[tts], config=cfg.svm)
    except (DegenerateDataError, UndefinedMetricError) as exc:
        registry["skipped"].append({"stage": stage, "task": "burst", "reason": str(exc)})
        return
    for beta in cfg.betas:
        sel = select_weight(sweep, beta)
        model = sel.model
        model.meta.update({"stage": stage, "task": "burst", "n_tns": len(tns), "n_tts": len(tts)})
        fname = f"task1_{stage}_{_classifier_name(beta)}.json"
        store.save("model", name, fname, dumps_model(model), cfg.to_dict())
        registry["models"].append({"stage": stage, "task": "burst", "name": _classifier_name(beta),
                                   "file": fname, "w": sel.w, "f_tts": sel.f})


def _train_regressors(store, name, stage, task, srows, art, cfg, registry):
    elig = [r for r in srows if r.eligible(task)]
    if not elig:
        registry["skipped"].append({"stage": stage, "task": task, "reason": "no instances"})
        return
    X = assemble_matrix(elig, task, art)
    y = log_target([r.target(task) for r in elig])
    registry["global_means"].append({"stage": stage, "task": task, "mean": float(y.mean())})
    for kind in cfg.regressors:
        try:
            model = train_regressor(X, y, kind, cfg.regression)
        except np.linalg.LinAlgError as exc:
            registry["skipped"].append({"stage": stage, "task": task, "model": kind,
                                        "reason": str(exc)})
            continue
        model.meta.update({"stage": stage, "task": task, "n_train": len(elig),
                           "train_target_mean": float(y.mean())})
        fname = f"{TASK_NAMES[task]}_{stage}_{kind}.json"
        store.save("model", name, fname, dumps_model(model), cfg.to_dict())
        registry["models"].append({"stage": stage, "task": task, "name": kind, "file": fname})


def load_registry(store: Store, name: str) -> dict:
    return store.load_json("model", name, "registry.json", producer="train")


# ---- predict -------------------------------------------------------------------

PREDICTION_HEADER = ("stage", "task", "model", "key", "cycle", "prediction", "score")


def predict(store: Store, name: str, run: str):
    registry = load_registry(store, name)
    rows = load_rows(store, run)
    by_stage = defaultdict(list)
    for r in rows:
        by_stage[r.stage].append(r)
    out = []
    for entry in registry["models"]:
        stage, task = entry["stage"], entry["task"]
        art = load_artifacts(store, registry["index"], stage)
        model = loads_model(store.load_text("model", name, entry["file"], producer="train"))
        srows = by_stage.get(stage, [])
        if task == "tra":
            targets = [r for r in srows if r.burst is not None and r.burst <= r.t_p]
        else:
            targets = [r for r in srows if r.burst is None or r.burst > r.t_p]
        if not targets:
            continue
        X = assemble_matrix(targets, task, art)
        if task == "burst":
            labels, scores = predict_label(model, X)
            for r, lab, sc in zip(targets, labels, scores):
                out.append((stage, task, entry["name"], r.key, r.cycle, int(lab), float(sc)))
        else:
            values = predict_time(model, X)
            for r, v in zip(targets, values):
                out.append((stage, task, entry["name"], r.key, r.cycle, float(v), None))
    out.sort(key=lambda t: (t[0], t[1], t[2], t[3], t[4]))
    pred_run = f"{name}-on-{run}"
    store.save("predictions", pred_run, "predictions.csv", dumps_csv(PREDICTION_HEADER, out),
               {"model": name, "run": run})
    return out


def load_predictions(store: Store, name: str, run: str):
    text = store.load_text("predictions", f"{name}-on-{run}", "predictions.csv", producer="predict")
    preds = defaultdict(dict)
    for rec in loads_csv(text):
        value = float(rec["prediction"]) if rec["task"] != "burst" else int(rec["prediction"])
        preds[(int(rec["stage"]), rec["task"], rec["model"])][(rec["key"], int(rec["cycle"]))] = value
    return dict(preds)


# ---- evaluate ------------------------------------------------------------------

REPORT_HEADER = ("stage", "task", "model", "metric", "value")


def evaluate(store: Store, name: str, run: str, cfg: RunConfig | None = None):
    registry = load_registry(store, name)
    predictions = load_predictions(store, name, run)
    rows = load_rows(store, run)
    means = {(g["stage"], g["task"]): g["mean"] for g in registry["global_means"]}
    records = staged_evaluation(rows, predictions, betas=registry["betas"], global_means=means)
    report_run = f"{name}-on-{run}"
    store.save("report", report_run, "report.csv",
               dumps_csv(REPORT_HEADER, (r.as_row() for r in records)), registry["config"])
    store.save("report", report_run, "report.md", render_markdown(records), registry["config"])
    problems = check_thresholds(records, cfg.thresholds) if cfg is not None else []
    return records, problems


# ---- stats ---------------------------------------------------------------------

STATS_HEADER = ("checkpoint", "RAB", "ROB", "RAD")


def stats(store: Store, run: str, checkpoints=DEFAULT_CHECKPOINTS, stages=(5, 15, 30, 60, 180, 360)):
    events = load_events(store, run)
    table = lifecycle_statistics(events, checkpoints)
    cycles = cycles_from_events(events)
    balance = class_balance(cycles, stages)
    store.save("stats", run, "stats.csv", dumps_csv(
        STATS_HEADER, ((stage_tag(r["checkpoint"]), r["RAB"], r["ROB"], r["RAD"]) for r in table)))
    store.save("stats", run, "stats.md", render_stats_markdown(table, balance))
    return table, balance


# ---- full chain ----------------------------------------------------------------

# Separate scenario runs play the historic, training and test roles.
BENCHMARK_SEEDS = {"historic": 101, "training": 202, "test": 303}


def benchmark_scenarios(n_triggered: int = 2000, delta: int = 50,
                        seeds: dict | None = None) -> dict:
    seeds = seeds or BENCHMARK_SEEDS
    return {role: synth.StreamScenario(seed=seed, delta=delta, n_triggered=n_triggered)
            for role, seed in seeds.items()}


def run_chain(store: Store, cfg: RunConfig, scenarios: dict, model: str = "model",
              index: str = "index"):
    """simulate -> detect -> featurize for every role, then index, train, predict, evaluate."""
    for role, scenario in scenarios.items():
        simulate(store, role, scenario)
        detect(store, role, cfg)
        featurize(store, role, cfg)
    build_index(store, index, "historic", "training", cfg)
    train(store, model, "training", index, cfg)
    predict(store, model, "test")
    return evaluate(store, model, "test", cfg)
