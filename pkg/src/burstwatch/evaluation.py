"""Staged evaluation: class balance, Task 1 precision/recall/F, Task 2/3 RMSE."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .features.schema import stage_tag
from .metrics import (Confusion, UndefinedMetricError, all_positive_f1, f_beta, f_beta_from,
                      precision, precision_recall_f, prior_random_f1, recall, rmse)

__all__ = [
    "Confusion", "ReportRecord", "UndefinedMetricError", "all_positive_f1", "check_thresholds",
    "f_beta", "f_beta_from", "precision", "precision_recall_f", "prior_random_f1", "recall",
    "render_markdown", "render_stats_markdown", "rmse", "rmse_log", "staged_evaluation",
]

TASKS = ("burst", "tbb", "tra")


def rmse_log(predicted_log, truth_log):
    return rmse(predicted_log, truth_log)


@dataclass(frozen=True)
class ReportRecord:
    stage: int
    task: str
    model: str
    metric: str
    value: float | None

    def as_row(self):
        return (stage_tag(self.stage), self.task, self.model, self.metric, self.value)


def staged_evaluation(rows, predictions, betas=(1.0,), global_means=None) -> list[ReportRecord]:
    """Score predictions against ground truth at every stage.

    ``rows`` are StageRow values of the evaluated run. ``predictions`` maps
    (stage, task, model) -> {(key, cycle): value}; for Task 1 the value is the
    predicted label (+1/-1), for Tasks 2/3 a log-minute estimate.
    ``global_means`` maps (stage, task) -> mean training log target and adds
    the predict-the-mean baseline.
    """
    out: list[ReportRecord] = []
    by_stage = defaultdict(list)
    for r in rows:
        by_stage[r.stage].append(r)
    models_at = defaultdict(list)
    for (stage, task, model) in sorted(predictions):
        models_at[(stage, task)].append(model)
    for stage in sorted(by_stage):
        srows = by_stage[stage]
        elig = [r for r in srows if r.task1_eligible]
        pos = sum(1 for r in elig if r.label == 1)
        neg = len(elig) - pos
        rate = pos / len(elig) if elig else None
        out += [ReportRecord(stage, "burst", "data", "eligible", float(len(elig))),
                ReportRecord(stage, "burst", "data", "positives", float(pos)),
                ReportRecord(stage, "burst", "data", "negatives", float(neg)),
                ReportRecord(stage, "burst", "data", "positive_rate", rate)]
        if elig:
            out += [ReportRecord(stage, "burst", "all-positive", "f1", all_positive_f1(rate)),
                    ReportRecord(stage, "burst", "prior-random", "f1", prior_random_f1(rate))]
            ident = [(r.key, r.cycle) for r in elig]
            truth = np.array([1 if r.label == 1 else -1 for r in elig])
            for model in models_at[(stage, "burst")]:
                pred_map = predictions[(stage, "burst", model)]
                pred = np.array([pred_map.get(i, -1) for i in ident])
                c = Confusion.from_labels(pred, truth)
                p, r_ = precision(c), recall(c)
                out += [ReportRecord(stage, "burst", model, "precision", p),
                        ReportRecord(stage, "burst", model, "recall", r_)]
                for beta in betas:
                    out.append(ReportRecord(stage, "burst", model, f"f{beta:g}", f_beta(c, beta)))
        for task in ("tbb", "tra"):
            trows = [r for r in srows if r.eligible(task)]
            out.append(ReportRecord(stage, task, "data", "eligible", float(len(trows))))
            if not trows:
                continue
            truth = np.log(np.array([r.target(task) for r in trows], dtype=np.float64))
            ident = [(r.key, r.cycle) for r in trows]
            if global_means and (stage, task) in global_means:
                mean = global_means[(stage, task)]
                out.append(ReportRecord(stage, task, "global-mean", "rmse",
                                        rmse(np.full(len(truth), mean), truth)))
            for model in models_at[(stage, task)]:
                pred_map = predictions[(stage, task, model)]
                missing = [i for i in ident if i not in pred_map]
                if missing:
                    raise KeyError(f"{model} has no {task} prediction for {missing[0]} at stage {stage}")
                pred = np.array([pred_map[i] for i in ident])
                out.append(ReportRecord(stage, task, model, "rmse", rmse(pred, truth)))
    return out


def report_value(records, stage, task, model, metric):
    for r in records:
        if (r.stage, r.task, r.model, r.metric) == (stage, task, model, metric):
            return r.value
    raise KeyError((stage, task, model, metric))


def check_thresholds(records, thresholds: list[dict]) -> list[str]:
    """Violations of ``[{stage, task, model, metric, min|max}]`` rules."""
    problems = []
    for rule in thresholds:
        stage = rule["stage"]
        stage_min = stage if isinstance(stage, int) else None
        matches = [r for r in records
                   if (stage_min is None and stage_tag(r.stage) == stage or r.stage == stage_min)
                   and r.task == rule["task"] and r.model == rule["model"]
                   and r.metric == rule["metric"]]
        if not matches:
            problems.append(f"no value for {rule}")
            continue
        v = matches[0].value
        if v is None:
            problems.append(f"{rule}: value undefined")
        elif "min" in rule and v < rule["min"]:
            problems.append(f"{rule}: {v:.4f} < {rule['min']}")
        elif "max" in rule and v > rule["max"]:
            problems.append(f"{rule}: {v:.4f} > {rule['max']}")
    return problems


def _fmt(v):
    if v is None:
        return "undefined"
    if float(v).is_integer() and abs(v) >= 1:
        return str(int(v))
    return f"{v:.4f}"


def render_markdown(records) -> str:
    stages = sorted({r.stage for r in records})
    head = "| | " + " | ".join(stage_tag(s) for s in stages) + " |\n"
    rule = "|---" * (len(stages) + 1) + "|\n"
    table = defaultdict(dict)
    order = []
    for r in records:
        k = (r.task, r.model, r.metric)
        if k not in table:
            order.append(k)
        table[k][r.stage] = r.value
    lines = ["# Staged evaluation\n"]
    titles = {"burst": "Task 1: will it burst", "tbb": "Task 2: log time before burst",
              "tra": "Task 3: log time remaining active"}
    for task in TASKS:
        keys = [k for k in order if k[0] == task]
        if not keys:
            continue
        lines.append(f"\n## {titles[task]}\n\n")
        lines.append(head)
        lines.append(rule)
        for k in keys:
            cells = " | ".join(_fmt(table[k].get(s)) if s in table[k] else "" for s in stages)
            lines.append(f"| {k[1]} {k[2]} | {cells} |\n")
    return "".join(lines)


def render_stats_markdown(stats_table, balance=None) -> str:
    def pct(v):
        return f"{100 * v:.2f}%"

    cps = [row["checkpoint"] for row in stats_table]
    lines = ["# Lifecycle statistics of bursting hashtags\n\n",
             "| | " + " | ".join(stage_tag(c) for c in cps) + " |\n",
             "|---" * (len(cps) + 1) + "|\n"]
    for name in ("RAB", "ROB", "RAD"):
        lines.append(f"| {name} | " + " | ".join(pct(row[name]) for row in stats_table) + " |\n")
    if balance:
        lines += ["\n# Proportion of bursting hashtags among triggered, not yet burst\n\n",
                  "| " + " | ".join(stage_tag(s) for s in balance) + " |\n",
                  "|---" * len(balance) + "|\n",
                  "| " + " | ".join("n/a" if v is None else pct(v) for v in balance.values()) + " |\n"]
    return "".join(lines)


def class_balance(cycles, stages) -> dict:
    """Positive proportion among resolved cycles not yet burst at each stage."""
    out = {}
    for x in stages:
        pos = neg = 0
        for c in cycles:
            if c.burst is not None:
                if c.burst > c.trigger + x:
                    pos += 1
            elif c.negative:
                neg += 1
        out[x] = pos / (pos + neg) if pos + neg else None
    return out

