"""Command-line entry point: ``burstwatch <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline, synth
from .config import ConfigError, RunConfig
from .storage import Store, StorageError

log = logging.getLogger("burstwatch")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="RunConfig JSON file; flags override its values")
    p.add_argument("--delta", type=int, help="trigger threshold on the window sum (default 50)")
    p.add_argument("--window-minutes", type=int, help="trigger window length (default 5)")
    p.add_argument("--stages", type=_int_list, help='prediction stages in minutes (default "5,15,30,60,180,360")')
    p.add_argument("--beta", type=_float_list, help="F-beta values for Task 1 selection (default 1,0.5,2)")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--out", help="data root (overrides $BURSTWATCH_DATA_DIR)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burstwatch",
                                     description="Detect and predict bursting hashtags in a tweet stream.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic stream and its truth file")
    _common(p)
    p.add_argument("--run", default="default", help="run name (default: default)")
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--n-triggered", type=int, help="override the number of triggered hashtags")

    p = sub.add_parser("detect", help="run the lifecycle engine over a stream")
    _common(p)
    p.add_argument("--run", default="default")

    p = sub.add_parser("featurize", help="compute per-stage base features")
    _common(p)
    p.add_argument("--run", default="default")

    p = sub.add_parser("build-index", help="build prototype index and top-gram tables")
    _common(p)
    p.add_argument("--historic", required=True, help="run providing prototypes and normalization")
    p.add_argument("--training", required=True, help="run providing top-gram tables")
    p.add_argument("--index", default="index", help="index name (default: index)")

    p = sub.add_parser("train", help="train Task 1 classifiers and Task 2/3 regressors")
    _common(p)
    p.add_argument("--training", required=True)
    p.add_argument("--index", default="index")
    p.add_argument("--model", default="model", help="model set name (default: model)")

    p = sub.add_parser("predict", help="predict every stage of a featurized run")
    _common(p)
    p.add_argument("--run", default="default")
    p.add_argument("--model", default="model")

    p = sub.add_parser("evaluate", help="score predictions against the run's labels")
    _common(p)
    p.add_argument("--run", default="default")
    p.add_argument("--model", default="model")

    p = sub.add_parser("stats", help="lifecycle statistics and class balance of a detected run")
    _common(p)
    p.add_argument("--run", default="default")
    return parser


def _config(args, scenario_delta: int | None = None) -> RunConfig:
    base = RunConfig.load(args.config).to_dict() if args.config else RunConfig().to_dict()
    if scenario_delta is not None and args.delta is None and not args.config:
        base["delta"] = scenario_delta
    for flag, key in (("delta", "delta"), ("window_minutes", "window_minutes"),
                      ("stages", "stages"), ("beta", "betas"), ("seed", "seed")):
        v = getattr(args, flag)
        if v is not None:
            base[key] = v
    return RunConfig.from_dict({k: list(v) if isinstance(v, tuple) else v for k, v in base.items()})


def _scenario(args) -> synth.StreamScenario:
    if args.scenario:
        with open(args.scenario, encoding="utf-8") as fh:
            sc = synth.StreamScenario.from_json(fh.read())
    else:
        sc = synth.StreamScenario()
    if args.seed is not None:
        sc.seed = args.seed
    if args.delta is not None:
        sc.delta = args.delta
    if args.window_minutes is not None:
        sc.window_minutes = args.window_minutes
    if args.n_triggered is not None:
        sc.n_triggered = args.n_triggered
    return sc


def run(args) -> int:
    store = Store(args.out) if args.out else Store()
    cmd = args.command
    if cmd == "simulate":
        res = pipeline.simulate(store, args.run, _scenario(args))
        print(f"simulated {res.n_tweets} tweets, {len(res.truth)} triggered cycles -> "
              f"{store.payload_path('stream', args.run, 'stream.jsonl')}")
        return 0
    if cmd in ("detect", "featurize", "stats"):
        sc = pipeline.load_scenario(store, args.run)
        cfg = _config(args, sc.delta if sc else None)
        if cmd == "detect":
            events, cycles, errors = pipeline.detect(store, args.run, cfg)
            print(f"detected {len(events)} events in {len(cycles)} triggered cycles"
                  + (f" ({len(errors)} unparseable lines skipped)" if errors else ""))
        elif cmd == "featurize":
            rows = pipeline.featurize(store, args.run, cfg)
            print(f"featurized {len(rows)} stage rows")
        else:
            table, balance = pipeline.stats(store, args.run, stages=cfg.stages)
            print(store.load_text("stats", args.run, "stats.md"), end="")
        return 0
    cfg = _config(args)
    if cmd == "build-index":
        pipeline.build_index(store, args.index, args.historic, args.training, cfg)
        print(f"built index {args.index} for stages {list(cfg.stages)}")
    elif cmd == "train":
        reg = pipeline.train(store, args.model, args.training, args.index, cfg)
        print(f"trained {len(reg['models'])} models ({len(reg['skipped'])} skipped)")
        for s in reg["skipped"]:
            print(f"  skipped: {json.dumps(s, sort_keys=True)}")
    elif cmd == "predict":
        out = pipeline.predict(store, args.model, args.run)
        print(f"wrote {len(out)} predictions")
    elif cmd == "evaluate":
        records, problems = pipeline.evaluate(store, args.model, args.run, cfg)
        print(store.load_text("report", f"{args.model}-on-{args.run}", "report.md"), end="")
        if problems:
            for p in problems:
                print(f"threshold violated: {p}", file=sys.stderr)
            return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (ConfigError, synth.InfeasibleScenarioError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except StorageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
