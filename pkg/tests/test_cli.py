import json

import pytest

from burstwatch import pipeline
from burstwatch.cli import main
from burstwatch.storage import Store
from burstwatch.synth import StreamScenario


@pytest.fixture
def scenario_file(tmp_path):
    sc = StreamScenario(seed=1, delta=20, n_triggered=160, trigger_spacing_minutes=3.0,
                        dormancy_median_minutes=120.0, n_background_hashtags=20,
                        n_companion_tags=300, author_pool_size=2000)
    path = tmp_path / "scenario.json"
    path.write_text(sc.to_json())
    return path


def _truth_moments(store, run):
    out = []
    for t in pipeline.load_truth(store, run):
        out.append((t["key"], int(t["cycle"]), int(t["trigger_min"]),
                    int(t["burst_min"]) if t["burst_min"] else None,
                    int(t["offburst_min"]) if t["offburst_min"] else None,
                    int(t["death_min"]) if t["death_min"] else None))
    return sorted(out)


def test_simulate_detect_stats_closed_loop(tmp_path, scenario_file, capsys):
    out = str(tmp_path / "data")
    assert main(["simulate", "--scenario", str(scenario_file), "--seed", "7", "--out", out]) == 0
    assert main(["detect", "--out", out]) == 0
    assert main(["stats", "--out", out]) == 0
    assert "RAB" in capsys.readouterr().out
    store = Store(out)
    got = sorted((c.key, c.cycle, c.trigger, c.burst, c.offburst, c.death)
                 for c in pipeline.load_cycles(store, "default"))
    assert got == _truth_moments(store, "default")
    assert store.exists("stats", "default", "stats.csv")


def test_full_chain_from_empty_directory(tmp_path, scenario_file, capsys):
    out = str(tmp_path / "chain")
    common = ["--out", out, "--stages", "5,15,30"]
    for run, seed in (("historic", "11"), ("training", "12"), ("test", "13")):
        assert main(["simulate", "--scenario", str(scenario_file), "--run", run,
                     "--seed", seed, "--out", out]) == 0
        assert main(["detect", "--run", run] + common) == 0
        assert main(["featurize", "--run", run] + common) == 0
    assert main(["build-index", "--historic", "historic", "--training", "training"] + common) == 0
    assert main(["train", "--training", "training", "--beta", "0.5,2"] + common) == 0
    assert main(["predict", "--run", "test"] + common) == 0
    capsys.readouterr()
    assert main(["evaluate", "--run", "test"] + common) == 0
    report = capsys.readouterr().out
    assert "svm-f0.5" in report and "svm-f2" in report
    registry = Store(out).load_json("model", "model", "registry.json")
    assert registry["betas"] == [0.5, 2.0]
    assert {m["task"] for m in registry["models"]} <= {"burst", "tbb", "tra"}


def test_evaluate_without_models_names_train(tmp_path, capsys):
    code = main(["evaluate", "--run", "test", "--out", str(tmp_path)])
    assert code == 3
    assert "burstwatch train" in capsys.readouterr().err


def test_detect_without_stream_names_simulate(tmp_path, capsys):
    assert main(["detect", "--run", "nothing", "--out", str(tmp_path)]) == 3
    assert "burstwatch simulate" in capsys.readouterr().err


def test_threshold_violation_exits_nonzero(tmp_path, scenario_file, capsys):
    out = str(tmp_path / "t")
    common = ["--out", out, "--stages", "5"]
    for run, seed in (("historic", "21"), ("training", "22"), ("test", "23")):
        main(["simulate", "--scenario", str(scenario_file), "--run", run, "--seed", seed,
              "--out", out])
        main(["detect", "--run", run] + common)
        main(["featurize", "--run", run] + common)
    main(["build-index", "--historic", "historic", "--training", "training"] + common)
    main(["train", "--training", "training"] + common)
    main(["predict", "--run", "test"] + common)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"stages": [5], "thresholds": [
        {"stage": 5, "task": "burst", "model": "svm-f1", "metric": "f1", "min": 1.01}]}))
    capsys.readouterr()
    assert main(["evaluate", "--run", "test", "--config", str(cfg), "--out", out]) == 1
    assert "threshold violated" in capsys.readouterr().err


def test_invalid_config_is_rejected_before_work(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"delta": -3}))
    assert main(["stats", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["train", "--training", "x", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_data_dir_environment_variable(tmp_path, scenario_file, monkeypatch):
    monkeypatch.setenv("BURSTWATCH_DATA_DIR", str(tmp_path / "envroot"))
    assert main(["simulate", "--scenario", str(scenario_file), "--n-triggered", "20"]) == 0
    assert (tmp_path / "envroot" / "data" / "streams" / "default" / "stream.jsonl").exists()


def test_bad_flag_values_exit_with_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["detect", "--stages", "5,x"])
    assert err.value.code == 2
