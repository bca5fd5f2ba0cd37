import numpy as np
import pytest
from hypothesis import given, strategies as st

from burstwatch.lifecycle import (CycleRecord, DuplicateMinuteError, HashtagState,
                                  LifecycleEngine, LifecycleOrderError, LifecycleParams,
                                  NotResolvedError, TimeSeries, UndefinedRatioError, advance,
                                  burst_threshold, check_trigger, cycles_from_events, label_instance,
                                  lifecycle_statistics, replay_series)
from oracles import lifecycle_oracle, random_lifecycle_series


def _events(counts, params=LifecycleParams(), incremental=True):
    return [(e.minute, e.kind.value, e.at, e.cycle)
            for e in replay_series(counts, 0, params, incremental=incremental)]


@pytest.mark.parametrize("window,expected", [([10, 10, 10, 11, 10], True),
                                             ([10, 10, 10, 10, 10], False),
                                             ([0, 0, 0, 0, 0], False)])
def test_check_trigger(window, expected):
    series = TimeSeries(100, np.array([3] + window))
    assert check_trigger(series, 105, LifecycleParams(delta=50)) is expected


@pytest.mark.parametrize("c1,expected", [(60, 110), (200, 300), (0, 50), (101, 152)])
def test_burst_threshold(c1, expected):
    assert burst_threshold(c1, 50) == expected


def test_burst_onset_at_first_exceeding_minute():
    counts = [0] * 20 + [11] * 5 + [3] * 10 + [120] + [0] * 10
    ev = _events(counts)
    assert ev[0] == (24, "Triggered", 24, 0)
    assert ev[1] == (35, "BurstOnset", 35, 0)
    assert ev == lifecycle_oracle(counts, 50)[0]


def test_negative_then_death():
    counts = [11] * 5 + [1] * 1440 + [0] * 1500
    ev = _events(counts)
    kinds = [k for _, k, _, _ in ev]
    assert kinds == ["Triggered", "LabeledNegative", "Death"]
    assert ev[1][0] == 4 + 1440
    assert ev == lifecycle_oracle(counts, 50)[0]


def test_quiet_series_has_no_events():
    assert _events([10] * 3000) == []


def test_offburst_confirmed_after_quiet_day():
    counts = [11] * 5 + [200] * 3 + [0] * 1500
    ev = _events(counts)
    off = [e for e in ev if e[1] == "OffBurst"][0]
    assert off[2] == 8 and off[0] == 8 + 1439


def test_restart_after_death_starts_new_cycle():
    one = [11] * 5 + [200] + [0] * 1445
    ev = _events(one + one)
    triggers = [e for e in ev if e[1] == "Triggered"]
    assert [e[3] for e in triggers] == [0, 1]
    assert ev == lifecycle_oracle(one + one, 50)[0]


def test_order_errors():
    st = HashtagState("h", 10)
    advance(st, 12, 3)
    with pytest.raises(DuplicateMinuteError):
        advance(st, 12, 1)
    with pytest.raises(LifecycleOrderError):
        advance(st, 5, 1)


def test_replay_matches_oracle_small_params():
    rng = np.random.default_rng(11)
    for _ in range(150):
        delta, window = int(rng.integers(1, 15)), int(rng.integers(1, 6))
        horizon = int(rng.integers(2, 40))
        quiet = int(rng.integers(horizon, 70))
        params = LifecycleParams(delta, window, horizon, quiet, quiet)
        counts = random_lifecycle_series(rng, int(rng.integers(20, 500)), delta, window)
        expected = lifecycle_oracle(counts, delta, window, horizon, quiet, quiet)[0]
        assert _events(counts, params) == expected
        assert _events(counts, params, incremental=False) == expected


def test_params_reject_outcomes_longer_than_death_quiet():
    with pytest.raises(ValueError):
        LifecycleParams(50, 5, 1441, 1440, 1440)
    with pytest.raises(ValueError):
        LifecycleParams(50, 5, 1440, 1441, 1440)


def test_engine_event_and_cycle_views_agree():
    rng = np.random.default_rng(12)
    params = LifecycleParams(5, 3, 20, 30, 30)
    engine = LifecycleEngine(params)
    for minute in range(600):
        for key in ("a", "b"):
            c = int(rng.poisson(4 if (minute // 50) % 3 == 0 else 0.2))
            if c:
                engine.feed_count(key, minute, c)
    events = engine.close(700)
    from_log = [(c.key, c.cycle, c.trigger, c.burst, c.offburst, c.death) for c in cycles_from_events(events)]
    live = [(c.key, c.cycle, c.trigger, c.burst, c.offburst, c.death) for c in engine.cycle_records()]
    assert from_log == live
    assert [e.sort_key() for e in events] == sorted(e.sort_key() for e in events)


def _record(trigger, burst, offburst, negative=False):
    return CycleRecord("h", 0, trigger - 10, trigger, 11, 61, burst=burst, negative=negative,
                       offburst=offburst)


def test_label_instance_examples():
    assert label_instance(_record(0, 30, 200), 5).tbb == 25
    assert label_instance(_record(0, 30, 200), 60).tra == 140
    assert label_instance(_record(0, 30, 200), 30).tbb == 1
    assert label_instance(_record(0, None, None, negative=True), 5).burst_label == 0
    with pytest.raises(NotResolvedError):
        label_instance(_record(0, None, None), 5)


def test_lifecycle_statistics_examples():
    rec = _record(0, 10, 120)
    rec.death = 600
    table = {row["checkpoint"]: row for row in lifecycle_statistics([rec])}
    assert table[5]["RAB"] == 0 and table[15]["RAB"] == 1
    assert table[180]["ROB"] == 1 and table[1440]["RAD"] == 1
    instant = [_record(0, 1, 50)]
    assert lifecycle_statistics(instant)[0]["RAB"] == 1.0
    with pytest.raises(UndefinedRatioError):
        lifecycle_statistics([_record(0, None, None, negative=True)])


@given(st.lists(st.integers(0, 30), min_size=1, max_size=200), st.integers(1, 40),
       st.integers(1, 5))
def test_moments_are_ordered(counts, delta, window):
    params = LifecycleParams(delta, window, 15, 25, 25)
    state = HashtagState("h", 0, params)
    for i, c in enumerate(counts):
        if c:
            advance(state, i, c)
    for rec in state.closed + ([state.current] if state.current else []):
        moments = [m for m in (rec.trigger, rec.burst, rec.offburst, rec.death) if m is not None]
        assert moments == sorted(moments)


@given(st.lists(st.integers(0, 30), min_size=1, max_size=200), st.integers(1, 40))
def test_events_never_precede_their_moment(counts, delta):
    events = replay_series(counts, 0, LifecycleParams(delta, 3, 15, 25, 25))
    assert all(e.minute >= e.at for e in events)
    assert [e.minute for e in events] == sorted(e.minute for e in events)
