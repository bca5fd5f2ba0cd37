"""Stage snapshots over a tweet stream and assembly of the full feature vector."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..ingest import TweetRecord
from ..lifecycle import CycleRecord
from .base import (CycleAccumulator, content_features, dormancy_features, hashtag_features,
                   meme_features, network_features, user_features)
from .prototypes import PrototypeIndex
from .schema import ALPHA, BASE_DIM, SCHEMA_VERSION, stage_tag
from .series import (SaxConfig, extract_3grams, polyfit, sax_encode, top_gram_features,
                     ts_derivative_features)

DEFAULT_STAGES = (5, 15, 30, 60, 180, 360)


@dataclass
class StageRow:
    """Base features of one (hashtag cycle, stage) plus its ground truth."""

    key: str
    cycle: int
    stage: int
    t_p: int
    trigger: int
    burst: int | None
    offburst: int | None
    negative: bool
    base: np.ndarray
    sax: str

    @property
    def label(self) -> int | None:
        if self.burst is not None:
            return 1
        return 0 if self.negative else None

    @property
    def tbb(self) -> int | None:
        if self.burst is None or self.burst <= self.t_p:
            return None
        return max(self.burst - self.t_p, 1)

    @property
    def tra(self) -> int | None:
        if self.burst is None or self.burst > self.t_p or self.offburst is None:
            return None
        if self.t_p >= self.offburst:
            return None
        return max(self.offburst - self.t_p, 1)

    @property
    def task1_eligible(self) -> bool:
        """Triggered, label known, and not burst yet at the prediction moment."""
        return self.label is not None and (self.burst is None or self.burst > self.t_p)

    @property
    def task2_eligible(self) -> bool:
        return self.tbb is not None

    @property
    def task3_eligible(self) -> bool:
        return self.tra is not None

    def eligible(self, task: str) -> bool:
        return {"burst": self.task1_eligible, "tbb": self.task2_eligible,
                "tra": self.task3_eligible}[task]

    def target(self, task: str):
        if task == "burst":
            return self.label
        return self.tbb if task == "tbb" else self.tra

    @property
    def grams(self) -> frozenset:
        return extract_3grams(self.sax)


def series_features(series) -> list[float]:
    return list(polyfit(series).coeffs) + ts_derivative_features(series)


def base_vector(acc: CycleAccumulator, record: CycleRecord, t_p: int, series) -> np.ndarray:
    values = (meme_features(acc) + user_features(acc, t_p) + content_features(acc)
              + network_features(acc.graph) + hashtag_features(acc)
              + dormancy_features(record.first_seen, record.trigger, t_p, record.burst)
              + series_features(series))
    out = np.array(values, dtype=np.float64)
    assert out.shape == (BASE_DIM,)
    return out


@dataclass
class _Tracker:
    record: CycleRecord
    acc: CycleAccumulator
    sources: dict = field(default_factory=dict)


def featurize_stream(records: Iterable[TweetRecord], cycles: Iterable[CycleRecord],
                     sentiment: dict, stages=DEFAULT_STAGES, sax: SaxConfig = SaxConfig(),
                     end_minute: int | None = None) -> list[StageRow]:
    """One pass over a minute-ordered stream producing a row per (cycle, stage).

    Accumulation for a cycle covers tweets from the trigger minute s through
    the prediction minute; retweet edges resolve only against source tweets
    seen inside that window. Stages whose prediction minute lies past the end
    of the stream are skipped.
    """
    stages = tuple(sorted(stages))
    horizon = stages[-1]
    by_key: dict[str, list[CycleRecord]] = {}
    for rec in cycles:
        by_key.setdefault(rec.key, []).append(rec)
    for recs in by_key.values():
        recs.sort(key=lambda r: r.trigger)

    active: dict[tuple, _Tracker] = {}
    due: list = []
    rows: list[StageRow] = []
    last_minute = None

    def snapshot(tracker: _Tracker, offset: int):
        rec = tracker.record
        t_p = rec.trigger + offset
        series = np.zeros(offset + 1, dtype=np.int64)
        for minute, count in tracker.acc.minute_counts.items():
            if minute <= t_p:
                series[minute - rec.trigger] = count
        rows.append(StageRow(rec.key, rec.cycle, offset, t_p, rec.trigger, rec.burst,
                             rec.offburst, rec.negative, base_vector(tracker.acc, rec, t_p, series),
                             sax_encode(series, sax)))

    def release(before_minute):
        while due and (before_minute is None or due[0][0] < before_minute):
            t_p, key, cycle, offset = heapq.heappop(due)
            tracker = active[(key, cycle)]
            snapshot(tracker, offset)
            if offset == horizon:
                del active[(key, cycle)]

    for tweet in records:
        m = tweet.timestamp // 60
        if last_minute is not None and m < last_minute:
            raise ValueError(f"stream not minute-ordered at tweet {tweet.tweet_id}")
        last_minute = m
        release(m)
        for occ in tweet.hashtags:
            recs = by_key.get(occ.key)
            if not recs:
                continue
            for rec in recs:
                if rec.trigger <= m <= rec.trigger + horizon:
                    break
            else:
                continue
            ident = (rec.key, rec.cycle)
            tracker = active.get(ident)
            if tracker is None:
                tracker = _Tracker(rec, CycleAccumulator(rec.key))
                active[ident] = tracker
                for offset in stages:
                    heapq.heappush(due, (rec.trigger + offset, rec.key, rec.cycle, offset))
            source = None
            if tweet.retweet_of is not None:
                source = tracker.sources.get(tweet.retweet_of)
            tracker.sources[tweet.tweet_id] = tweet.author_id
            tracker.acc.add(tweet, occ.surface, sentiment, source)
    limit = last_minute if end_minute is None else end_minute
    if limit is not None:
        release(limit + 1)
    rows.sort(key=lambda r: (r.stage, r.key, r.cycle))
    return rows


@dataclass
class StageArtifacts:
    """What assembly needs at one stage: top-gram table and historic index."""

    top_grams: tuple
    index: PrototypeIndex


@dataclass
class FeatureVector:
    key: str
    cycle: int
    prediction_minute: int
    stage_tag: str
    values: np.ndarray
    schema_version: int = SCHEMA_VERSION


def assemble(row: StageRow, task: str, artifacts: StageArtifacts) -> FeatureVector:
    values = np.empty(ALPHA, dtype=np.float64)
    values[:BASE_DIM] = row.base
    values[BASE_DIM:BASE_DIM + 5] = top_gram_features(row.grams, artifacts.top_grams)
    values[BASE_DIM + 5:] = artifacts.index.features(row.base, task)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{row.key}#{row.cycle}: non-finite feature value")
    return FeatureVector(row.key, row.cycle, row.t_p, stage_tag(row.stage), values)


def assemble_matrix(rows: list[StageRow], task: str, artifacts: StageArtifacts) -> np.ndarray:
    if not rows:
        return np.zeros((0, ALPHA))
    return np.vstack([assemble(r, task, artifacts).values for r in rows])
