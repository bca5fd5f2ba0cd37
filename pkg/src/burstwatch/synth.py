"""Synthetic tweet streams with planted hashtag lifecycles and a truth file.

Each planted hashtag gets a minute count series built piece by piece so that
it triggers at a chosen minute and then either bursts after a chosen delay
(positive) or never exceeds its burst threshold (negative). Two latent
scores per hashtag drive the per-tweet signals so that features carry real
but noisy information about the outcome: "virality" (retweets, urls,
emoticons, sentiment, author spread) shortens the wait before a burst, and
"stickiness" (mentions, co-occurring hashtags) lengthens the burst.

The truth file is computed by an offline evaluation of the lifecycle
definitions over each key's complete series, and generation fails loudly if
that evaluation disagrees with what was planted.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, TextIO

import numpy as np

from .lifecycle import LifecycleParams, burst_threshold

START_EPOCH = 1351728000  # 2012-11-01 00:00:00 UTC

# Proportion of bursting hashtags among those still not burst at each stage.
DEFAULT_STAGE_PROFILE = {5: 0.1239, 15: 0.0924, 30: 0.0627, 60: 0.0358, 180: 0.0127, 360: 0.0080}
DEFAULT_FIRST_STAGE_RAB = 0.3032

POSITIVE_WORDS = ("amazing", "awesome", "beautiful", "best", "brilliant", "congrats", "excited",
                  "great", "happy", "love", "wonderful", "win")
NEGATIVE_WORDS = ("angry", "awful", "bad", "crisis", "disaster", "explosion", "hate", "sad",
                  "scary", "terrible", "tragic", "worst")
NEUTRAL_WORDS = ("today", "news", "people", "watch", "live", "tonight", "update", "video",
                 "check", "follow", "game", "show", "music", "city", "team", "photo")
HAPPY_FACES = (":)", ":-)", ":D", "<3", ";)")
SAD_FACES = (":(", ":-(", ":'(", "D:")
SPECIAL_TOKENS = ("!!!", "???", "soooo", "yesss", "nooooo")


class InfeasibleScenarioError(ValueError):
    """The scenario cannot produce series that satisfy the lifecycle definitions."""


@dataclass
class StreamScenario:
    seed: int = 7
    delta: int = 50
    window_minutes: int = 5
    # Either n_triggered with a stage profile, or explicit class counts.
    n_triggered: int | None = 2000
    stage_profile: dict = field(default_factory=lambda: dict(DEFAULT_STAGE_PROFILE))
    first_stage_rab: float = DEFAULT_FIRST_STAGE_RAB
    n_planted_bursts: int | None = None
    n_negatives: int | None = None
    trigger_spacing_minutes: float = 5.0
    dormancy_median_minutes: float = 600.0
    dormant_rate_per_minute: float = 1 / 90
    trigger_excess_max: int = 10
    # positives: log(tra) = log(median) + slope * (stickiness - 0.5) + N(0, sigma)
    tra_median_minutes: float = 60.0
    tra_sigma: float = 0.05
    tra_stickiness_slope: float = 4.0
    burst_peak_factor: tuple = (1.05, 1.6)
    burst_head_minutes: tuple = (1.0, 4.0)
    ramp_minutes: tuple = (5, 20)
    pre_burst_floor: tuple = (0.5, 2.5)
    # pre-burst interest grows by this factor times ((t - s) / tbb) ** 2
    anticipation_gain: float = 3.0
    # sustained rate during a burst, as a fraction of the threshold, fading to 0 at off-burst
    burst_body_fraction: tuple = (0.1, 0.3)
    spike_gap_minutes: tuple = (20, 120)
    negative_decay_minutes: tuple = (2.0, 15.0)
    hard_negative_prob: float = 0.25
    hard_negative_width: tuple = (2.0, 6.0)
    second_cycle_prob: float = 0.05
    n_background_hashtags: int = 200
    background_rate: float = 0.02
    background_span_minutes: tuple = (600, 2880)
    n_companion_tags: int = 5000
    author_pool_size: int = 20000
    follower_log_mean: float = 5.0
    follower_log_sigma: float = 1.8
    # positives: virality = high - drop * log(tbb) / log(1440) + N(0, noise)
    virality_positive: tuple = (0.98, 0.8)
    virality_noise: float = 0.02
    virality_negative: tuple = (2.0, 6.0)
    retweet_prob: tuple = (0.05, 0.6)
    mention_prob: tuple = (0.05, 0.45)
    url_prob: tuple = (0.6, -0.45)
    special_prob: tuple = (0.05, 0.35)
    happy_prob: tuple = (0.05, 0.3)
    sad_prob: tuple = (0.25, -0.2)
    cooccur_prob: tuple = (0.1, 0.4)
    new_author_prob: tuple = (0.35, 0.55)
    celebrity_prob: tuple = (0.02, 0.15)

    # ---- validation and (de)serialization ----

    def validate(self) -> None:
        if self.delta <= 0 or self.window_minutes < 1:
            raise InfeasibleScenarioError("delta must be positive and window_minutes >= 1")
        if self.n_triggered is None:
            if self.n_planted_bursts is None or self.n_negatives is None:
                raise InfeasibleScenarioError("give n_triggered or both explicit class counts")
            if self.n_planted_bursts < 0 or self.n_negatives < 0:
                raise InfeasibleScenarioError("class counts must be non-negative")
        elif self.n_triggered < 0:
            raise InfeasibleScenarioError("n_triggered must be non-negative")
        lo, hi = self.burst_peak_factor
        if lo < 1.0 or hi < lo:
            raise InfeasibleScenarioError(
                "burst_peak_factor must satisfy 1 <= low <= high; a peak below the burst "
                "threshold can never burst")
        for name in ("retweet_prob", "mention_prob", "url_prob", "special_prob", "happy_prob",
                     "sad_prob", "cooccur_prob", "new_author_prob", "celebrity_prob"):
            base, slope = getattr(self, name)
            for v in (0.0, 1.0):
                if not 0.0 <= base + slope * v <= 1.0:
                    raise InfeasibleScenarioError(f"{name} leaves [0, 1] for latent score {v}")
        for name in ("hard_negative_prob", "second_cycle_prob", "first_stage_rab"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InfeasibleScenarioError(f"{name} must lie in [0, 1]")
        if self.first_stage_rab >= 1.0:
            raise InfeasibleScenarioError("first_stage_rab must be below 1")
        if tuple(sorted(self.stage_profile)) != TBB_BIN_EDGES[:-1]:
            raise InfeasibleScenarioError(f"stage_profile must cover stages {TBB_BIN_EDGES[:-1]}")
        prev = None
        for stage in sorted(self.stage_profile):
            p = self.stage_profile[stage]
            if not 0.0 <= p < 1.0:
                raise InfeasibleScenarioError("stage proportions must lie in [0, 1)")
            if prev is not None and p > prev:
                raise InfeasibleScenarioError("stage proportions must not increase")
            prev = p
        if self.ramp_minutes[0] < 1 or self.ramp_minutes[1] < self.ramp_minutes[0]:
            raise InfeasibleScenarioError("ramp_minutes must satisfy 1 <= low <= high")
        if self.pre_burst_floor[0] < 0 or self.hard_negative_width[0] <= 0:
            raise InfeasibleScenarioError("pre_burst_floor must be >= 0 and hard_negative_width > 0")
        if self.anticipation_gain < 0:
            raise InfeasibleScenarioError("anticipation_gain must be >= 0")
        lo, hi = self.burst_body_fraction
        if lo < 0 or hi < lo:
            raise InfeasibleScenarioError("burst_body_fraction must satisfy 0 <= low <= high")
        if self.virality_noise < 0:
            raise InfeasibleScenarioError("virality_noise must be >= 0")
        if self.tra_median_minutes < 1 or self.tra_sigma < 0:
            raise InfeasibleScenarioError("invalid burst duration distribution")
        if self.author_pool_size < 10:
            raise InfeasibleScenarioError("author_pool_size must be >= 10")
        if self.n_companion_tags < 1:
            raise InfeasibleScenarioError("n_companion_tags must be >= 1")

    def to_json(self) -> str:
        d = asdict(self)
        d["stage_profile"] = {str(k): v for k, v in sorted(self.stage_profile.items())}
        return json.dumps(d, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "StreamScenario":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InfeasibleScenarioError(f"unknown scenario fields: {sorted(unknown)}")
        kw = {}
        for k, v in d.items():
            if k == "stage_profile":
                v = {int(s): float(p) for s, p in v.items()}
            elif isinstance(v, list):
                v = tuple(v)
            kw[k] = v
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "StreamScenario":
        return cls.from_dict(json.loads(text))

    @property
    def lifecycle_params(self) -> LifecycleParams:
        return LifecycleParams(delta=self.delta, window_minutes=self.window_minutes)


def small_scenario(seed: int, delta: int | None = None) -> StreamScenario:
    """A few planted lifecycles with low volume; used for fast closed-loop checks."""
    rng = np.random.default_rng(seed)
    if delta is None:
        delta = int(rng.choice([5, 10, 20, 50]))
    return StreamScenario(
        seed=seed, delta=delta, n_triggered=None,
        n_planted_bursts=int(rng.integers(1, 5)), n_negatives=int(rng.integers(0, 4)),
        trigger_spacing_minutes=90.0, dormancy_median_minutes=120.0,
        tra_median_minutes=30.0, negative_decay_minutes=(3.0, 20.0),
        burst_head_minutes=(1.0, 5.0), second_cycle_prob=0.3,
        n_background_hashtags=5, n_companion_tags=200, author_pool_size=300,
    )


# ---- class quotas ------------------------------------------------------------

TBB_BIN_EDGES = (5, 15, 30, 60, 180, 360, 1440)


def class_quotas(scenario: StreamScenario) -> tuple[int, list[int]]:
    """(negatives, positives per TBB bin) matching the stage profile.

    With r_x = p_x / (1 - p_x), the number of positives still not burst at
    stage x is N * r_x; the first-stage RAB fixes how many burst before the
    first stage.
    """
    stages = sorted(scenario.stage_profile)
    ratio = {x: scenario.stage_profile[x] / (1 - scenario.stage_profile[x]) for x in stages}
    if scenario.n_triggered is not None:
        first = ratio[stages[0]]
        negatives = int(round(scenario.n_triggered / (1 + first / (1 - scenario.first_stage_rab))))
        positives = scenario.n_triggered - negatives
    else:
        negatives = scenario.n_negatives
        positives = scenario.n_planted_bursts
    if scenario.n_triggered is not None:
        still = [min(positives, int(round(negatives * ratio[x]))) for x in stages]
    else:
        # explicit counts: spread positives with the profile's shape
        first = ratio[stages[0]]
        frac = [(1 - scenario.first_stage_rab) * ratio[x] / first if first > 0 else 0.0
                for x in stages]
        still = [int(round(positives * f)) for f in frac]
    for i in range(1, len(still)):
        still[i] = min(still[i], still[i - 1])
    bins = [positives - still[0]] + [still[i] - still[i + 1] for i in range(len(still) - 1)]
    bins.append(still[-1])
    return negatives, bins


# ---- offline evaluation of the lifecycle definitions --------------------------

@dataclass
class TruthCycle:
    key: str
    cycle: int
    trigger: int
    burst: int | None
    offburst: int | None
    death: int | None
    death_confirmed: int | None
    negative: bool

    @property
    def tbb(self):
        return None if self.burst is None else self.burst - self.trigger

    @property
    def tra(self):
        return None if self.burst is None or self.offburst is None else self.offburst - self.burst


def evaluate_definitions(counts: np.ndarray, origin: int, params: LifecycleParams, key: str = ""):
    """Apply the lifecycle definitions to a complete dense series.

    Works on whole-series quantities (window sums via prefix sums, run lengths)
    rather than minute-by-minute state. Moments that would only be confirmed
    after the end of the series are left as None.
    """
    x = np.asarray(counts, dtype=np.int64)
    n = len(x)
    w, delta = params.window_minutes, params.delta
    horizon, q_off, q_death = (params.burst_horizon_minutes, params.offburst_quiet_minutes,
                               params.death_quiet_minutes)
    pref = np.concatenate([[0], np.cumsum(x)])
    idx = np.arange(n)
    wsum = pref[idx + 1] - pref[np.maximum(idx + 1 - w, 0)]
    active = np.flatnonzero(wsum > delta)
    out = []
    start = 0
    cycle = 0
    while True:
        cand = active[active >= start]
        if len(cand) == 0:
            break
        s = int(cand[0])
        c1 = int(x[s])
        thr = burst_threshold(c1, delta)
        # death: first active minute a >= s followed by a quiet gap of q_death
        acts = active[active >= s]
        gaps = np.diff(np.append(acts, n + q_death))
        big = np.flatnonzero(gaps > q_death)
        last = int(acts[big[0]]) if len(big) else None
        death_conf = last + q_death if last is not None and last + q_death <= n - 1 else None
        limit = n - 1 if death_conf is None else death_conf
        hi = min(s + horizon, n - 1)
        above = np.flatnonzero(x[s + 1:hi + 1] > thr)
        burst = s + 1 + int(above[0]) if len(above) else None
        negative = burst is None and s + horizon <= limit
        offburst = None
        if burst is not None:
            below = x[burst + 1:] < thr
            run = 0
            for j, flag in enumerate(below):
                run = run + 1 if flag else 0
                if run == q_off:
                    t_start = burst + 1 + j - q_off + 1
                    if burst + 1 + j <= limit:
                        offburst = t_start
                    break
        out.append(TruthCycle(key, cycle, s + origin, None if burst is None else burst + origin,
                              None if offburst is None else offburst + origin,
                              None if death_conf is None else last + 1 + origin,
                              None if death_conf is None else death_conf + origin, negative))
        if death_conf is None:
            break
        start = death_conf + 1
        cycle += 1
    return out


# ---- series construction -----------------------------------------------------

@dataclass
class Planted:
    key: str
    positive: bool
    virality: float
    trigger: int
    tbb: int | None
    tra: int | None
    counts: dict
    surfaces: tuple
    first_seen: int = 0
    stickiness: float = 0.5
    cycle: int = 0


def _poisson_clip(rng, level, cap):
    return int(min(rng.poisson(max(level, 0.0)), cap))


def _integer_split(total: int, weights) -> list[int]:
    w = np.asarray(weights, dtype=np.float64)
    raw = total * w / w.sum()
    base = np.floor(raw).astype(int)
    rem = total - base.sum()
    order = np.argsort(-(raw - base), kind="stable")
    for i in order[:rem]:
        base[i] += 1
    return [int(v) for v in base]


def _pre_trigger(rng, sc: StreamScenario, s: int, counts: dict) -> int:
    """Dormant trickle, quiet gap and the window that triggers at ``s``; returns c1."""
    w, delta = sc.window_minutes, sc.delta
    excess = int(rng.integers(0, sc.trigger_excess_max + 1))
    total = delta + 1 + excess
    if w == 1:
        c1 = total
    else:
        lo = 1 + excess
        c1 = max(lo, int(round(total * rng.uniform(0.2, 0.35))))
        ramp = _integer_split(total - c1, np.arange(1, w) ** 2)
        for j, c in enumerate(ramp):
            if c:
                counts[s - (w - 1) + j] = c
    counts[s] = c1
    dormancy = int(min(max(rng.lognormal(math.log(sc.dormancy_median_minutes), 1.0), 0), 14400))
    gap_end = s - 2 * w  # minutes (gap_end, s - w] stay silent
    if dormancy > 2 * w:
        t = s - dormancy
        while t <= gap_end:
            counts[t] = 1
            t += max(w, int(rng.exponential(1 / sc.dormant_rate_per_minute)) + 1)
    return c1


def _positive_series(rng, sc: StreamScenario, s: int, tbb: int, tra: int, counts: dict, c1: int):
    thr = burst_threshold(c1, sc.delta)
    b = s + tbb
    start = c1 * rng.uniform(0.4, 0.8)
    floor0 = rng.uniform(*sc.pre_burst_floor)
    ramp = min(tbb, rng.uniform(*sc.ramp_minutes))
    for t in range(s + 1, b):
        rise = max(0.0, 1.0 - (b - t) / ramp)
        grown = floor0 * (1.0 + sc.anticipation_gain * ((t - s) / tbb) ** 2)
        level = start * math.exp(-(t - s) / 2.0) + grown + (thr - grown) * rise ** 2
        c = _poisson_clip(rng, level, thr)
        if c:
            counts[t] = c
    peak = max(thr + 1, int(round(thr * rng.uniform(*sc.burst_peak_factor))))
    counts[b] = peak
    floor = 0.15 * sc.delta / sc.window_minutes
    head = rng.uniform(*sc.burst_head_minutes)
    body = thr * rng.uniform(*sc.burst_body_fraction)
    end = b + tra  # off-burst minute t'
    gap = int(rng.integers(sc.spike_gap_minutes[0], sc.spike_gap_minutes[1] + 1))
    for t in range(b + 1, end - 1):
        j = t - b
        level = peak * math.exp(-j / head) + floor + body * (1.0 - j / tra)
        c = _poisson_clip(rng, level, 3 * peak)
        if j % gap == 0:
            c = max(c, thr + int(rng.poisson(2)))
        if c:
            counts[t] = c
    if end - 1 > b:
        counts[end - 1] = thr + int(rng.poisson(1))
    tail = int(rng.integers(30, 601))
    tail_tau = rng.uniform(20, 200)
    for j in range(tail):
        c = _poisson_clip(rng, floor * math.exp(-j / tail_tau), thr - 1)
        if c:
            counts[end + j] = c


def _negative_series(rng, sc: StreamScenario, s: int, counts: dict, c1: int):
    thr = burst_threshold(c1, sc.delta)
    tau = rng.uniform(*sc.negative_decay_minutes)
    level0 = c1 * rng.uniform(0.5, 1.0)
    bump = None
    if rng.random() < sc.hard_negative_prob:
        centre = int(rng.integers(10, 721))
        width = rng.uniform(*sc.hard_negative_width)
        height = thr * rng.uniform(0.6, 0.95)
        bump = (centre, width, height)
    span = int(min(1440, max(30, 6 * tau, 0 if bump is None else bump[0] + 3 * bump[1])))
    for j in range(1, span + 1):
        level = level0 * math.exp(-j / tau)
        if bump is not None:
            level += bump[2] * math.exp(-0.5 * ((j - bump[0]) / bump[1]) ** 2)
        c = _poisson_clip(rng, level, thr)
        if c:
            counts[s + j] = c


def _surfaces(rng, key: str, virality: float) -> tuple:
    variants = [key]
    n_var = 1 + int(rng.binomial(3, virality))
    tries = 0
    while len(variants) < n_var and tries < 20:
        tries += 1
        mask = rng.random(len(key)) < 0.5
        v = "".join(ch.upper() if m else ch for ch, m in zip(key, mask))
        if v not in variants:
            variants.append(v)
    return tuple(variants)


def _draw_tbb(rng, bins_idx: int) -> int:
    lo = 1 if bins_idx == 0 else TBB_BIN_EDGES[bins_idx - 1] + 1
    hi = TBB_BIN_EDGES[bins_idx]
    return int(rng.integers(lo, hi + 1))


def plan_lifecycles(sc: StreamScenario, rng) -> list[Planted]:
    negatives, bins = class_quotas(sc)
    kinds = [("neg", None)] * negatives
    for i, k in enumerate(bins):
        kinds += [("pos", i)] * k
    order = rng.permutation(len(kinds))
    planted = []
    base_time = 15000  # room for dormant history
    free_keys: list[tuple[int, str, tuple]] = []  # (available_from, key, surfaces)
    for slot, idx in enumerate(order):
        kind, b = kinds[idx]
        positive = kind == "pos"
        u = float(rng.uniform(0.0, 1.0))
        s = base_time + int(round(slot * sc.trigger_spacing_minutes)) + int(rng.integers(0, 3))
        counts: dict = {}
        c1 = _pre_trigger(rng, sc, s, counts)
        tbb = tra = None
        if positive:
            tbb = _draw_tbb(rng, b)
            high, drop = sc.virality_positive
            v = high - drop * math.log(tbb) / math.log(1440) + rng.normal(0.0, sc.virality_noise)
            v = float(min(max(v, 0.02), 0.98))
            mu = math.log(sc.tra_median_minutes) + sc.tra_stickiness_slope * (u - 0.5)
            tra = int(min(max(round(rng.lognormal(mu, sc.tra_sigma)), 1), 1300))
            _positive_series(rng, sc, s, tbb, tra, counts, c1)
        else:
            v = float(rng.beta(*sc.virality_negative))
            _negative_series(rng, sc, s, counts, c1)
        first_seen = min(counts)
        reuse = None
        if free_keys and rng.random() < sc.second_cycle_prob:
            for i, (avail, key, surf) in enumerate(free_keys):
                if avail < first_seen:
                    reuse = free_keys.pop(i)
                    break
        if reuse is not None:
            key, surfaces = reuse[1], reuse[2]
        else:
            key = f"tag{sc.seed % 1000:03d}x{len(planted):05d}"
            surfaces = _surfaces(rng, key, v)
        p = Planted(key, positive, v, s, tbb, tra, counts, surfaces, first_seen, stickiness=u)
        planted.append(p)
        # the key becomes reusable once this cycle is surely dead
        free_keys.append((max(counts) + 2 * 1440 + 10, key, surfaces))
    return planted


def _background_series(rng, sc: StreamScenario, horizon: int) -> list[tuple[str, dict]]:
    out = []
    cap = sc.delta
    for i in range(sc.n_background_hashtags):
        rate = min(sc.background_rate * (rng.pareto(1.5) + 1), 0.8 * sc.delta / sc.window_minutes)
        span = int(rng.integers(sc.background_span_minutes[0], sc.background_span_minutes[1] + 1))
        start = int(rng.integers(0, max(1, horizon - span)))
        counts = {}
        recent = [0] * sc.window_minutes
        for j in range(span):
            room = cap - (sum(recent) - recent[j % sc.window_minutes])
            c = int(min(rng.poisson(rate), max(room, 0)))
            recent[j % sc.window_minutes] = c
            if c:
                counts[start + j] = c
        out.append((f"bg{sc.seed % 1000:03d}x{i:04d}", counts))
    return out


# ---- tweet rendering ---------------------------------------------------------

class _Users:
    def __init__(self, rng, sc: StreamScenario, start_minute: int):
        n = sc.author_pool_size
        self.ids = [f"u{i}" for i in range(n)]
        self.followers = np.floor(rng.lognormal(sc.follower_log_mean, sc.follower_log_sigma, n)).astype(np.int64)
        start = START_EPOCH + start_minute * 60
        self.created = (start - rng.integers(86400, 86400 * 2000, n)).astype(np.int64)
        self.statuses = rng.integers(0, 50000, n).astype(np.int64)
        k = max(1, n // 100)
        self.celebrities = np.argsort(-self.followers, kind="stable")[:k].tolist()
        self.followers = self.followers.tolist()
        self.created = self.created.tolist()
        self.statuses = self.statuses.tolist()


@dataclass
class _Voice:
    """Per-hashtag rendering state."""

    key: str
    surfaces: tuple
    virality: float
    stickiness: float = 0.5
    adopters: list = field(default_factory=list)
    recent: list = field(default_factory=list)


def _p(pair, v):
    return pair[0] + pair[1] * v


class _Renderer:
    def __init__(self, rng, sc: StreamScenario, users: _Users):
        # per-tweet draws use the stdlib generator: far cheaper per scalar
        self.rng = random.Random(int(rng.integers(2**63)))
        self.sc = sc
        self.users = users
        self.next_id = 0
        self.companion = 0

    def tweet(self, voice: _Voice, ts: int) -> str:
        rng, sc, v, users = self.rng, self.sc, voice.virality, self.users
        if not voice.adopters or rng.random() < _p(sc.new_author_prob, v):
            if rng.random() < _p(sc.celebrity_prob, v):
                u = int(users.celebrities[rng.randrange(len(users.celebrities))])
            else:
                u = int(rng.randrange(len(users.ids)))
            voice.adopters.append(u)
        else:
            u = voice.adopters[int(rng.randrange(len(voice.adopters)))]
        tid = f"t{self.next_id}"
        self.next_id += 1
        parts = []
        retweet_of = None
        if voice.recent and rng.random() < _p(sc.retweet_prob, v):
            src_id, src_user = voice.recent[int(rng.randrange(len(voice.recent)))]
            retweet_of = src_id
            parts.append(f"RT @{users.ids[src_user]}:")
        surface = voice.surfaces[0] if rng.random() < 0.7 else \
            voice.surfaces[int(rng.randrange(len(voice.surfaces)))]
        parts.append("#" + surface)
        for _ in range(3):
            r = rng.random()
            if r < 0.15 + 0.5 * v:
                parts.append(POSITIVE_WORDS[int(rng.randrange(len(POSITIVE_WORDS)))])
            elif r < 0.15 + 0.5 * v + 0.35 - 0.3 * v:
                parts.append(NEGATIVE_WORDS[int(rng.randrange(len(NEGATIVE_WORDS)))])
            else:
                parts.append(NEUTRAL_WORDS[int(rng.randrange(len(NEUTRAL_WORDS)))])
        mentions = []
        if rng.random() < _p(sc.mention_prob, voice.stickiness):
            for _ in range(1 + int(rng.random() < 0.3)):
                m = int(rng.randrange(len(users.ids)))
                mentions.append(users.ids[m])
                parts.append("@" + users.ids[m])
        if rng.random() < _p(sc.special_prob, v):
            parts.append(SPECIAL_TOKENS[int(rng.randrange(len(SPECIAL_TOKENS)))])
        if rng.random() < _p(sc.happy_prob, v):
            parts.append(HAPPY_FACES[int(rng.randrange(len(HAPPY_FACES)))])
        if rng.random() < _p(sc.sad_prob, v):
            parts.append(SAD_FACES[int(rng.randrange(len(SAD_FACES)))])
        if rng.random() < _p(sc.url_prob, v):
            parts.append(f"http://t.co/{tid}")
        if rng.random() < _p(sc.cooccur_prob, voice.stickiness):
            parts.append(f"#co{sc.seed % 1000:03d}x{self.companion % sc.n_companion_tags:04d}")
            self.companion += 1
        voice.recent.append((tid, u))
        if len(voice.recent) > 50:
            voice.recent.pop(0)
        record = {
            "id": tid,
            "ts": ts,
            "user": {"id": users.ids[u], "followers": int(users.followers[u]),
                     "created_at": int(users.created[u]), "statuses": int(users.statuses[u])},
            "text": " ".join(parts),
            "mentions": mentions,
        }
        if retweet_of is not None:
            record["retweet_of"] = retweet_of
        return json.dumps(record, separators=(",", ":"))


@dataclass
class GenerationResult:
    truth: list
    planted: list
    n_tweets: int
    first_minute: int
    last_minute: int


TRUTH_HEADER = ("key", "cycle", "trigger_min", "burst_min", "offburst_min", "death_min", "tbb", "tra")


def truth_rows(truth: list[TruthCycle]):
    for t in truth:
        yield (t.key, t.cycle, t.trigger, t.burst, t.offburst, t.death, t.tbb, t.tra)


def generate(scenario: StreamScenario, out: TextIO | Callable[[str], None]) -> GenerationResult:
    """Write the stream (one JSON record per line) to ``out``; return the truth."""
    sc = scenario
    sc.validate()
    rng = np.random.default_rng(sc.seed)
    params = sc.lifecycle_params
    planted = plan_lifecycles(sc, rng)

    # merge planted cycles per key and evaluate the definitions on each key
    per_key: dict[str, dict] = {}
    cycles_of: dict[str, list[Planted]] = {}
    for p in planted:
        merged = per_key.setdefault(p.key, {})
        for m, c in p.counts.items():
            if m in merged:
                raise InfeasibleScenarioError(f"{p.key}: overlapping cycles at minute {m}")
            merged[m] = c
        cycles_of.setdefault(p.key, []).append(p)
    horizon = max((max(c) for c in per_key.values()), default=15000) + 3 * 1440
    truth: list[TruthCycle] = []
    last_needed = 0
    for key in sorted(per_key):
        counts = per_key[key]
        lo = min(counts)
        hi = max(counts) + 3 * 1440
        dense = np.zeros(hi - lo + 1, dtype=np.int64)
        for m, c in counts.items():
            dense[m - lo] = c
        found = evaluate_definitions(dense, lo, params, key)
        plan = sorted(cycles_of[key], key=lambda p: p.trigger)
        if len(found) != len(plan):
            raise InfeasibleScenarioError(f"{key}: planted {len(plan)} cycles, found {len(found)}")
        for p, t in zip(plan, found):
            ok = t.trigger == p.trigger and t.death is not None
            if p.positive:
                ok = ok and t.burst == p.trigger + p.tbb and t.offburst == t.burst + p.tra
            else:
                ok = ok and t.burst is None and t.negative
            if not ok:
                raise InfeasibleScenarioError(f"{key}: planted cycle at {p.trigger} not reproduced")
            p.cycle = t.cycle
            last_needed = max(last_needed, t.death_confirmed)
        truth.extend(found)
    truth.sort(key=lambda t: (t.trigger, t.key))

    background = _background_series(rng, sc, horizon)
    users = _Users(rng, sc, 0)
    renderer = _Renderer(rng, sc, users)

    schedule: dict[int, list] = {}
    voices = {}
    for p in planted:
        voice = voices.get(p.key)
        if voice is None:
            voice = voices[p.key] = _Voice(p.key, p.surfaces, p.virality, p.stickiness)
        for m, c in p.counts.items():
            schedule.setdefault(m, []).append((p.key, c, (p.virality, p.stickiness)))
    for key, counts in background:
        voices[key] = _Voice(key, (key,), 0.3)
        for m, c in counts.items():
            if m <= last_needed:
                schedule.setdefault(m, []).append((key, c, None))
    first_minute = min(schedule) if schedule else 0
    end_minute = max(last_needed, max(schedule) if schedule else 0)
    # a closing tweet pins the end of the observed range
    closer = "zzclose"
    voices[closer] = _Voice(closer, (closer,), 0.0)
    schedule.setdefault(end_minute, []).append((closer, 1, None))

    write = out.write if hasattr(out, "write") else out
    n = 0
    for minute in sorted(schedule):
        batch = []
        for key, count, latent in sorted(schedule[minute], key=lambda e: e[0]):
            voice = voices[key]
            if latent is not None:
                # a reused key takes the latents of the cycle being rendered
                voice.virality, voice.stickiness = latent
            for _ in range(count):
                batch.append((renderer.rng.randrange(60), len(batch), voice))
        batch.sort(key=lambda e: (e[0], e[1]))
        for sec, _, voice in batch:
            write(renderer.tweet(voice, START_EPOCH + minute * 60 + sec) + "\n")
            n += 1
    return GenerationResult(shift_truth(truth), planted, n, START_EPOCH // 60 + first_minute,
                            START_EPOCH // 60 + end_minute)


def shift_truth(truth: list[TruthCycle]) -> list[TruthCycle]:
    """Truth moments in absolute epoch minutes."""
    base = START_EPOCH // 60
    out = []
    for t in truth:
        out.append(TruthCycle(t.key, t.cycle, t.trigger + base,
                              None if t.burst is None else t.burst + base,
                              None if t.offburst is None else t.offburst + base,
                              None if t.death is None else t.death + base,
                              None if t.death_confirmed is None else t.death_confirmed + base,
                              t.negative))
    return out
