import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from burstwatch.features import (ALPHA, BASE_DIM, FEATURE_NAMES, NormalizationStats,
                                 PrototypeIndex, PrototypePool, StageArtifacts, StageRow,
                                 assemble, build_top_gram_table, featurize_stream,
                                 schema_document, similarity)
from burstwatch.features.base import (CycleAccumulator, FeatureContractError,
                                      RetweetMentionNetwork, content_features, dormancy_features,
                                      hashtag_features, meme_features, network_features,
                                      passivity, user_features)
from burstwatch.features.prototypes import SchemaMismatchError, prototype_features
from burstwatch.features.series import (ConfigurationError, SaxConfig, extract_3grams,
                                        gaussian_breakpoints, paa, polyfit, sax_encode,
                                        top_gram_features, ts_derivative_features)
from burstwatch.ingest import HashtagOccurrence, TweetRecord, parse_tweet
from burstwatch.lifecycle import CycleRecord

from oracles import (derivative_oracle, graph_oracle, paa_oracle, polyfit_oracle,
                     prototype_oracle, similarity_oracle, three_grams_oracle)


def tweet(tid, author, minute, tags=("x",), retweet_of=None, mentions=(), followers=10,
          created=0, statuses=0, url=False, special=False, happy=0, sad=0, words=()):
    return TweetRecord(tid, author, minute * 60, "", retweet_of, list(mentions), followers,
                       created, statuses, [HashtagOccurrence(t.lower(), t) for t in tags],
                       url, special, happy, sad, list(words))


# ---- meme / user / content -----------------------------------------------------

def test_meme_ratios():
    acc = CycleAccumulator("x")
    for i in range(100):
        acc.add(tweet(f"t{i}", f"u{i % 40}", 0, retweet_of="s" if i < 25 else None,
                      mentions=("m",) if i < 10 else (), url=i < 20), "x", {})
    assert meme_features(acc) == [100, 40, 25, 10, 0.2, 0.4, 0.25, 0.1]


def test_meme_single_author_and_no_interactions():
    acc = CycleAccumulator("x")
    for i in range(8):
        acc.add(tweet(f"t{i}", "solo", 0), "x", {})
    f = meme_features(acc)
    assert f[5] == 1 / 8
    assert f[2] == f[3] == f[6] == f[7] == 0


def test_meme_empty_cycle_is_a_contract_violation():
    with pytest.raises(FeatureContractError):
        meme_features(CycleAccumulator("x"))


def test_user_totals_and_passivity():
    acc = CycleAccumulator("x")
    for i, f in enumerate((100, 5000, 30)):
        acc.add(tweet(f"t{i}", f"u{i}", 0, followers=f), "x", {})
    total, peak, _ = user_features(acc, 0)
    assert (total, peak) == (5130, 5000)
    assert passivity(10, 19) == 0.5
    assert passivity(0, 1000) == 0


def test_user_latest_value_per_adopter():
    acc = CycleAccumulator("x")
    acc.add(tweet("a", "u", 0, followers=10), "x", {})
    acc.add(tweet("b", "u", 1, followers=12), "x", {})
    assert user_features(acc, 1)[:2] == [12, 12]


def test_user_passivity_uses_whole_days_at_prediction_minute():
    acc = CycleAccumulator("x")
    acc.add(tweet("a", "u", 0, created=0, statuses=19), "x", {})
    assert user_features(acc, 10 * 1440 + 1439)[2] == 10 / 20


def test_content_averages():
    acc = CycleAccumulator("x")
    lex = {"good": (1.0, 0.0), "bad": (0.0, 0.5)}
    acc.add(tweet("a", "u", 0, words=["good"] * 4 + ["bad"] * 4, special=True), "x", lex)
    acc.add(tweet("b", "u", 0, happy=2, special=True), "x", lex)
    acc.add(tweet("c", "u", 0, sad=1, special=True), "x", lex)
    assert content_features(acc) == [3, 0.5, 0.25, 1, 1]


def test_content_no_lexicon_hits():
    acc = CycleAccumulator("x")
    acc.add(tweet("a", "u", 0, words=["zzz"]), "x", {"good": (1.0, 0.0)})
    assert content_features(acc)[1:3] == [0.0, 0.0]


# ---- network -------------------------------------------------------------------

def test_network_complete_directed_triangle():
    g = RetweetMentionNetwork()
    for a in "abc":
        for b in "abc":
            g.add_edge(a, b)
    assert network_features(g)[1] == 1.0


def test_network_average_degree_and_uniform_entropy():
    g = RetweetMentionNetwork()
    for a, b in (("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")):
        g.add_edge(a, b)
    v, _, avg, ent = network_features(g)
    assert (v, avg, ent) == (4, 2.0, 0.0)


def test_network_degenerate():
    g = RetweetMentionNetwork()
    g.add_vertex("a")
    g.add_edge("a", "a")
    assert network_features(g) == [1.0, 0.0, 0.0, 0.0]


@given(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), max_size=60),
       st.sets(st.integers(0, 12)))
def test_network_matches_oracle_and_bounds(edges, isolated):
    g = RetweetMentionNetwork()
    for v in isolated:
        g.add_vertex(v)
    for a, b in edges:
        g.add_edge(a, b)
    got = network_features(g)
    want = graph_oracle(isolated, edges)
    assert got == pytest.approx(want, abs=1e-12)
    v = got[0]
    assert 0 <= got[1] <= 1
    assert 0 <= got[2] <= max(0.0, 2 * (v - 1))
    assert 0 <= got[3] <= (math.log(v) if v > 0 else 0) + 1e-12


# ---- hashtag / dormancy --------------------------------------------------------

def test_hashtag_length_variants_and_cooccurrence():
    acc = CycleAccumulator("3peopleulove")
    for i, s in enumerate(("3peopleulove", "3PeopleuLove", "3PeopleULove", "3PeopleULove")):
        acc.add(tweet(f"t{i}", "u", 0, tags=(s,)), s, {})
    assert hashtag_features(acc) == [12, 3, 0]


def test_hashtag_cooccurrence_counts_both_tags():
    tw = parse_tweet('{"id":"1","ts":60,"user":{"id":"u","followers":1,"created_at":0,'
                     '"statuses":1},"text":"#boston #explosion"}')
    for key in ("boston", "explosion"):
        acc = CycleAccumulator(key)
        acc.add(tw, key, {})
        assert hashtag_features(acc)[2] == 1


def test_dormancy():
    assert dormancy_features(100, 250, 255, None) == [150, 0]
    assert dormancy_features(246, 250, 260, 255) == [4, 5]
    assert dormancy_features(246, 250, 252, 255) == [4, 0]


# ---- derivative ----------------------------------------------------------------

def test_derivative_worked_example():
    f = ts_derivative_features([1, 3, 2, 5])
    mean_fod, last_fod, max_fod, balance = f[6], f[8], f[9], f[10]
    assert (mean_fod, last_fod, max_fod, balance) == (2.0, 3, 3, 1)
    assert f[2:6] == [4, 0, 4, 3]


def test_derivative_constant_and_single_point():
    f = ts_derivative_features([5, 5, 5])
    assert f[:2] == [5, 0] and f[2:5] == [0, 0, 0] and f[10] == 2
    assert ts_derivative_features([7]) == [7, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]


def test_derivative_increasing_min_is_first():
    f = ts_derivative_features([2, 4, 9, 11])
    assert f[4] == f[2] == 9


def test_derivative_matches_oracle_on_random_series():
    rng = np.random.default_rng(7)
    integer_slots = [2, 3, 4, 5, 8, 9, 10]
    for _ in range(1000):
        s = rng.integers(0, 200, size=int(rng.integers(1, 501)))
        got = ts_derivative_features(s)
        want = derivative_oracle(s)
        for i in integer_slots:
            assert got[i] == want[i]
        for i in (0, 1, 6, 7):
            assert abs(got[i] - want[i]) <= 1e-9


# ---- polynomial ----------------------------------------------------------------

def test_polyfit_constant_and_line():
    assert polyfit([5] * 9).coeffs == pytest.approx([5, 0, 0, 0, 0, 0, 0], abs=1e-9)
    fit = polyfit([2 * x + 1 for x in range(6)])
    assert fit.coeffs[:2] == pytest.approx([1, 2], abs=1e-9)
    assert fit.beta == 5


def test_polyfit_order_rule_and_padding():
    assert polyfit([3]).beta == 0
    assert polyfit([3, 4, 1]).beta == 2
    assert polyfit(list(range(30))).beta == 6
    assert polyfit([1, 4, 2]).coeffs[3:] == (0.0, 0.0, 0.0, 0.0)


def test_polyfit_matches_exact_normal_equations():
    rng = np.random.default_rng(3)
    for n in (2, 5, 10, 31, 361):
        y = rng.integers(0, 100, size=n)
        fit = polyfit(y)
        u_coeffs = polyfit_oracle(y, fit.beta)
        x = np.arange(n)
        want = np.array([float(sum(w * Fraction(i, max(n - 1, 1)) ** k
                                   for k, w in enumerate(u_coeffs))) for i in range(n)])
        got = fit.evaluate(x)
        assert np.allclose(got, want, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(want).max()))


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=7))
def test_polyfit_interpolates_short_series(y):
    fit = polyfit(y)
    got = fit.evaluate(np.arange(len(y)))
    assert np.allclose(got, y, rtol=1e-6, atol=1e-6 * max(1, max(abs(v) for v in y)))


# ---- SAX and grams -------------------------------------------------------------

def test_sax_constant_series_uses_lower_middle_symbol():
    assert sax_encode([4] * 20) == "CCCCCCCC"


def test_sax_increasing_is_nondecreasing():
    word = sax_encode(list(range(100)))
    assert list(word) == sorted(word) and word[0] == "A" and word[-1] == "F"


def test_sax_short_series_one_symbol_per_point():
    assert len(sax_encode([1, 5, 2])) == 3


def test_sax_matches_brute_force():
    rng = np.random.default_rng(11)
    bps = gaussian_breakpoints(6)
    for n in (8, 13, 40, 361):
        x = rng.normal(size=n).cumsum()
        z = (x - x.mean()) / x.std()
        means = paa_oracle(z, 8)
        want = "".join("ABCDEF"[sum(1 for b in bps if m >= b)] for m in means)
        assert sax_encode(x) == want


def test_paa_matches_fractional_oracle():
    rng = np.random.default_rng(5)
    for n in range(1, 40):
        x = rng.integers(0, 9, size=n)
        assert np.allclose(paa(x, 8), paa_oracle(x, 8))


def test_sax_config_validation():
    with pytest.raises(ConfigurationError):
        SaxConfig(alphabet_size=11)
    with pytest.raises(ConfigurationError):
        SaxConfig(paa_segments=2)


def test_three_grams_examples():
    assert extract_3grams("ACBF") == {"ACF", "ABF", "CBF"}
    assert extract_3grams("AAAB") == {"AAB"}
    assert extract_3grams("AB") == frozenset()


@given(st.text(alphabet="ABCDEF", max_size=12))
def test_three_grams_properties(word):
    grams = extract_3grams(word)
    assert grams == three_grams_oracle(word)
    assert len(grams) <= math.comb(max(len(word) - 1, 0), 2)
    assert all(g[-1] == word[-1] for g in grams)


def test_top_gram_ranking_and_indicators():
    table = build_top_gram_table([{"ABF", "ACF"}, {"ABF"}, {"ABF", "ACF"}, {"CDF"}], top=2)
    assert table == ("ABF", "ACF")
    top = ("ABF", "ACF", "CBF", "BCF", "DEF")
    assert top_gram_features(set(top) | {"AAF"}, top) == [1.0] * 5
    assert top_gram_features({"FFF"}, top) == [0.0] * 5
    with pytest.raises(ConfigurationError):
        top_gram_features({"ABF"}, None)


# ---- similarity and prototypes -------------------------------------------------

def test_similarity_examples():
    a = np.zeros(BASE_DIM)
    b = a.copy()
    b[:2] = (3, 4)
    assert similarity(a, a) == 1.0
    assert similarity(a, b) == pytest.approx(1 / 6)
    with pytest.raises(SchemaMismatchError):
        similarity(a, a[:-1])


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6),
       st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6))
def test_similarity_symmetric_and_bounded(a, b):
    s = similarity(a, b)
    assert s == similarity(b, a)
    assert 0 < s <= 1
    assert s == pytest.approx(similarity_oracle(a, b))


def _pool(rows):
    pool = PrototypePool.build(rows)
    pool.normalized = pool.raw
    return pool


def test_prototype_weighted_average_example():
    q = np.zeros(BASE_DIM)
    far = np.zeros(BASE_DIM)
    far[0] = 1.0
    f = prototype_features(q, _pool([("a", 0, q, 10.0), ("b", 0, far, 40.0)]), "tbb")
    assert f[1] == pytest.approx((10 + 20) / 1.5)
    assert f[2:] == [f[1]] * 8


def test_prototype_burst_counts():
    q = np.zeros(BASE_DIM)
    rows = []
    for i, flag in enumerate((1, 0, 1)):
        v = np.zeros(BASE_DIM)
        v[0] = i
        rows.append((f"k{i}", 0, v, flag))
    assert prototype_features(q, _pool(rows), "burst")[:3] == [1, 1, 2]


def test_prototypes_match_exhaustive_sort():
    rng = np.random.default_rng(2)
    for task in ("burst", "tbb", "tra"):
        rows = []
        for i in range(50):
            vec = rng.integers(0, 3, size=BASE_DIM).astype(float)   # coarse grid forces ties
            val = float(rng.integers(0, 2)) if task == "burst" else float(rng.integers(1, 500))
            rows.append((f"h{i:02d}", int(rng.integers(0, 2)), vec, val))
        pool = _pool(rows)
        for _ in range(20):
            q = rng.integers(0, 3, size=BASE_DIM).astype(float)
            got = prototype_features(q, pool, task)
            assert got == pytest.approx(prototype_oracle(q, rows, task), abs=1e-12)


def test_normalization_passes_constant_features_as_zero():
    X = np.ones((4, BASE_DIM))
    X[:, 0] = [1, 2, 3, 4]
    stats = NormalizationStats.fit(X)
    Z = stats.apply(X)
    assert np.all(Z[:, 1:] == 0) and Z[:, 0].std() == pytest.approx(1)
    rt = NormalizationStats.from_dict(stats.to_dict())
    assert np.array_equal(rt.apply(X), Z)


# ---- stream snapshots and assembly ---------------------------------------------

def _cycle(trigger=10, burst=12):
    return CycleRecord("x", 0, first_seen=8, trigger=trigger, c1=5, threshold=10, burst=burst)


def test_featurize_stream_window_and_retweet_resolution():
    tws = [tweet("old", "a", 8),                          # before s: ignored
           tweet("s1", "a", 10),
           tweet("r1", "b", 11, retweet_of="s1"),         # resolves to a -> b
           tweet("r2", "c", 12, retweet_of="old"),        # source outside the window
           tweet("late", "d", 16)]                        # after the 5 minute stage
    rows = featurize_stream(tws, [_cycle()], {}, stages=(5, 15), end_minute=40)
    assert [(r.stage, r.t_p) for r in rows] == [(5, 15), (15, 25)]
    first = rows[0].base
    assert first[0] == 3                                  # tweets at minutes 10..15
    assert first[16:20].tolist() == [3, 1 / 6, 2 / 3, pytest.approx(-(1 / 3) * math.log(1 / 3) - (2 / 3) * math.log(2 / 3))]
    assert rows[1].base[0] == 4
    assert first[23:25].tolist() == [2, 3]               # dormant 2, bursting since 12
    series_mean = first[BASE_DIM - 11]
    assert series_mean == pytest.approx(3 / 6)


def test_featurize_skips_stages_past_stream_end():
    rows = featurize_stream([tweet("s1", "a", 10)], [_cycle()], {}, stages=(5, 15), end_minute=20)
    assert [r.stage for r in rows] == [5]


def test_featurize_rejects_unordered_stream():
    with pytest.raises(ValueError):
        featurize_stream([tweet("a", "a", 12), tweet("b", "a", 11)], [_cycle()], {}, stages=(5,))


def _row(base, sax="ACBDEF", burst=None, negative=True):
    return StageRow("x", 0, 5, 15, 10, burst, None, negative, np.asarray(base, float), sax)


def test_assemble_layout_and_determinism():
    rng = np.random.default_rng(0)
    hist = [("h%d" % i, 0, rng.normal(size=BASE_DIM), float(i % 2)) for i in range(12)]
    stats = NormalizationStats.fit([h[2] for h in hist])
    index = PrototypeIndex(stats, {"burst": PrototypePool.build(hist)})
    art = StageArtifacts(("ABF", "CDF", "ZZZ"), index)
    row = _row(rng.normal(size=BASE_DIM))
    a = assemble(row, "burst", art)
    b = assemble(row, "burst", art)
    assert a.values.shape == (ALPHA,) and ALPHA == 58
    assert np.array_equal(a.values, b.values) and np.all(np.isfinite(a.values))
    assert a.stage_tag == "5min"
    assert a.values[BASE_DIM:BASE_DIM + 5].tolist() == [1, 1, 0, 0, 0]
    doc = schema_document()
    assert [f["name"] for f in doc["features"]] == list(FEATURE_NAMES)
    assert len(doc["features"]) == 58


def test_stage_row_targets():
    r = _row(np.zeros(BASE_DIM), burst=40, negative=False)
    assert r.label == 1 and r.tbb == 25 and r.tra is None and r.task1_eligible
    done = StageRow("x", 0, 60, 70, 10, 40, 100, False, np.zeros(BASE_DIM), "")
    assert done.tbb is None and done.tra == 30 and not done.task1_eligible
    neg = _row(np.zeros(BASE_DIM))
    assert neg.label == 0 and neg.target("tbb") is None
