"""Named, ordered layout of the prediction feature vector."""

SCHEMA_VERSION = 1

FAMILIES = (
    ("meme", ("tweet_count", "author_count", "retweet_count", "mention_count",
              "url_ratio", "author_ratio", "retweet_ratio", "mention_ratio")),
    ("user", ("total_followers", "max_followers", "mean_passivity")),
    ("content", ("special_signal_tweets", "avg_pos_score", "avg_neg_score",
                 "happy_emoticon_tweets", "sad_emoticon_tweets")),
    ("network", ("graph_order", "graph_density", "graph_avg_degree", "degree_entropy")),
    ("hashtag", ("hashtag_length", "case_variant_count", "cooccurrence_tweets")),
    ("dormancy", ("dormant_minutes", "bursting_minutes")),
    ("poly", tuple(f"poly_w{k}" for k in range(7))),
    ("derivative", ("mean_value", "std_value", "d_last_first", "d_last_max", "d_last_min",
                    "idx_max", "mean_fod", "std_fod", "last_fod", "max_fod", "d_pfod_nfod")),
    ("top_gram", tuple(f"top_gram_{k}" for k in range(1, 6))),
    ("prototype", tuple(f"proto_k{k}" for k in range(1, 11))),
)

FEATURE_NAMES = tuple(name for _, names in FAMILIES for name in names)
FEATURE_FAMILY = {name: fam for fam, names in FAMILIES for name in names}
ALPHA = len(FEATURE_NAMES)

# Everything before the symbolic and prototype families enters the similarity.
BASE_NAMES = FEATURE_NAMES[:FEATURE_NAMES.index("top_gram_1")]
BASE_DIM = len(BASE_NAMES)
TOP_GRAM_SLICE = slice(BASE_DIM, BASE_DIM + 5)
PROTOTYPE_SLICE = slice(BASE_DIM + 5, ALPHA)

STAGES = {"5min": 5, "15min": 15, "30min": 30, "1h": 60, "3h": 180, "6h": 360}


def stage_tag(offset_minutes: int) -> str:
    for tag, minutes in STAGES.items():
        if minutes == offset_minutes:
            return tag
    if offset_minutes % 60 == 0:
        return f"{offset_minutes // 60}h"
    return f"{offset_minutes}min"


def schema_document() -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "alpha": ALPHA,
        "features": [{"index": i, "name": n, "family": FEATURE_FAMILY[n]}
                     for i, n in enumerate(FEATURE_NAMES)],
    }
