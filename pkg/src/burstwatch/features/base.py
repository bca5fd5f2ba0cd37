"""Per-cycle accumulators and the meme, user, content, network, hashtag and
dormancy feature families."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from ..ingest import TweetRecord, score_sentiment

SECONDS_PER_DAY = 86400


class FeatureContractError(ValueError):
    pass


@dataclass
class RetweetMentionNetwork:
    vertices: set = field(default_factory=set)
    edges: set = field(default_factory=set)

    def add_vertex(self, user):
        self.vertices.add(user)

    def add_edge(self, src, dst):
        self.vertices.add(src)
        self.vertices.add(dst)
        if src != dst:
            self.edges.add((src, dst))

    def copy(self):
        return RetweetMentionNetwork(set(self.vertices), set(self.edges))


@dataclass
class Adopter:
    followers: int
    account_created: int
    statuses: int


@dataclass
class CycleAccumulator:
    """Everything the non-series families need, gathered tweet by tweet."""

    key: str
    tweet_count: int = 0
    retweet_count: int = 0
    mention_count: int = 0
    url_tweets: int = 0
    special_tweets: int = 0
    happy_tweets: int = 0
    sad_tweets: int = 0
    pos_sum: float = 0.0
    neg_sum: float = 0.0
    scored_words: int = 0
    cooccurrence_tweets: int = 0
    adopters: dict = field(default_factory=dict)
    surfaces: set = field(default_factory=set)
    graph: RetweetMentionNetwork = field(default_factory=RetweetMentionNetwork)
    minute_counts: Counter = field(default_factory=Counter)

    def add(self, tweet: TweetRecord, surface: str, sentiment: dict,
            source_author: str | None = None) -> None:
        self.tweet_count += 1
        self.minute_counts[tweet.timestamp // 60] += 1
        author = tweet.author_id
        self.adopters[author] = Adopter(tweet.author_followers, tweet.author_account_created,
                                        tweet.author_statuses_count)
        self.surfaces.add(surface)
        if tweet.retweet_of is not None:
            self.retweet_count += 1
        self.mention_count += len(tweet.explicit_mentions)
        self.url_tweets += tweet.urls_present
        self.special_tweets += tweet.special_signal
        self.happy_tweets += tweet.happy_emoticons > 0
        self.sad_tweets += tweet.sad_emoticons > 0
        pos, neg, hits = score_sentiment(tweet.word_tokens, sentiment)
        self.pos_sum += pos
        self.neg_sum += neg
        self.scored_words += hits
        if len(tweet.hashtags) > 1:
            self.cooccurrence_tweets += 1
        g = self.graph
        g.add_vertex(author)
        if source_author is not None:
            g.add_edge(source_author, author)
        for target in tweet.explicit_mentions:
            g.add_edge(author, target)

    @property
    def author_count(self) -> int:
        return len(self.adopters)


def meme_features(acc: CycleAccumulator) -> list[float]:
    n = acc.tweet_count
    if n == 0:
        raise FeatureContractError(f"{acc.key}: no tweets in the cycle window")
    authors = acc.author_count
    return [float(n), float(authors), float(acc.retweet_count), float(acc.mention_count),
            acc.url_tweets / n, authors / n, acc.retweet_count / n, acc.mention_count / n]


def passivity(account_age_days: int, statuses: int) -> float:
    return account_age_days / (1.0 + statuses)


def account_age_days(created: int, at_minute: int) -> int:
    return max(at_minute * 60 - created, 0) // SECONDS_PER_DAY


def user_features(acc: CycleAccumulator, t_p: int) -> list[float]:
    if not acc.adopters:
        return [0.0, 0.0, 0.0]
    total = 0
    peak = 0
    psv = 0.0
    for user in sorted(acc.adopters):
        a = acc.adopters[user]
        total += a.followers
        peak = max(peak, a.followers)
        psv += passivity(account_age_days(a.account_created, t_p), a.statuses)
    return [float(total), float(peak), psv / len(acc.adopters)]


def content_features(acc: CycleAccumulator) -> list[float]:
    if acc.scored_words:
        avg_pos = acc.pos_sum / acc.scored_words
        avg_neg = acc.neg_sum / acc.scored_words
    else:
        avg_pos = avg_neg = 0.0
    return [float(acc.special_tweets), avg_pos, avg_neg,
            float(acc.happy_tweets), float(acc.sad_tweets)]


def network_features(graph: RetweetMentionNetwork) -> list[float]:
    v = len(graph.vertices)
    e = len(graph.edges)
    if v <= 1:
        return [float(v), 0.0, 0.0, 0.0]
    density = e / (v * (v - 1))
    avg_degree = 2.0 * e / v
    degree = Counter()
    for src, dst in graph.edges:
        degree[src] += 1
        degree[dst] += 1
    freq = Counter(degree[u] for u in graph.vertices)
    entropy = 0.0
    for k in sorted(freq):
        p = freq[k] / v
        entropy -= p * math.log(p)
    return [float(v), density, avg_degree, entropy]


def hashtag_features(acc: CycleAccumulator) -> list[float]:
    return [float(len(acc.key)), float(len(acc.surfaces)), float(acc.cooccurrence_tweets)]


def dormancy_features(first_seen: int, trigger: int, t_p: int, burst: int | None) -> list[float]:
    bursting = t_p - burst if burst is not None and burst <= t_p else 0
    return [float(trigger - first_seen), float(bursting)]
