"""Parsing of the line-delimited tweet stream and per-tweet text signals."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

HASHTAG_RE = re.compile(r"#(\w+)")
MENTION_RE = re.compile(r"@(\w+)")
WORD_RE = re.compile(r"[^\W\d_]+")
# a letter, '!' or '?' repeated at least three times in a row
SPECIAL_RE = re.compile(r"([^\W\d_]|[!?])\1\1")


class ParseError(ValueError):
    """A single stream record could not be parsed."""

    def __init__(self, line_number: int | None, reason: str):
        self.line_number = line_number
        self.reason = reason
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{reason}")


@dataclass(frozen=True, slots=True)
class HashtagOccurrence:
    key: str
    surface: str


@dataclass(slots=True)
class TweetRecord:
    tweet_id: str
    author_id: str
    timestamp: int
    text: str
    retweet_of: str | None
    explicit_mentions: list[str]
    author_followers: int
    author_account_created: int
    author_statuses_count: int
    hashtags: list[HashtagOccurrence]
    urls_present: bool
    special_signal: bool
    happy_emoticons: int
    sad_emoticons: int
    word_tokens: list[str] = field(default_factory=list)

    @property
    def minute(self) -> int:
        return self.timestamp // 60


@dataclass(frozen=True)
class EmoticonLexicon:
    happy: frozenset[str]
    sad: frozenset[str]

    def __post_init__(self):
        tokens = sorted(self.happy | self.sad, key=lambda t: (-len(t), t))
        # alternation tried longest first: a left-to-right, longest-match scan
        pattern = re.compile("|".join(re.escape(t) for t in tokens)) if tokens else None
        object.__setattr__(self, "_pattern", pattern)


def load_emoticon_lexicon(path: str | Path | None = None) -> EmoticonLexicon:
    """Read an emoticon file with ``[happy]`` and ``[sad]`` sections."""
    text = _read_text(path, "emoticons.txt")
    sections: dict[str, set[str]] = {"happy": set(), "sad": set()}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]") and line[1:-1] in sections:
            current = line[1:-1]
            continue
        if current is None:
            raise ValueError(f"emoticon token {line!r} outside a section")
        if any(ch.isspace() for ch in line):
            raise ValueError(f"emoticon token {line!r} contains whitespace")
        sections[current].add(line)
    return EmoticonLexicon(frozenset(sections["happy"]), frozenset(sections["sad"]))


def load_sentiment_lexicon(path: str | Path | None = None) -> dict[str, tuple[float, float]]:
    """Read a ``word<TAB>pos<TAB>neg`` file into a word -> (pos, neg) mapping."""
    text = _read_text(path, "sentiment.tsv")
    lexicon: dict[str, tuple[float, float]] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.rstrip("\n").split("\t")
        if len(parts) != 3:
            raise ValueError(f"sentiment lexicon line {n}: expected 3 tab-separated fields")
        pos, neg = float(parts[1]), float(parts[2])
        if not (0.0 <= pos <= 1.0 and 0.0 <= neg <= 1.0):
            raise ValueError(f"sentiment lexicon line {n}: scores must lie in [0, 1]")
        lexicon[parts[0].casefold()] = (pos, neg)
    return lexicon


def _read_text(path, bundled_name):
    if path is None:
        return resources.files("burstwatch").joinpath("data").joinpath(bundled_name).read_text("utf-8")
    return Path(path).read_text("utf-8")


_DEFAULT_EMOTICONS: EmoticonLexicon | None = None


def default_emoticons() -> EmoticonLexicon:
    global _DEFAULT_EMOTICONS
    if _DEFAULT_EMOTICONS is None:
        _DEFAULT_EMOTICONS = load_emoticon_lexicon()
    return _DEFAULT_EMOTICONS


def detect_special_signal(text: str) -> bool:
    return SPECIAL_RE.search(text) is not None


def count_emoticons(text: str, lexicon: EmoticonLexicon) -> tuple[int, int]:
    """Count happy and sad emoticons, longest match first, scanning left to right."""
    if lexicon._pattern is None:
        return 0, 0
    happy = sad = 0
    for piece in lexicon._pattern.findall(text):
        if piece in lexicon.happy:
            happy += 1
        else:
            sad += 1
    return happy, sad


def score_sentiment(word_tokens: Iterable[str], lexicon: dict[str, tuple[float, float]]):
    """Sum positive and negative word scores over lexicon hits."""
    pos = neg = 0.0
    hits = 0
    for token in word_tokens:
        scores = lexicon.get(token)
        if scores is not None:
            pos += scores[0]
            neg += scores[1]
            hits += 1
    return pos, neg, hits


def extract_hashtags(text: str) -> list[HashtagOccurrence]:
    seen: dict[str, HashtagOccurrence] = {}
    for surface in HASHTAG_RE.findall(text):
        key = surface.casefold()
        if key not in seen:
            seen[key] = HashtagOccurrence(key, surface)
    return list(seen.values())


def has_url(text: str) -> bool:
    if "http" not in text:
        return False
    return any(tok.startswith(("http://", "https://")) for tok in text.split())


def _require(obj, name, kind, line_number):
    try:
        value = obj[name]
    except (KeyError, TypeError):
        raise ParseError(line_number, f"missing field {name!r}") from None
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(line_number, f"field {name!r} must be an integer")
    elif not isinstance(value, kind):
        raise ParseError(line_number, f"field {name!r} must be {kind.__name__}")
    return value


def parse_tweet(line: str, line_number: int | None = None,
                emoticons: EmoticonLexicon | None = None) -> TweetRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(line_number, f"malformed JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ParseError(line_number, "record is not a JSON object")
    tweet_id = _require(obj, "id", str, line_number)
    ts = _require(obj, "ts", int, line_number)
    user = _require(obj, "user", dict, line_number)
    text = _require(obj, "text", str, line_number)
    author = _require(user, "id", str, line_number)
    followers = _require(user, "followers", int, line_number)
    created = _require(user, "created_at", int, line_number)
    statuses = _require(user, "statuses", int, line_number)
    if ts <= 0:
        raise ParseError(line_number, "timestamp must be positive")
    if created > ts:
        raise ParseError(line_number, "account created after the tweet")
    if followers < 0 or statuses < 0:
        raise ParseError(line_number, "negative user counters")

    retweet_of = obj.get("retweet_of")
    if retweet_of is not None and not isinstance(retweet_of, str):
        raise ParseError(line_number, "field 'retweet_of' must be a string")
    mentions = obj.get("mentions")
    if mentions is None:
        mentions = MENTION_RE.findall(text)
    elif not isinstance(mentions, list) or not all(isinstance(m, str) for m in mentions):
        raise ParseError(line_number, "field 'mentions' must be a list of strings")

    words = [w.casefold() for w in WORD_RE.findall(text)]
    happy, sad = count_emoticons(text, emoticons or default_emoticons())
    return TweetRecord(
        tweet_id=tweet_id,
        author_id=author,
        timestamp=ts,
        text=text,
        retweet_of=retweet_of,
        explicit_mentions=list(mentions),
        author_followers=followers,
        author_account_created=created,
        author_statuses_count=statuses,
        hashtags=extract_hashtags(text),
        urls_present=has_url(text),
        special_signal=SPECIAL_RE.search(text) is not None,
        happy_emoticons=happy,
        sad_emoticons=sad,
        word_tokens=words,
    )


def read_stream(path: str | Path, errors: list | None = None,
                emoticons: EmoticonLexicon | None = None) -> Iterator[TweetRecord]:
    """Yield records from a JSONL file; bad lines go to ``errors`` and are skipped."""
    with open(path, encoding="utf-8") as fh:
        yield from parse_lines(fh, errors=errors, emoticons=emoticons)


def parse_lines(lines: Iterable[str], errors: list | None = None,
                emoticons: EmoticonLexicon | None = None) -> Iterator[TweetRecord]:
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_tweet(line, n, emoticons)
        except ParseError as exc:
            if errors is None:
                raise
            errors.append(exc)
