"""Corpus loading, normalization, deduplication, and balanced splitting.

Input corpora are UTF-8 JSONL, one post per line:

    {"id": str, "text": str, "label": "pos"|"neg"|null,
     "lang": str, "timestamp": RFC3339 str (optional), "corpus": str (optional)}

Normalization lowercases, maps URLs / @-mentions / #-hashtags to the
placeholder tokens ``<url>`` / ``<user>`` / ``<hashtag>``, and collapses
whitespace. Emojis and punctuation pass through untouched; no Unicode
canonical folding is applied. Cashtags ($BTC) are preserved verbatim.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Optional

import regex

from .errors import InputError
from .rng import Xoshiro256, derive_seed, hash_tag

POSITIVE = "positive"
NEGATIVE = "negative"
UNLABELED = "unlabeled"

_LABEL_IN = {"pos": POSITIVE, "neg": NEGATIVE, None: UNLABELED}
_LABEL_OUT = {POSITIVE: "pos", NEGATIVE: "neg", UNLABELED: None}

# Replacement patterns must never consume emoji-relevant codepoints, so that
# normalization cannot create or destroy emoji tokens. URL bodies therefore
# stop at pictographs/regional indicators/ZWJ/VS/keycap marks/skin tones, and
# mention/hashtag matches back off a trailing character that would otherwise
# steal the base of a keycap sequence.
_EMOJIISH = (
    r"\s\p{Extended_Pictographic}\p{Regional_Indicator}"
    r"︎️⃣‍\U0001F3FB-\U0001F3FF"
)
_URL_RE = regex.compile(rf"(?:https?://|www\.)[^{_EMOJIISH}]+(?=[^︎️⃣]|$)")
_MENTION_RE = regex.compile(r"@[A-Za-z0-9_]+(?=[^︎️⃣]|$)")
# [^\W...]: word characters minus the emoji-relevant marks (VS15/16, the
# combining keycap, ZWJ), which the regex module's \w would otherwise include.
_HASHTAG_RE = regex.compile(
    r"#[^\W︎️⃣‍]+(?=[^︎️⃣]|$)"
)
_WS_RE = regex.compile(r"\s+")


@dataclass(frozen=True)
class Post:
    """One microblog message in canonical form."""

    id: str
    raw_text: str
    text: str
    label: str = UNLABELED
    lang: str = "und"
    timestamp: Optional[datetime] = None
    corpus: str = ""

    def quarter(self) -> Optional[str]:
        """Calendar quarter tag like ``2021Q3``, or None without timestamp."""
        if self.timestamp is None:
            return None
        return f"{self.timestamp.year}Q{(self.timestamp.month - 1) // 3 + 1}"


@dataclass
class ParseReport:
    """Per-file parse outcome: warnings carry (line_no, message) pairs."""

    n_lines: int = 0
    n_posts: int = 0
    warnings: list = field(default_factory=list)


def normalize_text(raw: str) -> str:
    """Lowercase; URLs, mentions, hashtags to placeholders; collapse spaces."""
    s = raw.lower()
    s = _URL_RE.sub("<url>", s)
    s = _MENTION_RE.sub("<user>", s)
    s = _HASHTAG_RE.sub("<hashtag>", s)
    return _WS_RE.sub(" ", s).strip()


def _parse_timestamp(value: str, line_no: int) -> datetime:
    text = value.replace("Z", "+00:00") if value.endswith("Z") else value
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise InputError(f"line {line_no}: bad timestamp {value!r}: {exc}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_posts(
    stream: Iterable[str] | IO[str],
    corpus: str = "",
    strict: bool = True,
) -> tuple[list[Post], ParseReport]:
    """Parse JSONL posts, preserving input order.

    With ``strict`` every malformed line raises InputError; otherwise
    malformed lines are skipped and reported in the returned ParseReport.
    Duplicate ids are an error in either mode (both lines are named).
    """
    posts: list[Post] = []
    report = ParseReport()
    seen: dict[str, int] = {}

    def fail(line_no: int, message: str) -> None:
        if strict:
            raise InputError(f"line {line_no}: {message}")
        report.warnings.append((line_no, message))

    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        report.n_lines += 1
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            fail(line_no, f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(record, dict):
            fail(line_no, "record is not an object")
            continue
        missing = [k for k in ("id", "text") if k not in record or record[k] is None]
        if missing:
            fail(line_no, f"missing field(s): {', '.join(missing)}")
            continue
        post_id = str(record["id"])
        if not post_id:
            fail(line_no, "empty id")
            continue
        if post_id in seen:
            raise InputError(
                f"duplicate id {post_id!r} on lines {seen[post_id]} and {line_no}"
            )
        label = record.get("label")
        if label not in _LABEL_IN:
            fail(line_no, f"unknown label {label!r}")
            continue
        raw_text = str(record["text"])
        ts = None
        if record.get("timestamp") is not None:
            try:
                ts = _parse_timestamp(str(record["timestamp"]), line_no)
            except InputError as exc:
                if strict:
                    raise
                report.warnings.append((line_no, str(exc)))
                continue
        seen[post_id] = line_no
        posts.append(
            Post(
                id=post_id,
                raw_text=raw_text,
                text=normalize_text(raw_text),
                label=_LABEL_IN[label],
                lang=str(record.get("lang", "und")),
                timestamp=ts,
                corpus=str(record.get("corpus", corpus)),
            )
        )
    report.n_posts = len(posts)
    return posts, report


def load_posts(path, strict: bool = True) -> tuple[list[Post], ParseReport]:
    with open(path, encoding="utf-8") as fh:
        return parse_posts(fh, strict=strict)


def post_to_record(post: Post, split: Optional[str] = None) -> dict:
    record = {
        "id": post.id,
        "text": post.raw_text,
        "label": _LABEL_OUT[post.label],
        "lang": post.lang,
    }
    if post.timestamp is not None:
        record["timestamp"] = post.timestamp.isoformat()
    if post.corpus:
        record["corpus"] = post.corpus
    if split is not None:
        record["split"] = split
    return record


def save_posts(posts: Iterable[Post], path, split: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(json.dumps(post_to_record(post, split), ensure_ascii=False))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Deduplication


def _shingles(text: str) -> list[str]:
    tokens = text.split()
    if len(tokens) < 2:
        return tokens
    return [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


def simhash64(text: str) -> int:
    """64-bit SimHash over token 2-shingles of the normalized text."""
    sums = [0] * 64
    for shingle in _shingles(text):
        h = int.from_bytes(
            hashlib.blake2b(shingle.encode("utf-8"), digest_size=8).digest(), "little"
        )
        for bit in range(64):
            sums[bit] += 1 if (h >> bit) & 1 else -1
    value = 0
    for bit in range(64):
        if sums[bit] > 0:
            value |= 1 << bit
    return value


def hamming64(a: int, b: int) -> int:
    return bin(a ^ b).count("1")


def _timestamp_key(post: Post):
    # Missing timestamps sort after any real one; ties resolve by id.
    if post.timestamp is None:
        return (1, datetime.max.replace(tzinfo=timezone.utc), post.id)
    return (0, post.timestamp, post.id)


def dedup(posts: list[Post], hamming_threshold: int = 3) -> list[Post]:
    """Drop exact and near-duplicate posts.

    Exact duplicates (identical normalized text) keep the earliest timestamp
    (then lowest id), placed at the first occurrence's position. Near
    duplicates are then dropped in input order whenever their SimHash is
    within ``hamming_threshold`` bits of an already retained post; candidate
    lookups use (threshold+1)-band bucketing so only colliding bands are
    compared.
    """
    first_pos: dict[str, int] = {}
    best: dict[str, Post] = {}
    order: list[str] = []
    for pos, post in enumerate(posts):
        key = post.text
        if key not in first_pos:
            first_pos[key] = pos
            best[key] = post
            order.append(key)
        elif _timestamp_key(post) < _timestamp_key(best[key]):
            best[key] = post

    n_bands = hamming_threshold + 1
    band_bits = 64 // n_bands
    buckets: dict[tuple[int, int], list[int]] = {}
    kept: list[Post] = []
    kept_hashes: list[int] = []
    for key in order:
        post = best[key]
        h = simhash64(post.text)
        candidates = set()
        bands = []
        for b in range(n_bands):
            lo = b * band_bits
            width = 64 - lo if b == n_bands - 1 else band_bits
            band = (b, (h >> lo) & ((1 << width) - 1))
            bands.append(band)
            candidates.update(buckets.get(band, ()))
        if any(hamming64(h, kept_hashes[i]) <= hamming_threshold for i in candidates):
            continue
        idx = len(kept)
        kept.append(post)
        kept_hashes.append(h)
        for band in bands:
            buckets.setdefault(band, []).append(idx)
    return kept


# ---------------------------------------------------------------------------
# Balanced splitting


@dataclass(frozen=True)
class CorpusSplit:
    """Stratified, class-balanced train/validation/test partition."""

    train: list[Post]
    validation: list[Post]
    test_in: list[Post]
    test_out: Optional[list[Post]]
    seed: int

    def all_splits(self) -> dict[str, list[Post]]:
        out = {"train": self.train, "validation": self.validation, "test": self.test_in}
        if self.test_out is not None:
            out["test_out"] = self.test_out
        return out


def _largest_remainder(total: int, weights: list[int]) -> list[int]:
    """Integer allocation of ``total`` proportional to ``weights``."""
    denom = sum(weights)
    if denom == 0:
        return [0] * len(weights)
    quotas = [total * w / denom for w in weights]
    counts = [int(q) for q in quotas]
    rest = total - sum(counts)
    by_frac = sorted(
        range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in by_frac[:rest]:
        counts[i] += 1
    return counts


def _stratified_take(
    groups: dict[Optional[str], list[Post]], count: int
) -> list[Post]:
    """Pop ``count`` posts across quarter groups, proportional then spill."""
    keys = sorted(groups, key=lambda k: (k is None, k))
    sizes = [len(groups[k]) for k in keys]
    alloc = _largest_remainder(count, sizes)
    alloc = [min(a, s) for a, s in zip(alloc, sizes)]
    short = count - sum(alloc)
    while short > 0:  # spill into whatever quarters still have posts
        room = [(len(groups[k]) - alloc[i], i) for i, k in enumerate(keys)]
        room.sort(key=lambda t: (-t[0], t[1]))
        if room[0][0] <= 0:
            raise InputError("internal: stratified allocation exhausted")
        alloc[room[0][1]] += 1
        short -= 1
    taken = []
    for k, a in zip(keys, alloc):
        taken.extend(groups[k][:a])
        del groups[k][:a]
    return taken


def make_split(
    posts: list[Post],
    sizes: dict[str, int],
    seed: int,
    test_out: Optional[list[Post]] = None,
) -> CorpusSplit:
    """Balance classes by undersampling, then draw stratified splits.

    ``sizes`` maps train/validation/test to total posts per split. Classes
    are balanced first (majority undersampled down to the minority count),
    then each split draws half its size from each class; for odd sizes the
    positive class contributes the extra post. When timestamps are present
    sampling is additionally stratified by calendar quarter. Fully
    deterministic under ``seed``.
    """
    for name in ("train", "validation", "test"):
        if name not in sizes:
            raise InputError(f"sizes missing {name!r}")
        if sizes[name] < 0:
            raise InputError(f"sizes[{name!r}] must be >= 0")

    by_label = {POSITIVE: [], NEGATIVE: []}
    for post in posts:
        if post.label in by_label:
            by_label[post.label].append(post)
    n_pos, n_neg = len(by_label[POSITIVE]), len(by_label[NEGATIVE])
    pool_per_class = min(n_pos, n_neg)

    need = {
        POSITIVE: sum(sizes[s] // 2 + sizes[s] % 2 for s in ("train", "validation", "test")),
        NEGATIVE: sum(sizes[s] // 2 for s in ("train", "validation", "test")),
    }
    for label, needed in need.items():
        if needed > pool_per_class:
            raise InputError(
                f"insufficient posts: need {needed} {label} after balancing, "
                f"have {pool_per_class} (pos={n_pos}, neg={n_neg})"
            )

    split_order = ("train", "validation", "test")
    selected: dict[str, dict[str, list[Post]]] = {s: {} for s in split_order}
    for label in (POSITIVE, NEGATIVE):
        gen = Xoshiro256(derive_seed(seed, hash_tag(f"split:{label}")))
        shuffled = gen.shuffled(by_label[label])
        # Undersample the majority class down to the balanced pool size,
        # stratified by quarter.
        groups: dict[Optional[str], list[Post]] = {}
        for post in shuffled:
            groups.setdefault(post.quarter(), []).append(post)
        pool_groups: dict[Optional[str], list[Post]] = {}
        keys = sorted(groups, key=lambda k: (k is None, k))
        alloc = _largest_remainder(pool_per_class, [len(groups[k]) for k in keys])
        alloc = [min(a, len(groups[k])) for a, k in zip(alloc, keys)]
        short = pool_per_class - sum(alloc)
        for i, k in enumerate(keys):
            if short <= 0:
                break
            extra = min(short, len(groups[k]) - alloc[i])
            alloc[i] += extra
            short -= extra
        for k, a in zip(keys, alloc):
            pool_groups[k] = groups[k][:a]
        half = {POSITIVE: lambda z: z // 2 + z % 2, NEGATIVE: lambda z: z // 2}[label]
        for split_name in split_order:
            selected[split_name][label] = _stratified_take(
                pool_groups, half(sizes[split_name])
            )

    def combine(split_name: str) -> list[Post]:
        merged = selected[split_name][POSITIVE] + selected[split_name][NEGATIVE]
        return sorted(merged, key=lambda p: p.id)

    return CorpusSplit(
        train=combine("train"),
        validation=combine("validation"),
        test_in=combine("test"),
        test_out=test_out,
        seed=seed,
    )
