"""Emoji frequency distributions and cross-corpus similarity metrics.

Distribution comparisons follow one fixed recipe: build each corpus's top-k
emoji distribution, re-express both over the union of the two vocabularies
(renormalizing each side's counts over that union), then score with
Jensen-Shannon distance (base-2 logs, so the range is [0, 1]), total
variation, the Bhattacharyya coefficient, and rank-biased overlap on the two
top-k rank lists. Ranking ties always break by codepoint order so results are
reproducible across implementations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .emoji import extract_emojis
from .errors import InputError, NumericalError
from .ingest import Post


def _codepoint_key(token: str) -> tuple[int, ...]:
    return tuple(ord(c) for c in token)


def rank_emojis(counts: Counter) -> list[str]:
    """Emojis by descending count; ties by ascending codepoint order."""
    return sorted(counts, key=lambda e: (-counts[e], _codepoint_key(e)))


@dataclass(frozen=True)
class FrequencyDistribution:
    vocab: tuple[str, ...]
    counts: np.ndarray  # int64, aligned with vocab
    probs: np.ndarray  # float64, sums to 1 over vocab

    def count_of(self, token: str) -> int:
        try:
            return int(self.counts[self.vocab.index(token)])
        except ValueError:
            return 0


def count_emoji_occurrences(posts: Iterable[Post], zwj_mode: str = "default") -> Counter:
    """Every occurrence counts (repeats within one post included)."""
    counts: Counter = Counter()
    for post in posts:
        counts.update(t.canonical for t in extract_emojis(post.text, zwj_mode))
    return counts


def build_distribution(
    posts: Iterable[Post], top_k: int = 100, zwj_mode: str = "default"
) -> FrequencyDistribution:
    """Top-k emoji distribution of a corpus, probabilities over the top k."""
    if top_k < 1:
        raise InputError("top_k must be >= 1")
    counts = count_emoji_occurrences(posts, zwj_mode)
    if not counts:
        raise InputError("corpus contains no emojis")
    vocab = tuple(rank_emojis(counts)[:top_k])
    arr = np.array([counts[e] for e in vocab], dtype=np.int64)
    return FrequencyDistribution(vocab=vocab, counts=arr, probs=arr / arr.sum())


def align_on_union(
    a: FrequencyDistribution, b: FrequencyDistribution
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Re-express both distributions over the union vocabulary.

    Each side's probabilities are recomputed from its counts restricted to
    the union and renormalized; emojis absent from one corpus get 0.
    """
    if not a.vocab or not b.vocab:
        raise InputError("cannot align empty distributions")
    union = sorted(set(a.vocab) | set(b.vocab), key=_codepoint_key)
    ca = np.array([a.count_of(e) for e in union], dtype=np.float64)
    cb = np.array([b.count_of(e) for e in union], dtype=np.float64)
    if ca.sum() == 0 or cb.sum() == 0:
        raise NumericalError("a distribution has zero mass on the union vocabulary")
    return ca / ca.sum(), cb / cb.sum(), union


def _check_pair(p: Sequence[float], q: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise InputError(f"length mismatch: {p.shape} vs {q.shape}")
    return p, q


def jsd(p: Sequence[float], q: Sequence[float]) -> float:
    """Jensen-Shannon distance: sqrt of the base-2 JS divergence."""
    p, q = _check_pair(p, q)
    m = 0.5 * (p + q)

    def _kl(x: np.ndarray) -> float:
        mask = x > 0
        return float(np.sum(x[mask] * np.log2(x[mask] / m[mask])))

    div = 0.5 * _kl(p) + 0.5 * _kl(q)
    return float(np.sqrt(max(div, 0.0)))


def total_variation(p: Sequence[float], q: Sequence[float]) -> float:
    p, q = _check_pair(p, q)
    return float(0.5 * np.abs(p - q).sum())


def bhattacharyya(p: Sequence[float], q: Sequence[float]) -> float:
    p, q = _check_pair(p, q)
    return float(np.sqrt(p * q).sum())


def rbo(
    rank_a: Sequence[str],
    rank_b: Sequence[str],
    persistence: float = 0.9,
    extrapolate: bool = True,
) -> float:
    """Rank-biased overlap of two equal-length rankings with unique items.

    Extrapolated form: (X_k/k) p^k + ((1-p)/p) sum_d (X_d/d) p^d, where X_d
    is the overlap of the depth-d prefixes. With ``extrapolate=False`` the
    truncated sum (without the X_k/k tail term) is returned.
    """
    if not 0.0 < persistence < 1.0:
        raise InputError("persistence must be in (0, 1)")
    if len(rank_a) != len(rank_b):
        raise InputError(f"rank lists differ in length: {len(rank_a)} vs {len(rank_b)}")
    if len(set(rank_a)) != len(rank_a) or len(set(rank_b)) != len(rank_b):
        raise InputError("rank lists must not contain duplicates")
    k = len(rank_a)
    if k == 0:
        raise InputError("rank lists are empty")
    p = persistence
    seen_a: set = set()
    seen_b: set = set()
    overlap = 0
    acc = 0.0
    for d in range(1, k + 1):
        ea, eb = rank_a[d - 1], rank_b[d - 1]
        if ea == eb:
            overlap += 1
        else:
            if ea in seen_b:
                overlap += 1
            if eb in seen_a:
                overlap += 1
            seen_a.add(ea)
            seen_b.add(eb)
        acc += overlap / d * p**d
    result = (1 - p) / p * acc
    if extrapolate:
        result += overlap / k * p**k
    return float(result)


@dataclass(frozen=True)
class DescriptiveStats:
    n_posts: int
    prevalence: float
    intensity: Optional[float]
    vocab_size: Optional[int]
    effective_n: Optional[float]
    top20_share: Optional[float]


def descriptive_stats(posts: Sequence[Post], zwj_mode: str = "default") -> DescriptiveStats:
    """Corpus-level emoji usage summary.

    prevalence = share of posts with at least one emoji; intensity = mean
    emojis per emoji-containing post; effective_n = 1 / sum p_i^2 over the
    full observed vocabulary; top20_share = share of occurrences from the 20
    most frequent emojis. A zero-emoji corpus reports prevalence 0 and None
    for the remaining fields.
    """
    if not posts:
        raise InputError("empty corpus")
    counts: Counter = Counter()
    with_emoji = 0
    total = 0
    for post in posts:
        tokens = extract_emojis(post.text, zwj_mode)
        if tokens:
            with_emoji += 1
            total += len(tokens)
            counts.update(t.canonical for t in tokens)
    if total == 0:
        return DescriptiveStats(len(posts), 0.0, None, None, None, None)
    probs = np.array(sorted(counts.values(), reverse=True), dtype=np.float64)
    probs /= probs.sum()
    ranked = rank_emojis(counts)
    top20 = sum(counts[e] for e in ranked[:20])
    return DescriptiveStats(
        n_posts=len(posts),
        prevalence=with_emoji / len(posts),
        intensity=total / with_emoji,
        vocab_size=len(counts),
        effective_n=float(1.0 / np.sum(probs**2)),
        top20_share=top20 / total,
    )
