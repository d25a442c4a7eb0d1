"""Paired synthetic corpora with controllable divergence and polarity.

Each corpus draws balanced labels, text tokens from a corpus-specific
vocabulary (a configurable fraction shared between the pair), and emoji
tokens from a label-conditioned distribution: emoji e is emitted with
probability proportional to freq(e) * theta(e) for positive posts and
freq(e) * (1 - theta(e)) for negative ones, so theta(e) is (approximately)
the positive share among posts carrying e. Planting different thetas per
corpus creates ground-truth polarity flips; setting text overlap to zero
makes text features useless across the pair while shared emojis keep
transferring.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from .errors import InputError
from .ingest import Post, normalize_text
from .rng import Xoshiro256, derive_seed, hash_tag


@dataclass(frozen=True)
class EmojiProfile:
    emoji: str
    freq_a: float = 1.0
    freq_b: float = 1.0
    theta_a: float = 0.5
    theta_b: float = 0.5

    def validate(self) -> None:
        if not self.emoji:
            raise InputError("emoji profile with empty emoji")
        for name in ("freq_a", "freq_b"):
            if getattr(self, name) < 0:
                raise InputError(f"{self.emoji!r}: {name} must be >= 0")
        for name in ("theta_a", "theta_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InputError(
                    f"{self.emoji!r}: {name}={value} outside [0, 1]"
                )


@dataclass(frozen=True)
class SynthSpec:
    emojis: tuple[EmojiProfile, ...]
    n_posts: int = 2000
    label_balance: float = 0.5
    emoji_prevalence: float = 1.0
    mean_emojis_per_post: float = 1.5
    text_vocab_size: int = 200
    text_overlap: float = 1.0
    tokens_per_post: int = 8
    sentiment_token_share: float = 0.4
    sentiment_strength: float = 0.9
    sentiment_lexicon_size: int = 20
    months: int = 12
    start_year: int = 2021
    corpus_a: str = "synth-a"
    corpus_b: str = "synth-b"

    def validate(self) -> None:
        if not self.emojis:
            raise InputError("spec needs at least one emoji profile")
        for profile in self.emojis:
            profile.validate()
        for name in (
            "label_balance", "emoji_prevalence", "text_overlap",
            "sentiment_token_share", "sentiment_strength",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InputError(f"{name}={value} outside [0, 1]")
        if self.n_posts < 2:
            raise InputError("n_posts must be >= 2")
        if self.mean_emojis_per_post < 1.0:
            raise InputError("mean_emojis_per_post must be >= 1")
        if self.tokens_per_post < 1:
            raise InputError("tokens_per_post must be >= 1")
        if self.months < 1 or self.text_vocab_size < 1:
            raise InputError("months and text_vocab_size must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "SynthSpec":
        try:
            profiles = tuple(
                EmojiProfile(**entry) for entry in raw.get("emojis", [])
            )
            rest = {k: v for k, v in raw.items() if k != "emojis"}
            spec = cls(emojis=profiles, **rest)
        except TypeError as exc:
            raise InputError(f"bad synth spec: {exc}") from exc
        spec.validate()
        return spec


def _vocab(shared_count: int, total: int, stem: str, suffix: str) -> list[str]:
    words = [f"{stem}{i}" for i in range(shared_count)]
    words += [f"{stem}{i}{suffix}" for i in range(shared_count, total)]
    return words


def _weighted_choice(gen: Xoshiro256, weights: list[float]) -> int:
    total = sum(weights)
    u = gen.uniform() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def generate_corpus(spec: SynthSpec, side: str, seed: int) -> list[Post]:
    """One corpus of the pair; ``side`` is "a" or "b"."""
    if side not in ("a", "b"):
        raise InputError("side must be 'a' or 'b'")
    spec.validate()
    name = spec.corpus_a if side == "a" else spec.corpus_b
    gen = Xoshiro256(derive_seed(seed, hash_tag(f"synth:{side}")))

    shared_neutral = int(round(spec.text_overlap * spec.text_vocab_size))
    neutral = _vocab(shared_neutral, spec.text_vocab_size, "w", side)
    shared_sent = int(round(spec.text_overlap * spec.sentiment_lexicon_size))
    pos_words = _vocab(shared_sent, spec.sentiment_lexicon_size, "bullish", side)
    neg_words = _vocab(shared_sent, spec.sentiment_lexicon_size, "bearish", side)

    freqs = [p.freq_a if side == "a" else p.freq_b for p in spec.emojis]
    thetas = [p.theta_a if side == "a" else p.theta_b for p in spec.emojis]
    weights_pos = [f * t for f, t in zip(freqs, thetas)]
    weights_neg = [f * (1.0 - t) for f, t in zip(freqs, thetas)]
    if sum(weights_pos) <= 0 or sum(weights_neg) <= 0:
        raise InputError("emoji weights degenerate for one label class")

    n_pos = int(round(spec.n_posts * spec.label_balance))
    labels = ["positive"] * n_pos + ["negative"] * (spec.n_posts - n_pos)
    labels = [labels[i] for i in gen.permutation(len(labels))]

    extra_prob = 1.0 - 1.0 / spec.mean_emojis_per_post
    posts = []
    for i, label in enumerate(labels):
        tokens = []
        for _ in range(spec.tokens_per_post):
            if gen.uniform() < spec.sentiment_token_share:
                agree = gen.uniform() < spec.sentiment_strength
                wants_pos = (label == "positive") == agree
                lexicon = pos_words if wants_pos else neg_words
                tokens.append(lexicon[gen.below(len(lexicon))])
            else:
                tokens.append(neutral[gen.below(len(neutral))])
        emojis = []
        if gen.uniform() < spec.emoji_prevalence:
            count = 1
            while count < 8 and gen.uniform() < extra_prob:
                count += 1
            weights = weights_pos if label == "positive" else weights_neg
            for _ in range(count):
                emojis.append(spec.emojis[_weighted_choice(gen, weights)].emoji)
        month = int(gen.uniform() * spec.months)
        day = 1 + int(gen.uniform() * 28)
        ts = datetime(
            spec.start_year + month // 12, month % 12 + 1, day, 12, 0,
            tzinfo=timezone.utc,
        )
        raw = " ".join(tokens + emojis)
        posts.append(
            Post(
                id=f"{name}-{i:06d}",
                raw_text=raw,
                text=normalize_text(raw),
                label=label,
                lang="en",
                timestamp=ts,
                corpus=name,
            )
        )
    return posts


def generate_pair(spec: SynthSpec, seed: int) -> tuple[list[Post], list[Post]]:
    return generate_corpus(spec, "a", seed), generate_corpus(spec, "b", seed)


def acceptance_spec(
    n_posts: int = 12000,
    planted_flip: Optional[str] = None,
    text_overlap: float = 0.0,
    shared_theta: bool = True,
) -> SynthSpec:
    """A ready-made pair spec: strong shared emoji polarity, optional flip.

    Used by the acceptance suite and the demo scripts; emojis are strongly
    polarized with symmetric thetas so each corpus's label-conditional emoji
    mass is balanced, and text vocabularies overlap by ``text_overlap``.
    """
    table = [
        ("\U0001F680", 3.0, 0.95),  # rocket, strongly positive
        ("\U0001F525", 2.0, 0.90),
        ("\U0001F48E", 1.5, 0.80),
        ("\U0001F4C8", 1.0, 0.70),
        ("\U0001F4C9", 1.0, 0.30),
        ("\U0001F43B", 1.5, 0.20),
        ("\U0001F4B8", 2.0, 0.10),
        ("\U0001F6A8", 3.0, 0.05),
    ]
    profiles = []
    for emoji_char, freq, theta in table:
        theta_b = theta if shared_theta else min(max(theta, 0.0), 1.0)
        if planted_flip == emoji_char:
            theta, theta_b = 0.9, 0.1
        profiles.append(
            EmojiProfile(
                emoji=emoji_char, freq_a=freq, freq_b=freq,
                theta_a=theta, theta_b=theta_b,
            )
        )
    return SynthSpec(
        emojis=tuple(profiles),
        n_posts=n_posts,
        text_overlap=text_overlap,
        sentiment_token_share=0.5,
        sentiment_strength=0.9,
        mean_emojis_per_post=1.6,
    )
