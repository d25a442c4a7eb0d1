"""Per-emoji sentiment polarity and cross-corpus consistency metrics.

Polarity of an emoji is the Jeffreys-smoothed share of positive posts among
the labeled posts containing it: theta = (pos + 0.5) / (pos + neg + 1). Two
corpora are compared over a shared emoji set selected by support thresholds
plus extreme-polarity tails, and scored with a weighted Spearman rank
correlation, mean absolute differences (plain and weighted), and a
bootstrap-confirmed flip rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .divergence import _codepoint_key
from .emoji import extract_emojis
from .errors import InputError, NumericalError
from .ingest import NEGATIVE, POSITIVE, Post
from .rng import derive_seed, hash_tag
from .stats import ResamplePlan, percentile_interval, resample_indices

REGIMES = {"platform_asset": (300, 30, 100), "language": (120, 12, 50)}


@dataclass(frozen=True)
class PolarityRecord:
    emoji: str
    pos: int
    neg: int
    theta: float
    in_tail: bool = False

    @property
    def support(self) -> int:
        return self.pos + self.neg


def jeffreys(pos: int, neg: int) -> float:
    return (pos + 0.5) / (pos + neg + 1.0)


def polarity_table(posts: Sequence[Post], zwj_mode: str = "default") -> dict[str, PolarityRecord]:
    """Presence-based pos/neg counts per emoji over labeled posts."""
    counts: dict[str, list[int]] = {}
    for post in posts:
        if post.label == POSITIVE:
            slot = 0
        elif post.label == NEGATIVE:
            slot = 1
        else:
            continue
        seen = {t.canonical for t in extract_emojis(post.text, zwj_mode)}
        for emoji_token in seen:
            counts.setdefault(emoji_token, [0, 0])[slot] += 1
    return {
        e: PolarityRecord(emoji=e, pos=c[0], neg=c[1], theta=jeffreys(c[0], c[1]))
        for e, c in counts.items()
    }


def _meets_threshold(rec: PolarityRecord, total_min: int, class_min: int) -> bool:
    return rec.support >= total_min and rec.pos >= class_min and rec.neg >= class_min


def select_comparison_set(
    a: dict[str, PolarityRecord],
    b: dict[str, PolarityRecord],
    regime: str = "platform_asset",
) -> list[PolarityRecord]:
    """Shared emojis meeting the regime's support thresholds, plus tails.

    The threshold set is the intersection of emojis passing the support
    thresholds on both sides. The extreme-polarity tails add emojis ranked in
    the top or bottom ``tail_size`` by theta in BOTH corpora's rankings over
    the shared vocabulary, regardless of support; those tail-only members are
    flagged ``in_tail``. Returned records carry corpus-a counts; pair them
    with corpus b via the emoji key.
    """
    if regime not in REGIMES:
        raise InputError(f"unknown regime {regime!r}; choose from {sorted(REGIMES)}")
    if not a or not b:
        raise InputError("polarity tables must be non-empty")
    total_min, class_min, tail_size = REGIMES[regime]
    shared = sorted(set(a) & set(b), key=_codepoint_key)
    if not shared:
        raise InputError("no shared emojis between corpora")

    threshold_set = {
        e
        for e in shared
        if _meets_threshold(a[e], total_min, class_min)
        and _meets_threshold(b[e], total_min, class_min)
    }

    def tails(table: dict[str, PolarityRecord]) -> set[str]:
        ranked = sorted(shared, key=lambda e: (table[e].theta, _codepoint_key(e)))
        return set(ranked[:tail_size]) | set(ranked[-tail_size:])

    tail_set = (tails(a) & tails(b)) - threshold_set
    selected = sorted(threshold_set | tail_set, key=_codepoint_key)
    if not selected:
        raise InputError("comparison set is empty under the given thresholds")
    return [
        PolarityRecord(
            emoji=e,
            pos=a[e].pos,
            neg=a[e].neg,
            theta=a[e].theta,
            in_tail=e in tail_set,
        )
        for e in selected
    ]


def harmonic_weights(n_a: Sequence[float], n_b: Sequence[float]) -> np.ndarray:
    """Normalized harmonic-mean weights 2ab/(a+b) of per-emoji supports."""
    n_a = np.asarray(n_a, dtype=np.float64)
    n_b = np.asarray(n_b, dtype=np.float64)
    if n_a.shape != n_b.shape:
        raise InputError("support vectors differ in length")
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(n_a + n_b > 0, 2.0 * n_a * n_b / (n_a + n_b), 0.0)
    total = w.sum()
    if total <= 0:
        raise NumericalError("all harmonic weights are zero")
    return w / total


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean of their positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def weighted_spearman(
    theta_a: Sequence[float],
    theta_b: Sequence[float],
    weights: Optional[Sequence[float]] = None,
) -> float:
    """Weighted Pearson correlation of tie-averaged rank vectors."""
    theta_a = np.asarray(theta_a, dtype=np.float64)
    theta_b = np.asarray(theta_b, dtype=np.float64)
    if theta_a.shape != theta_b.shape:
        raise InputError("theta vectors differ in length")
    if len(theta_a) < 3:
        raise InputError("need at least 3 matched emojis")
    if weights is None:
        w = np.full(len(theta_a), 1.0 / len(theta_a))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != theta_a.shape:
            raise InputError("weights length mismatch")
        w = w / w.sum()
    ra = average_ranks(theta_a)
    rb = average_ranks(theta_b)
    ma = float(np.sum(w * ra))
    mb = float(np.sum(w * rb))
    va = float(np.sum(w * (ra - ma) ** 2))
    vb = float(np.sum(w * (rb - mb) ** 2))
    if va <= 0 or vb <= 0:
        raise NumericalError("rank vector has zero variance; correlation undefined")
    cov = float(np.sum(w * (ra - ma) * (rb - mb)))
    return cov / np.sqrt(va * vb)


def maud(
    theta_a: Sequence[float],
    theta_b: Sequence[float],
    weights: Optional[Sequence[float]] = None,
) -> float:
    """Mean absolute polarity difference; weighted when weights are given."""
    theta_a = np.asarray(theta_a, dtype=np.float64)
    theta_b = np.asarray(theta_b, dtype=np.float64)
    if theta_a.shape != theta_b.shape:
        raise InputError("theta vectors differ in length")
    diff = np.abs(theta_a - theta_b)
    if weights is None:
        return float(diff.mean())
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != theta_a.shape:
        raise InputError("weights length mismatch")
    return float(np.sum(w / w.sum() * diff))


@dataclass(frozen=True)
class FlipResult:
    emoji: str
    theta_a: float
    theta_b: float
    median_a: float
    median_b: float
    ci_lo: float
    ci_hi: float
    is_flip: bool
    point_sign_flip: bool


def _presence_labels(
    posts: Sequence[Post], shared: Sequence[str], zwj_mode: str
) -> dict[str, np.ndarray]:
    wanted = set(shared)
    labels: dict[str, list[int]] = {e: [] for e in shared}
    for post in posts:
        if post.label == POSITIVE:
            y = 1
        elif post.label == NEGATIVE:
            y = 0
        else:
            continue
        for e in {t.canonical for t in extract_emojis(post.text, zwj_mode)} & wanted:
            labels[e].append(y)
    return {e: np.asarray(v, dtype=np.int64) for e, v in labels.items()}


def flip_analysis(
    a_posts: Sequence[Post],
    b_posts: Sequence[Post],
    shared: Sequence[str],
    n_boot: int = 1000,
    seed: int = 0,
    level: float = 0.95,
    weights: Optional[Sequence[float]] = None,
    zwj_mode: str = "default",
) -> tuple[list[FlipResult], float, float]:
    """Bootstrap flip detection over the shared emoji list.

    Per emoji, posts containing it are resampled with replacement within each
    corpus (n_boot replicates per side, paired by replicate index) and theta
    is recomputed. An emoji flips when the bootstrap-median polarities sit on
    opposite sides of 0.5 and the CI of theta_a - theta_b excludes zero.
    Returns (per-emoji results, flip_rate, weighted flip_rate).
    """
    if n_boot < 100:
        raise InputError("n_boot must be >= 100")
    labels_a = _presence_labels(a_posts, shared, zwj_mode)
    labels_b = _presence_labels(b_posts, shared, zwj_mode)
    results: list[FlipResult] = []
    for e in shared:
        la, lb = labels_a[e], labels_b[e]
        if len(la) == 0 or len(lb) == 0:
            raise InputError(f"emoji {e!r} missing from one corpus")
        seed_e = derive_seed(seed, hash_tag(e))
        reps = {}
        for tag, lab in (("a", la), ("b", lb)):
            plan = ResamplePlan(
                unit="post",
                n_replicates=n_boot,
                level=level,
                master_seed=derive_seed(seed_e, hash_tag(tag)),
            )
            idx = resample_indices(lab, plan)
            counts = lab[idx].sum(axis=1)
            reps[tag] = (counts + 0.5) / (len(lab) + 1.0)
        delta = reps["a"] - reps["b"]
        ci_lo, ci_hi = percentile_interval(delta, level)
        med_a = float(np.median(reps["a"]))
        med_b = float(np.median(reps["b"]))
        sign_flip = (med_a - 0.5) * (med_b - 0.5) < 0
        is_flip = bool(sign_flip and (ci_lo > 0 or ci_hi < 0))
        theta_a = jeffreys(int(la.sum()), int(len(la) - la.sum()))
        theta_b = jeffreys(int(lb.sum()), int(len(lb) - lb.sum()))
        results.append(
            FlipResult(
                emoji=e,
                theta_a=theta_a,
                theta_b=theta_b,
                median_a=med_a,
                median_b=med_b,
                ci_lo=ci_lo,
                ci_hi=ci_hi,
                is_flip=is_flip,
                point_sign_flip=bool((theta_a - 0.5) * (theta_b - 0.5) < 0),
            )
        )
    flips = [r for r in results if r.is_flip]
    flip_rate = len(flips) / len(results) if results else 0.0
    if weights is None:
        flip_rate_w = flip_rate
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(shared),):
            raise InputError("weights length mismatch")
        w = w / w.sum()
        flip_rate_w = float(sum(w[i] for i, r in enumerate(results) if r.is_flip))
    return results, flip_rate, flip_rate_w


@dataclass(frozen=True)
class PolarityComparison:
    records_a: list[PolarityRecord]
    records_b: list[PolarityRecord]
    weights: np.ndarray
    rho_w: float
    rho_w_threshold_only: Optional[float]
    maud: float
    maud_w: float
    flip_rate: float
    flip_rate_w: float
    flips: list[FlipResult]
    flip_results: list[FlipResult]  # every shared emoji, flips and non-flips
    regime: str


def compare_polarity(
    a_posts: Sequence[Post],
    b_posts: Sequence[Post],
    regime: str = "platform_asset",
    n_boot: int = 1000,
    seed: int = 0,
    zwj_mode: str = "default",
) -> PolarityComparison:
    """Full polarity consistency comparison between two labeled corpora."""
    table_a = polarity_table(a_posts, zwj_mode)
    table_b = polarity_table(b_posts, zwj_mode)
    records_a = select_comparison_set(table_a, table_b, regime)
    emojis = [r.emoji for r in records_a]
    records_b = [
        PolarityRecord(
            emoji=e,
            pos=table_b[e].pos,
            neg=table_b[e].neg,
            theta=table_b[e].theta,
            in_tail=records_a[i].in_tail,
        )
        for i, e in enumerate(emojis)
    ]
    weights = harmonic_weights(
        [r.support for r in records_a], [r.support for r in records_b]
    )
    theta_a = [r.theta for r in records_a]
    theta_b = [r.theta for r in records_b]
    rho_w = weighted_spearman(theta_a, theta_b, weights)
    core = [i for i, r in enumerate(records_a) if not r.in_tail]
    rho_thr = None
    if len(core) >= 3:
        try:
            rho_thr = weighted_spearman(
                [theta_a[i] for i in core],
                [theta_b[i] for i in core],
                weights[core],
            )
        except NumericalError:
            rho_thr = None
    flips, flip_rate, flip_rate_w = flip_analysis(
        a_posts, b_posts, emojis, n_boot=n_boot, seed=seed, weights=weights,
        zwj_mode=zwj_mode,
    )
    return PolarityComparison(
        records_a=records_a,
        records_b=records_b,
        weights=weights,
        rho_w=rho_w,
        rho_w_threshold_only=rho_thr,
        maud=maud(theta_a, theta_b),
        maud_w=maud(theta_a, theta_b, weights),
        flip_rate=flip_rate,
        flip_rate_w=flip_rate_w,
        flips=[f for f in flips if f.is_flip],
        flip_results=flips,
        regime=regime,
    )
