"""Bootstrap confidence intervals, permutation tests, and rater agreement.

Replicate r of any resampling plan draws from a xoshiro256** stream seeded
with ``derive_seed(master_seed, r)``; see `emojilab.rng` for the exact
portable scheme. Replicates are therefore independent of execution order and
identical whether generated serially or in vectorized blocks.

Resampling units:

* ``post`` / ``emoji``: the records themselves are resampled with
  replacement;
* ``month_block``: whole month groups are resampled with replacement, each
  group's records staying contiguous and in order;
* ``stratified_class``: records are resampled with replacement within each
  label class, preserving the label composition (strata processed in sorted
  key order within each replicate's stream).

Intervals are empirical percentile intervals at the plan's level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import InputError
from .rng import XoshiroStreams

UNITS = ("post", "emoji", "month_block", "stratified_class")

_GROUPED_UNITS = ("month_block", "stratified_class")


@dataclass(frozen=True)
class ResamplePlan:
    unit: str
    n_replicates: int = 1000
    level: float = 0.95
    master_seed: int = 0

    def __post_init__(self):
        if self.unit not in UNITS:
            raise InputError(f"unknown resampling unit {self.unit!r}")
        if self.n_replicates < 1:
            raise InputError("n_replicates must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise InputError("level must be in (0, 1)")


@dataclass(frozen=True)
class ReplicateSummary:
    count: int
    mean: float
    sd: float


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lo: float
    hi: float
    replicates: ReplicateSummary


def percentile_interval(values: np.ndarray, level: float) -> tuple[float, float]:
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(values, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return float(lo), float(hi)


def _flatten(data, unit: str) -> tuple[list, Optional[list[tuple[str, list]]]]:
    """Original sample plus, for grouped units, the sorted group layout."""
    if unit in _GROUPED_UNITS:
        if not isinstance(data, Mapping):
            raise InputError(f"unit {unit!r} expects a mapping of groups")
        if not data:
            raise InputError("no groups to resample")
        groups = []
        for key in sorted(data, key=str):
            items = list(data[key])
            if not items:
                raise InputError(f"empty stratum {key!r}")
            groups.append((key, items))
        flat = [item for _, items in groups for item in items]
        return flat, groups
    flat = list(data)
    if not flat:
        raise InputError("no records to resample")
    return flat, None


def resample_indices(data, plan: ResamplePlan) -> np.ndarray:
    """Replicate index matrix, shape (n_replicates, n), into the flat sample.

    Column blocks follow the documented draw order: for grouped units each
    group/stratum is drawn in sorted-key order from the replicate's single
    stream; ``month_block`` draws one group choice per month, then expands to
    that group's contiguous index range.
    """
    flat, groups = _flatten(data, plan.unit)
    streams = XoshiroStreams(plan.master_seed, plan.n_replicates)
    if groups is None:
        n = len(flat)
        return streams.below_block(n, n)
    if plan.unit == "stratified_class":
        offsets = []
        start = 0
        for _, items in groups:
            offsets.append((start, len(items)))
            start += len(items)
        blocks = []
        for start, size in offsets:
            blocks.append(streams.below_block(size, size) + start)
        return np.concatenate(blocks, axis=1)
    # month_block: choose len(groups) groups with replacement per replicate,
    # then expand each choice into its contiguous member indices.
    spans = []
    start = 0
    for _, items in groups:
        spans.append((start, len(items)))
        start += len(items)
    choices = streams.below_block(len(groups), len(groups))
    rows = []
    for r in range(plan.n_replicates):
        row = np.concatenate(
            [np.arange(spans[g][0], spans[g][0] + spans[g][1]) for g in choices[r]]
        )
        rows.append(row)
    return _ragged_to_object(rows)


def _ragged_to_object(rows: list[np.ndarray]):
    # month_block replicates differ in length when months differ in size.
    out = np.empty(len(rows), dtype=object)
    for i, row in enumerate(rows):
        out[i] = row
    return out


def bootstrap(
    statistic: Callable[[list], float], data, plan: ResamplePlan
) -> IntervalEstimate:
    """Percentile bootstrap interval for ``statistic`` under ``plan``."""
    flat, _ = _flatten(data, plan.unit)
    point = float(statistic(flat))
    reps = bootstrap_replicates(statistic, data, plan)
    lo, hi = percentile_interval(reps, plan.level)
    summary = ReplicateSummary(
        count=len(reps),
        mean=float(reps.mean()),
        sd=float(reps.std(ddof=1)) if len(reps) > 1 else 0.0,
    )
    return IntervalEstimate(point=point, lo=lo, hi=hi, replicates=summary)


def bootstrap_replicates(
    statistic: Callable[[list], float], data, plan: ResamplePlan
) -> np.ndarray:
    """The raw replicate values behind `bootstrap` (same streams)."""
    flat, _ = _flatten(data, plan.unit)
    indices = resample_indices(data, plan)
    values = np.empty(plan.n_replicates)
    is_array = isinstance(flat[0], (int, float, np.number)) if flat else False
    if is_array:
        arr = np.asarray(flat)
        for r in range(plan.n_replicates):
            values[r] = statistic(arr[indices[r]])
    else:
        for r in range(plan.n_replicates):
            values[r] = statistic([flat[i] for i in indices[r]])
    return values


def permutation_test(
    observed: float,
    null_generator: Callable[[int], float],
    n_perm: int,
    tail: str = "greater",
    master_seed: int = 0,
) -> float:
    """Add-one permutation p-value.

    ``null_generator`` receives the replicate seed ``derive_seed(master, r)``
    and returns one null statistic. ``greater`` counts null >= observed;
    ``two_sided`` counts |null| >= |observed|.
    """
    from .rng import derive_seed

    if n_perm < 1:
        raise InputError("n_perm must be >= 1")
    if tail not in ("greater", "two_sided"):
        raise InputError(f"unknown tail {tail!r}")
    extreme = 0
    for r in range(n_perm):
        null = null_generator(derive_seed(master_seed, r))
        if tail == "greater":
            if null >= observed:
                extreme += 1
        else:
            if abs(null) >= abs(observed):
                extreme += 1
    return (1 + extreme) / (n_perm + 1)


def agreement_matrix(labelers: Mapping[str, Sequence[int]]) -> dict:
    """Pairwise proportion of identical binary labels, plus a majority column.

    Labels are 0/1 vectors of equal length (1 = positive). The majority vote
    breaks ties toward positive; the returned dict maps frozenset pairs of
    names (including "majority") to agreement proportions.
    """
    if not labelers:
        raise InputError("no labelers")
    names = sorted(labelers)
    vectors = {}
    length = None
    for name in names:
        vec = np.asarray(labelers[name], dtype=np.int64)
        if vec.ndim != 1:
            raise InputError(f"labeler {name!r} vector must be 1-D")
        if not np.isin(vec, (0, 1)).all():
            raise InputError(f"labeler {name!r} has non-binary labels")
        if length is None:
            length = len(vec)
        elif len(vec) != length:
            raise InputError(
                f"labeler {name!r} has {len(vec)} labels, expected {length}"
            )
        vectors[name] = vec
    if length == 0:
        raise InputError("label vectors are empty")
    stack = np.stack([vectors[n] for n in names])
    majority = (stack.sum(axis=0) * 2 >= len(names)).astype(np.int64)
    vectors["majority"] = majority
    result = {}
    all_names = names + ["majority"]
    for i, a in enumerate(all_names):
        for b in all_names[i + 1 :]:
            result[(a, b)] = float((vectors[a] == vectors[b]).mean())
    return result
