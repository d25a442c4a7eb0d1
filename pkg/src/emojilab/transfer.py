"""Zero-shot sentiment transfer harness.

TF-IDF (unigrams + bigrams, smooth idf, per-document L2 normalization) feeds
an L2-regularized logistic regression trained from scratch. The objective is

    J(w, b) = 0.5 ||w||^2 + C * sum_i log(1 + exp(-y_i (w.x_i + b)))

with the bias unpenalized, minimized by gradient descent with a
Barzilai-Borwein initial step and Armijo backtracking, so the objective never
increases. Everything fitted on the source corpus is reused unchanged on the
target (zero-shot: no target-side fitting of anything).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .emoji import MODALITIES, project_modality
from .errors import InputError, NumericalError
from .ingest import NEGATIVE, POSITIVE, CorpusSplit, Post
from .rng import Xoshiro256, XoshiroStreams, derive_seed, hash_tag
from .stats import ResamplePlan, percentile_interval, resample_indices

TOKEN_RULE = "whitespace_emoji_v1"

REGIMES = ("cross_asset", "cross_platform", "cross_language", "custom")


def tokenize(text: str, zwj_mode: str = "default") -> list[str]:
    """Whitespace tokens, with each emoji cluster split into its own token.

    Emoji tokens are the canonical forms; punctuation stays attached to its
    word (it may carry sentiment).
    """
    import regex

    from .emoji import is_emoji_cluster, normalize_emoji

    tokens: list[str] = []
    for piece in text.split():
        buffer: list[str] = []
        for match in regex.finditer(r"\X", piece):
            cluster = match.group()
            if is_emoji_cluster(cluster):
                if buffer:
                    tokens.append("".join(buffer))
                    buffer = []
                tokens.extend(normalize_emoji(cluster, zwj_mode))
            else:
                buffer.append(cluster)
        if buffer:
            tokens.append("".join(buffer))
    return tokens


@dataclass
class TfidfVectorizer:
    """Unigram+bigram TF-IDF with smooth idf and L2-normalized rows."""

    vocabulary: dict[str, int] = field(default_factory=dict)
    idf: Optional[np.ndarray] = None
    ngram_range: tuple[int, int] = (1, 2)
    token_rule: str = TOKEN_RULE
    zwj_mode: str = "default"

    def _features(self, doc: str) -> list[str]:
        tokens = tokenize(doc, self.zwj_mode)
        feats = list(tokens)
        if self.ngram_range[1] >= 2:
            feats.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
        return feats

    def fit(self, docs: Sequence[str]) -> "TfidfVectorizer":
        if not docs:
            raise InputError("no training documents")
        df: dict[str, int] = {}
        for doc in docs:
            for feat in set(self._features(doc)):
                df[feat] = df.get(feat, 0) + 1
        if not df:
            raise InputError("empty vocabulary: no tokens in any training document")
        self.vocabulary = {feat: i for i, feat in enumerate(sorted(df))}
        n_docs = len(docs)
        self.idf = np.empty(len(self.vocabulary))
        for feat, col in self.vocabulary.items():
            self.idf[col] = np.log((1.0 + n_docs) / (1.0 + df[feat])) + 1.0
        return self

    def transform(self, docs: Sequence[str]) -> sparse.csr_matrix:
        if self.idf is None:
            raise InputError("vectorizer is not fitted")
        indptr = [0]
        indices: list[int] = []
        values: list[float] = []
        for doc in docs:
            counts: dict[int, int] = {}
            for feat in self._features(doc):
                col = self.vocabulary.get(feat)
                if col is not None:
                    counts[col] = counts.get(col, 0) + 1
            cols = sorted(counts)
            row = np.array([counts[c] * self.idf[c] for c in cols])
            norm = np.linalg.norm(row)
            if norm > 0:
                row = row / norm
            indices.extend(cols)
            values.extend(row.tolist())
            indptr.append(len(indices))
        return sparse.csr_matrix(
            (values, indices, indptr), shape=(len(docs), len(self.vocabulary))
        )


def tfidf_fit(train_docs: Sequence[str], zwj_mode: str = "default") -> TfidfVectorizer:
    return TfidfVectorizer(zwj_mode=zwj_mode).fit(train_docs)


def tfidf_transform(vectorizer: TfidfVectorizer, docs: Sequence[str]) -> sparse.csr_matrix:
    return vectorizer.transform(docs)


# ---------------------------------------------------------------------------
# Logistic regression


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    c: float
    converged: bool
    iterations: int
    objective_path: np.ndarray

    def scores(self, x: sparse.csr_matrix) -> np.ndarray:
        return np.asarray(x @ self.weights).ravel() + self.bias

    def predict(self, x: sparse.csr_matrix) -> np.ndarray:
        """Labels in {-1, +1}; a score of exactly zero goes positive."""
        return np.where(self.scores(x) >= 0, 1, -1)


def logreg_objective(
    w: np.ndarray, b: float, x: sparse.csr_matrix, y: np.ndarray, c: float
) -> tuple[float, np.ndarray, float]:
    """Objective value, gradient wrt w, gradient wrt b."""
    margins = y * (np.asarray(x @ w).ravel() + b)
    value = 0.5 * float(w @ w) + c * float(np.logaddexp(0.0, -margins).sum())
    # d/dz log(1+exp(-z)) = -sigmoid(-z)
    coef = -y * _sigmoid(-margins)
    grad_w = w + c * np.asarray(x.T @ coef).ravel()
    grad_b = c * float(coef.sum())
    return value, grad_w, grad_b


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_train(
    x: sparse.csr_matrix,
    y: Sequence[int],
    c: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> LogisticModel:
    """Monotone first-order minimization of the regularized objective.

    Steps use a Barzilai-Borwein initial size safeguarded by Armijo
    backtracking, so J is non-increasing; stops when the gradient infinity
    norm falls below ``tol``.
    """
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] != len(y):
        raise InputError("feature matrix and labels disagree in length")
    classes = np.unique(y)
    if not np.array_equal(classes, [-1.0, 1.0]):
        if len(classes) == 1:
            raise InputError("labels contain a single class")
        raise InputError(f"labels must be -1/+1, got {classes.tolist()}")
    if sparse.issparse(x):
        if not np.isfinite(x.data).all():
            raise InputError("features contain non-finite values")
    else:
        x = sparse.csr_matrix(np.asarray(x, dtype=np.float64))
        if not np.isfinite(x.data).all():
            raise InputError("features contain non-finite values")

    w = np.zeros(x.shape[1])
    b = 0.0
    value, grad_w, grad_b = logreg_objective(w, b, x, y, c)
    path = [value]
    step = 1.0
    prev: Optional[tuple[np.ndarray, float, np.ndarray, float]] = None
    steps_taken = 0
    while steps_taken < max_iter:
        grad_norm = max(np.abs(grad_w).max() if grad_w.size else 0.0, abs(grad_b))
        if grad_norm < tol:
            break
        if prev is not None:
            pw, pb, pgw, pgb = prev
            ds_w, ds_b = w - pw, b - pb
            dg_w, dg_b = grad_w - pgw, grad_b - pgb
            denom = float(ds_w @ dg_w) + ds_b * dg_b
            if denom > 0:  # convex objective: BB1 step
                step = (float(ds_w @ ds_w) + ds_b * ds_b) / denom
            step = min(max(step, 1e-12), 1e12)
        gnorm_sq = float(grad_w @ grad_w) + grad_b * grad_b
        prev = (w, b, grad_w, grad_b)
        alpha = step
        accepted = False
        for _ in range(60):
            w_new = w - alpha * grad_w
            b_new = b - alpha * grad_b
            value_new, grad_w_new, grad_b_new = logreg_objective(w_new, b_new, x, y, c)
            if value_new <= value - 1e-4 * alpha * gnorm_sq:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:  # no productive step at float precision
            break
        w, b = w_new, b_new
        value, grad_w, grad_b = value_new, grad_w_new, grad_b_new
        path.append(value)
        steps_taken += 1
    if not np.isfinite(w).all() or not np.isfinite(b):
        raise NumericalError("training diverged to non-finite weights")
    grad_norm = max(np.abs(grad_w).max() if grad_w.size else 0.0, abs(grad_b))
    return LogisticModel(
        weights=w,
        bias=float(b),
        c=c,
        converged=bool(grad_norm < tol),
        iterations=steps_taken,
        objective_path=np.asarray(path),
    )


# ---------------------------------------------------------------------------
# Transfer harness


@dataclass(frozen=True)
class TransferReport:
    regime: str
    modality: str
    model_id: str
    acc_in: float
    acc_out: float
    gap: float
    gap_ci: tuple[float, float]
    perm_p: float
    n_train: int
    n_test_in: int
    n_test_out: int
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "modality": self.modality,
            "model": self.model_id,
            "acc_in": self.acc_in,
            "acc_out": self.acc_out,
            "gap": self.gap,
            "gap_ci": list(self.gap_ci),
            "perm_p": self.perm_p,
            "sizes": {
                "train": self.n_train,
                "test_in": self.n_test_in,
                "test_out": self.n_test_out,
            },
            "notes": list(self.notes),
        }


_LABEL_VALUE = {POSITIVE: 1, NEGATIVE: -1}


def _labels(posts: Sequence[Post], context: str) -> np.ndarray:
    values = []
    for post in posts:
        if post.label not in _LABEL_VALUE:
            raise InputError(f"{context}: post {post.id!r} is unlabeled")
        values.append(_LABEL_VALUE[post.label])
    return np.asarray(values, dtype=np.float64)


def _check_balanced(posts: Sequence[Post], context: str) -> None:
    y = _labels(posts, context)
    n_pos = int((y > 0).sum())
    if abs(2 * n_pos - len(y)) > 1:
        raise InputError(
            f"{context} is not class-balanced: {n_pos} positive of {len(y)}"
        )


def _subsample_balanced(posts: Sequence[Post], limit: int, seed: int) -> list[Post]:
    pos = [p for p in posts if p.label == POSITIVE]
    neg = [p for p in posts if p.label == NEGATIVE]
    gen = Xoshiro256(derive_seed(seed, hash_tag("target-subsample")))
    take_pos = limit // 2 + limit % 2
    take_neg = limit // 2
    chosen = gen.sample(pos, take_pos) + gen.sample(neg, take_neg)
    return sorted(chosen, key=lambda p: p.id)


def gap_bootstrap_ci(
    correct_in: np.ndarray,
    labels_in: np.ndarray,
    correct_out: np.ndarray,
    labels_out: np.ndarray,
    n_boot: int,
    seed: int,
    level: float = 0.95,
) -> tuple[float, float]:
    """CI of acc_in - acc_out; each test set resampled stratified by class."""
    reps = {}
    for tag, correct, labels in (
        ("in", correct_in, labels_in),
        ("out", correct_out, labels_out),
    ):
        order = np.argsort(labels, kind="stable")  # strata blocks: -1 then +1
        sorted_correct = correct[order]
        sorted_labels = labels[order]
        strata = {}
        start = 0
        for value in (-1.0, 1.0):
            size = int((sorted_labels == value).sum())
            strata[str(value)] = list(range(start, start + size))
            start += size
        plan = ResamplePlan(
            unit="stratified_class",
            n_replicates=n_boot,
            level=level,
            master_seed=derive_seed(seed, hash_tag(f"boot-{tag}")),
        )
        idx = resample_indices(strata, plan)
        flat = np.concatenate([strata[k] for k in sorted(strata)])
        gathered = sorted_correct[flat[idx]]
        reps[tag] = gathered.mean(axis=1)
    return percentile_interval(reps["in"] - reps["out"], level)


def transfer_permutation_test(
    correct_in: np.ndarray,
    correct_out: np.ndarray,
    n_perm: int = 1000,
    seed: int = 0,
) -> float:
    """Permute domain assignments of pooled per-example correctness.

    Group sizes are preserved; p is the add-one share of permutations with
    |permuted gap| >= |observed gap|.
    """
    if n_perm < 1:
        raise InputError("n_perm must be >= 1")
    correct_in = np.asarray(correct_in, dtype=np.float64)
    correct_out = np.asarray(correct_out, dtype=np.float64)
    if len(correct_in) == 0 or len(correct_out) == 0:
        raise InputError("both prediction sets must be non-empty")
    observed = abs(correct_in.mean() - correct_out.mean())
    pooled = np.concatenate([correct_in, correct_out])
    n_in = len(correct_in)
    streams = XoshiroStreams(seed, n_perm)
    keys = streams.uniform_block(len(pooled))
    perms = np.argsort(keys, axis=1, kind="stable")
    shuffled = pooled[perms]
    gaps = np.abs(shuffled[:, :n_in].mean(axis=1) - shuffled[:, n_in:].mean(axis=1))
    return float((1 + int((gaps >= observed - 1e-15).sum())) / (n_perm + 1))


def run_transfer(
    source: CorpusSplit,
    target_test: Sequence[Post],
    modality: str,
    seed: int = 0,
    regime: str = "custom",
    c: float = 1.0,
    n_boot: int = 1000,
    n_perm: int = 1000,
    target_limit: int = 5000,
    zwj_mode: str = "default",
) -> TransferReport:
    """Train on the source split under a modality, evaluate in and out."""
    if modality not in MODALITIES:
        raise InputError(f"unknown modality {modality!r}")
    if regime not in REGIMES:
        raise InputError(f"unknown regime {regime!r}")
    notes = []
    _check_balanced(source.train, "source train split")
    _check_balanced(target_test, "target test set")
    target = list(target_test)
    if len(target) > target_limit:
        target = _subsample_balanced(target, target_limit, seed)
        notes.append(f"target test subsampled to {target_limit}")
    else:
        notes.append(f"target test uses all {len(target)} posts")

    def project(posts):
        return [project_modality(p, modality, zwj_mode) for p in posts]

    train_docs = project(source.train)
    if not any(doc for doc in train_docs):
        raise InputError(
            f"modality {modality} projects every training post to empty text"
        )
    vectorizer = tfidf_fit(train_docs, zwj_mode)
    x_train = vectorizer.transform(train_docs)
    y_train = _labels(source.train, "source train split")
    model = logreg_train(x_train, y_train, c=c)

    x_in = vectorizer.transform(project(source.test_in))
    y_in = _labels(source.test_in, "source test split")
    x_out = vectorizer.transform(project(target))
    y_out = _labels(target, "target test set")
    correct_in = (model.predict(x_in) == y_in).astype(np.float64)
    correct_out = (model.predict(x_out) == y_out).astype(np.float64)
    acc_in = float(correct_in.mean())
    acc_out = float(correct_out.mean())
    ci = gap_bootstrap_ci(
        correct_in, y_in, correct_out, y_out, n_boot, derive_seed(seed, hash_tag("ci"))
    )
    perm_p = transfer_permutation_test(
        correct_in, correct_out, n_perm, derive_seed(seed, hash_tag("perm"))
    )
    if not model.converged:
        notes.append(f"optimizer stopped after {model.iterations} iterations")
    return TransferReport(
        regime=regime,
        modality=modality,
        model_id="tfidf_logreg",
        acc_in=acc_in,
        acc_out=acc_out,
        gap=acc_in - acc_out,
        gap_ci=ci,
        perm_p=perm_p,
        n_train=len(source.train),
        n_test_in=len(source.test_in),
        n_test_out=len(target),
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# External prediction files


def _read_predictions(path, expected_domain: str) -> tuple[np.ndarray, np.ndarray]:
    correct = []
    labels = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path} line {line_no}: invalid JSON: {exc.msg}")
            for key in ("id", "gold", "pred"):
                if key not in record:
                    raise InputError(f"{path} line {line_no}: missing {key!r}")
            if record["id"] in seen:
                raise InputError(f"{path} line {line_no}: duplicate id {record['id']!r}")
            seen.add(record["id"])
            gold, pred = record["gold"], record["pred"]
            if gold not in ("pos", "neg") or pred not in ("pos", "neg"):
                raise InputError(f"{path} line {line_no}: labels must be pos/neg")
            domain = record.get("domain")
            if domain is not None and domain != expected_domain:
                raise InputError(
                    f"{path} line {line_no}: domain {domain!r}, expected {expected_domain!r}"
                )
            correct.append(1.0 if gold == pred else 0.0)
            labels.append(1.0 if gold == "pos" else -1.0)
    if not correct:
        raise InputError(f"{path}: no predictions")
    return np.asarray(correct), np.asarray(labels)


def evaluate_predictions(
    file_in,
    file_out,
    seed: int = 0,
    n_boot: int = 1000,
    n_perm: int = 1000,
    regime: str = "custom",
    modality: str = "TE",
    model_id: str = "external",
) -> TransferReport:
    """Score externally produced prediction files with the same report."""
    correct_in, labels_in = _read_predictions(file_in, "in")
    correct_out, labels_out = _read_predictions(file_out, "out")
    acc_in = float(correct_in.mean())
    acc_out = float(correct_out.mean())
    ci = gap_bootstrap_ci(
        correct_in, labels_in, correct_out, labels_out, n_boot,
        derive_seed(seed, hash_tag("ci")),
    )
    perm_p = transfer_permutation_test(
        correct_in, correct_out, n_perm, derive_seed(seed, hash_tag("perm"))
    )
    return TransferReport(
        regime=regime,
        modality=modality,
        model_id=model_id,
        acc_in=acc_in,
        acc_out=acc_out,
        gap=acc_in - acc_out,
        gap_ci=ci,
        perm_p=perm_p,
        n_train=0,
        n_test_in=len(correct_in),
        n_test_out=len(correct_out),
        notes=("scored from external prediction files",),
    )
