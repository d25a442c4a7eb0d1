"""Centroid-embedding alignment between two corpora.

Per-emoji centroids (means of unit-normalized post vectors) are aligned with
orthogonal Procrustes: the rotation R minimizing ||A R - B||_F is U V^T from
the SVD of A^T B, computed in-module with one-sided Jacobi iteration. No
centering or scaling is applied by default. Alignment quality is scored by
mean cosine similarity of corresponding centroids and NN@k accuracy, with a
permutation test that re-pairs rows of B.

Embedding files come in pairs: ``<prefix>.idx.jsonl`` with one
``{"post_id": ..., "row": ...}`` line per row (an optional leading metadata
line without "post_id" is skipped), and ``<prefix>.mat`` holding a 16-byte
little-endian header (magic ``EMB1``, u32 rows, u32 dim, u32 reserved)
followed by row-major float32 data.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .divergence import _codepoint_key
from .emoji import extract_emojis
from .errors import InputError, NumericalError
from .ingest import Post
from .rng import Xoshiro256, derive_seed, hash_tag

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sIII")


# ---------------------------------------------------------------------------
# Embedding file pair


@dataclass(frozen=True)
class EmbeddingStore:
    ids: list[str]
    matrix: np.ndarray  # (len(ids), dim) float32/float64

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __post_init__(self):
        if len(self.ids) != len(set(self.ids)):
            raise InputError("duplicate post ids in embedding store")
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.ids):
            raise InputError("embedding matrix shape does not match ids")
        if self.matrix.shape[1] < 1:
            raise InputError("embedding dim must be >= 1")
        if not np.isfinite(self.matrix).all():
            raise InputError("embedding matrix contains non-finite values")


def write_embeddings(prefix: str, ids: Sequence[str], matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise InputError("matrix shape does not match ids")
    with open(f"{prefix}.mat", "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, matrix.shape[0], matrix.shape[1], 0))
        fh.write(matrix.tobytes())
    with open(f"{prefix}.idx.jsonl", "w", encoding="utf-8") as fh:
        for row, post_id in enumerate(ids):
            fh.write(json.dumps({"post_id": post_id, "row": row}, ensure_ascii=False))
            fh.write("\n")


def read_embeddings(prefix: str) -> EmbeddingStore:
    with open(f"{prefix}.mat", "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise InputError(f"{prefix}.mat: truncated header")
        magic, rows, dim, _ = _HEADER.unpack(header)
        if magic != MAGIC:
            raise InputError(f"{prefix}.mat: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != rows * dim:
        raise InputError(
            f"{prefix}.mat: expected {rows}x{dim} floats, found {data.size}"
        )
    matrix = data.reshape(rows, dim).astype(np.float64)
    ids: list[Optional[str]] = [None] * rows
    with open(f"{prefix}.idx.jsonl", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "post_id" not in record:
                if line_no == 1:
                    continue  # leading metadata line
                raise InputError(f"{prefix}.idx.jsonl line {line_no}: missing post_id")
            row = record.get("row")
            if not isinstance(row, int) or not 0 <= row < rows:
                raise InputError(f"{prefix}.idx.jsonl line {line_no}: bad row {row!r}")
            if ids[row] is not None:
                raise InputError(f"{prefix}.idx.jsonl line {line_no}: duplicate row {row}")
            ids[row] = str(record["post_id"])
    missing = [i for i, v in enumerate(ids) if v is None]
    if missing:
        raise InputError(f"{prefix}.idx.jsonl: rows without ids, e.g. {missing[:3]}")
    return EmbeddingStore(ids=list(ids), matrix=matrix)


# ---------------------------------------------------------------------------
# Centroids


@dataclass(frozen=True)
class CentroidMatrix:
    emojis: tuple[str, ...]
    rows: np.ndarray  # (len(emojis), dim)
    support: np.ndarray  # available posts per emoji


def compute_centroids(
    store: EmbeddingStore,
    posts: Sequence[Post],
    shared_emojis: Sequence[str],
    n_samples: int,
    seed: int,
    normalize: bool = True,
    zwj_mode: str = "default",
) -> CentroidMatrix:
    """Mean of unit-normalized vectors of ``n_samples`` posts per emoji.

    Posts are matched to embeddings by id; each emoji samples exactly
    ``n_samples`` of its posts without replacement, deterministically under
    (seed, emoji). Emojis with fewer candidates raise InputError.
    """
    if n_samples < 1:
        raise InputError("n_samples must be >= 1")
    row_of = {pid: i for i, pid in enumerate(store.ids)}
    candidates: dict[str, list[int]] = {e: [] for e in shared_emojis}
    for post in posts:
        row = row_of.get(post.id)
        if row is None:
            continue
        for e in {t.canonical for t in extract_emojis(post.text, zwj_mode)}:
            if e in candidates:
                candidates[e].append(row)
    dim = store.dim
    rows = np.zeros((len(shared_emojis), dim))
    support = np.zeros(len(shared_emojis), dtype=np.int64)
    for i, e in enumerate(shared_emojis):
        cand = candidates[e]
        if len(cand) < n_samples:
            raise InputError(
                f"emoji {e!r} has {len(cand)} embedded posts, need {n_samples}"
            )
        gen = Xoshiro256(derive_seed(seed, hash_tag(e)))
        chosen = gen.sample(cand, n_samples)
        vectors = store.matrix[chosen]
        if normalize:
            norms = np.linalg.norm(vectors, axis=1, keepdims=True)
            vectors = np.divide(
                vectors, norms, out=np.zeros_like(vectors), where=norms > 0
            )
        rows[i] = vectors.mean(axis=0)
        support[i] = len(cand)
    return CentroidMatrix(emojis=tuple(shared_emojis), rows=rows, support=support)


# ---------------------------------------------------------------------------
# One-sided Jacobi SVD and Procrustes


def jacobi_svd(
    matrix: np.ndarray, tol: float = 1e-10, max_sweeps: int = 60
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD M = U diag(s) V^T via one-sided Jacobi column orthogonalization.

    Designed for the small square matrices arising in Procrustes; handles
    rank deficiency by completing U with an orthonormal basis for the
    remaining directions.
    """
    work = np.array(matrix, dtype=np.float64)
    if work.ndim != 2:
        raise InputError("jacobi_svd expects a matrix")
    n, m = work.shape
    if n < m:
        # operate on the transpose and swap factors at the end
        u, s, v = jacobi_svd(work.T, tol=tol, max_sweeps=max_sweeps)
        return v, s, u
    v = np.eye(m)
    for _ in range(max_sweeps):
        converged = True
        for i in range(m - 1):
            for j in range(i + 1, m):
                ci = work[:, i]
                cj = work[:, j]
                aii = float(ci @ ci)
                ajj = float(cj @ cj)
                aij = float(ci @ cj)
                if abs(aij) <= tol * np.sqrt(aii * ajj) or aii == 0 or ajj == 0:
                    continue
                converged = False
                zeta = (ajj - aii) / (2.0 * aij)
                t = np.sign(zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                if zeta == 0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                gi = c * ci - s * cj
                gj = s * ci + c * cj
                work[:, i], work[:, j] = gi, gj
                vi = c * v[:, i] - s * v[:, j]
                vj = s * v[:, i] + c * v[:, j]
                v[:, i], v[:, j] = vi, vj
        if converged:
            break
    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    v = v[:, order]
    u = np.zeros((n, m))
    eps = np.finfo(np.float64).eps * max(n, m) * (sigma[0] if sigma.size else 1.0)
    for k in range(m):
        if sigma[k] > eps:
            u[:, k] = work[:, k] / sigma[k]
        else:
            sigma[k] = 0.0
    # complete columns for zero singular values: take the standard basis
    # vector with the largest residual outside span(u), double-projected
    for k in range(m):
        if sigma[k] == 0.0:
            residuals = np.eye(n) - u @ (u.T @ np.eye(n))
            norms = np.linalg.norm(residuals, axis=0)
            best = int(np.argmax(norms))
            if norms[best] <= 0:
                raise NumericalError("failed to complete orthonormal basis")
            candidate = residuals[:, best]
            candidate -= u @ (u.T @ candidate)
            u[:, k] = candidate / np.linalg.norm(candidate)
    return u, sigma, v


def procrustes(a: CentroidMatrix, b: CentroidMatrix) -> np.ndarray:
    """Orthogonal R minimizing ||A R - B||_F; no centering, no scaling."""
    if a.emojis != b.emojis:
        raise InputError("centroid matrices must share the same emoji list")
    if a.rows.shape != b.rows.shape:
        raise InputError(
            f"dimension mismatch: {a.rows.shape} vs {b.rows.shape}"
        )
    if len(a.emojis) < 2:
        raise InputError("need at least 2 emojis for alignment")
    return procrustes_rotation(a.rows, b.rows)


def procrustes_rotation(
    a_rows: np.ndarray, b_rows: np.ndarray, center: bool = False
) -> np.ndarray:
    a_rows = np.asarray(a_rows, dtype=np.float64)
    b_rows = np.asarray(b_rows, dtype=np.float64)
    if center:
        a_rows = a_rows - a_rows.mean(axis=0)
        b_rows = b_rows - b_rows.mean(axis=0)
    u, _, v = jacobi_svd(a_rows.T @ b_rows)
    return u @ v.T


# ---------------------------------------------------------------------------
# Scoring


@dataclass(frozen=True)
class AlignmentResult:
    rotation: np.ndarray
    mean_cosine: float
    nn_at: dict[int, float]
    permutation_p: Optional[float]
    excluded: tuple[str, ...]  # zero-norm centroids left out of scoring


def _cosine_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    dots = np.einsum("ij,ij->i", x, y)
    return dots / (nx * ny)


def score_alignment(
    a: CentroidMatrix,
    b: CentroidMatrix,
    rotation: np.ndarray,
    ks: Sequence[int] = (1, 2, 3, 4, 5),
) -> AlignmentResult:
    """Mean cosine of corresponding centroids and NN@k after rotating A.

    NN@k counts emoji i as a hit when B_i is among the k nearest rows of B to
    A_i R by cosine similarity; ties break by emoji codepoint order. Emojis
    with a zero-norm centroid on either side are excluded and reported.
    """
    if a.emojis != b.emojis:
        raise InputError("centroid matrices must share the same emoji list")
    mapped = a.rows @ rotation
    norm_a = np.linalg.norm(mapped, axis=1)
    norm_b = np.linalg.norm(b.rows, axis=1)
    keep = (norm_a > 0) & (norm_b > 0)
    excluded = tuple(e for e, ok in zip(a.emojis, keep) if not ok)
    mapped = mapped[keep]
    rows_b = b.rows[keep]
    emojis = [e for e, ok in zip(a.emojis, keep) if ok]
    n = len(emojis)
    if n == 0:
        raise NumericalError("no emojis left to score after exclusions")
    mean_cos = float(_cosine_rows(mapped, rows_b).mean())

    unit_map = mapped / np.linalg.norm(mapped, axis=1, keepdims=True)
    unit_b = rows_b / np.linalg.norm(rows_b, axis=1, keepdims=True)
    sims = unit_map @ unit_b.T  # (n, n): cos(A_i R, B_j)
    keys = [_codepoint_key(e) for e in emojis]
    nn_at: dict[int, float] = {}
    valid_ks = sorted({int(k) for k in ks})
    if any(k < 1 for k in valid_ks):
        raise InputError("k values must be >= 1")
    ranks = np.empty(n, dtype=np.int64)
    for i in range(n):
        order = sorted(range(n), key=lambda j: (-sims[i, j], keys[j]))
        ranks[i] = order.index(i) + 1
    for k in valid_ks:
        nn_at[k] = float((ranks <= min(k, n)).mean())
    return AlignmentResult(
        rotation=rotation,
        mean_cosine=mean_cos,
        nn_at=nn_at,
        permutation_p=None,
        excluded=excluded,
    )


def alignment_permutation_test(
    a: CentroidMatrix,
    b: CentroidMatrix,
    n_perm: int = 1000,
    seed: int = 0,
) -> float:
    """Re-pair rows of B at random, re-run Procrustes, compare mean cosine.

    p = (1 + #{permuted mean cosine >= observed}) / (n_perm + 1).
    """
    if n_perm < 1:
        raise InputError("n_perm must be >= 1")
    observed = score_alignment(a, b, procrustes(a, b), ks=(1,)).mean_cosine
    n = len(b.emojis)
    extreme = 0
    for r in range(n_perm):
        gen = Xoshiro256(derive_seed(seed, r))
        perm = gen.permutation(n)
        shuffled = CentroidMatrix(
            emojis=b.emojis, rows=b.rows[perm], support=b.support[perm]
        )
        rotation = procrustes(a, shuffled)
        null = score_alignment(a, shuffled, rotation, ks=(1,)).mean_cosine
        if null >= observed:
            extreme += 1
    return (1 + extreme) / (n_perm + 1)
