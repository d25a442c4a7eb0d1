"""Encode posts with a pretrained encoder and write the embedding file pair.

Output format (consumed by the analysis toolkit's ``align`` command):

* ``<prefix>.mat``: 16-byte little-endian header (magic ``EMB1``, u32 rows,
  u32 dim, u32 reserved) followed by row-major float32 vectors;
* ``<prefix>.idx.jsonl``: one metadata line (pooling mode, model, settings),
  then one ``{"post_id": ..., "row": ...}`` line per matrix row.

Sentence vectors are the mean of final-layer token vectors over non-padding
positions (``first_token`` pooling is available as an alternative). Posts
with identical normalized text reuse a single encoded vector, so duplicates
are bitwise identical and re-runs with a pinned encoder reproduce the files
exactly.
"""

from __future__ import annotations

import json
import struct
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sIII")

POOLING_MODES = ("mean", "first_token")

DEFAULT_MODEL = "xlm-roberta-base"


class ExportError(Exception):
    """Bad input file or job configuration."""


class EncoderLoadError(Exception):
    """The encoder could not be loaded (missing weights, no network, ...)."""


@dataclass
class ExportJob:
    input_path: str
    output_prefix: str
    model: str = DEFAULT_MODEL
    batch_size: int = 64
    max_length: int = 128
    pooling: str = "mean"
    normalize_input: bool = True

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ExportError("batch size must be >= 1")
        if self.max_length < 2:
            raise ExportError("max length must be >= 2")
        if self.pooling not in POOLING_MODES:
            raise ExportError(f"pooling must be one of {POOLING_MODES}")


@dataclass
class ExportResult:
    rows: int
    dim: int
    truncated: list[str] = field(default_factory=list)
    unique_texts: int = 0


def _read_posts(path: str) -> list[tuple[str, str]]:
    posts = []
    seen = set()
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path} line {line_no}: invalid JSON: {exc.msg}")
            if "id" not in record or "text" not in record or record["text"] is None:
                raise ExportError(f"{path} line {line_no}: missing id/text")
            post_id = str(record["id"])
            if post_id in seen:
                raise ExportError(f"{path} line {line_no}: duplicate id {post_id!r}")
            seen.add(post_id)
            posts.append((post_id, str(record["text"])))
    if not posts:
        raise ExportError(f"{path}: no posts")
    return posts


def _load_encoder(name: str):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(name)
        model = AutoModel.from_pretrained(name)
    except Exception as exc:
        raise EncoderLoadError(f"cannot load encoder {name!r}: {exc}") from exc
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def _pool(hidden, mask, pooling: str):
    import torch

    if pooling == "first_token":
        return hidden[:, 0, :]
    expanded = mask.unsqueeze(-1).to(hidden.dtype)
    summed = (hidden * expanded).sum(dim=1)
    counts = expanded.sum(dim=1).clamp(min=1.0)
    return summed / counts


def encode_posts(job: ExportJob, log=None) -> ExportResult:
    """Run the export job; returns shape and truncation diagnostics."""
    from .textnorm import normalize_text

    job.validate()
    log = log or (lambda message: print(message, file=sys.stderr))
    posts = _read_posts(job.input_path)
    tokenizer, model = _load_encoder(job.model)

    texts = []
    for post_id, raw in posts:
        text = normalize_text(raw) if job.normalize_input else raw
        texts.append(text if text else " ")

    unique: dict[str, int] = {}
    for text in texts:
        if text not in unique:
            unique[text] = len(unique)
    unique_list = list(unique)

    truncated = []
    for (post_id, _), text in zip(posts, texts):
        n_tokens = len(tokenizer(text, truncation=False)["input_ids"])
        if n_tokens > job.max_length:
            truncated.append(post_id)
    if truncated:
        log(
            f"warning: {len(truncated)} post(s) exceed max length {job.max_length} "
            f"and were truncated (first: {truncated[0]})"
        )

    vectors: Optional[np.ndarray] = None
    for start in range(0, len(unique_list), job.batch_size):
        batch = unique_list[start : start + job.batch_size]
        encoded = tokenizer(
            batch,
            padding=True,
            truncation=True,
            max_length=job.max_length,
            return_tensors="pt",
        )
        output = model(**encoded)
        pooled = _pool(output.last_hidden_state, encoded["attention_mask"], job.pooling)
        block = pooled.cpu().numpy().astype(np.float32)
        if vectors is None:
            vectors = np.empty((len(unique_list), block.shape[1]), dtype=np.float32)
        vectors[start : start + len(batch)] = block

    rows = np.empty((len(posts), vectors.shape[1]), dtype=np.float32)
    for i, text in enumerate(texts):
        rows[i] = vectors[unique[text]]

    _write_pair(job, posts, rows, truncated)
    return ExportResult(
        rows=len(posts),
        dim=int(rows.shape[1]),
        truncated=truncated,
        unique_texts=len(unique_list),
    )


def _write_pair(job: ExportJob, posts, rows: np.ndarray, truncated) -> None:
    with open(f"{job.output_prefix}.mat", "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows.shape[0], rows.shape[1], 0))
        fh.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())
    meta = {
        "meta": {
            "model": job.model,
            "pooling": job.pooling,
            "max_length": job.max_length,
            "normalized_input": job.normalize_input,
            "rows": rows.shape[0],
            "dim": int(rows.shape[1]),
            "truncated": len(truncated),
        }
    }
    with open(f"{job.output_prefix}.idx.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, ensure_ascii=False) + "\n")
        for row, (post_id, _) in enumerate(posts):
            fh.write(
                json.dumps({"post_id": post_id, "row": row}, ensure_ascii=False) + "\n"
            )
