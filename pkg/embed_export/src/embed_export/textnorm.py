"""The corpus normalization contract, applied before encoding.

Posts arrive as raw text in the shared JSONL schema; the analysis toolkit
normalizes on load (lowercase; URLs, @-mentions, and #-hashtags replaced by
placeholder tokens; whitespace collapsed; emojis and punctuation preserved).
The exporter encodes that same normalized form so embeddings line up with
what every downstream consumer analyzes.
"""

import re

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@[A-Za-z0-9_]+")
_HASHTAG_RE = re.compile(r"#\w+")
_WS_RE = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    s = raw.lower()
    s = _URL_RE.sub("<url>", s)
    s = _MENTION_RE.sub("<user>", s)
    s = _HASHTAG_RE.sub("<hashtag>", s)
    return _WS_RE.sub(" ", s).strip()
