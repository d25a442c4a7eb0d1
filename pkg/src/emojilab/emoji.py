"""Unicode-aware emoji extraction, normalization, and modality projection.

Text is segmented into extended grapheme clusters (UAX #29, via the `regex`
package's ``\\X``), so flags, keycaps, and ZWJ families arrive as single
clusters. A cluster counts as an emoji token when it contains an
Extended_Pictographic scalar, is a regional-indicator pair, or is a keycap
sequence; bare digits and ``#``/``*`` are not tokens.

Canonical tokens carry no skin-tone modifiers (U+1F3FB..U+1F3FF) and no
variation selectors (U+FE0E/U+FE0F). ZWJ handling is two-mode: ``default``
keeps a joined sequence as one token (modifiers stripped inside), ``literal``
deletes the joiners so the sequence decomposes into its component emojis.

The emoji property data is pinned by the installed `regex` build; the
detected Unicode data level is exposed as ``UNICODE_DATA_VERSION`` and
recorded in report metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import regex

from .errors import InputError
from .ingest import Post

ZWJ_MODES = ("default", "literal")

_CLUSTER_RE = regex.compile(r"\X")
_EXT_PICT_RE = regex.compile(r"\p{Extended_Pictographic}")

_ZWJ = 0x200D
_VS15, _VS16 = 0xFE0E, 0xFE0F
_KEYCAP_MARK = 0x20E3
_SKIN_LO, _SKIN_HI = 0x1F3FB, 0x1F3FF
_RI_LO, _RI_HI = 0x1F1E6, 0x1F1FF
_KEYCAP_BASES = set("0123456789#*")


def _detect_unicode_version() -> str:
    # Marker codepoints added to Extended_Pictographic at successive Unicode
    # releases; the highest one present identifies the bundled data level.
    markers = [
        ("13.0", "\U0001FAC0"),
        ("14.0", "\U0001FAE0"),
        ("15.0", "\U0001FAE8"),
        ("16.0", "\U0001FAE9"),
        ("17.0", "\U0001FAEA"),
    ]
    version = "12.0"
    for name, ch in markers:
        if _EXT_PICT_RE.match(ch):
            version = name
    return version


UNICODE_DATA_VERSION = _detect_unicode_version()


def emoji_data_info() -> dict:
    """Provenance of the emoji classification data, for report manifests."""
    return {
        "regex_version": regex.__version__,
        "unicode_emoji_data": UNICODE_DATA_VERSION,
    }


@dataclass(frozen=True)
class EmojiToken:
    canonical: str
    codepoints: tuple[int, ...]
    position: int  # byte offset of this token in the UTF-8 source text


def _is_skin(cp: int) -> bool:
    return _SKIN_LO <= cp <= _SKIN_HI


def _is_ri(cp: int) -> bool:
    return _RI_LO <= cp <= _RI_HI


def is_emoji_cluster(cluster: str) -> bool:
    """Emoji classification for one grapheme cluster."""
    if not cluster:
        return False
    if _EXT_PICT_RE.search(cluster):
        return True
    cps = [ord(c) for c in cluster]
    if len(cps) == 2 and _is_ri(cps[0]) and _is_ri(cps[1]):
        return True
    # Keycap: base, optional variation selector, combining keycap.
    if (
        cps[-1] == _KEYCAP_MARK
        and cluster[0] in _KEYCAP_BASES
        and all(cp in (_VS15, _VS16) for cp in cps[1:-1])
    ):
        return True
    return False


def normalize_emoji(cluster: str, zwj_mode: str = "default") -> list[str]:
    """Canonical token(s) for one emoji cluster.

    Skin-tone modifiers and variation selectors are removed anywhere in the
    cluster. In ``default`` mode a ZWJ sequence stays one token; in
    ``literal`` mode the joiners are deleted and each surviving component
    becomes its own token.
    """
    if zwj_mode not in ZWJ_MODES:
        raise InputError(f"unknown zwj_mode {zwj_mode!r}")
    if not is_emoji_cluster(cluster):
        raise InputError(f"not an emoji cluster: {cluster!r}")
    kept = [cp for cp in map(ord, cluster) if not (_is_skin(cp) or cp in (_VS15, _VS16))]
    if zwj_mode == "default":
        token = "".join(chr(cp) for cp in kept)
        return [token] if token else []
    parts: list[str] = []
    current: list[int] = []
    for cp in kept:
        if cp == _ZWJ:
            if current:
                parts.append("".join(map(chr, current)))
                current = []
        else:
            current.append(cp)
    if current:
        parts.append("".join(map(chr, current)))
    return [p for p in parts if is_emoji_cluster(p)]


def _cluster_spans(text: str):
    """(cluster, char_start, char_end) for every grapheme cluster."""
    for match in _CLUSTER_RE.finditer(text):
        yield match.group(), match.start(), match.end()


def extract_emojis(text: str, zwj_mode: str = "default") -> list[EmojiToken]:
    """Emoji tokens in textual order, normalized, with byte positions."""
    if zwj_mode not in ZWJ_MODES:
        raise InputError(f"unknown zwj_mode {zwj_mode!r}")
    tokens: list[EmojiToken] = []
    byte_pos = 0
    for cluster, start, end in _cluster_spans(text):
        if is_emoji_cluster(cluster):
            if zwj_mode == "default":
                for canonical in normalize_emoji(cluster, "default"):
                    tokens.append(
                        EmojiToken(
                            canonical=canonical,
                            codepoints=tuple(ord(c) for c in canonical),
                            position=byte_pos,
                        )
                    )
            else:
                # Components keep the byte offset of their own first scalar.
                sub_pos = byte_pos
                consumed: list[int] = []
                for part in _split_zwj_parts(cluster):
                    part_offset = sub_pos + sum(consumed)
                    consumed.extend(len(c.encode("utf-8")) for c in part)
                    canon = _canonical_or_none(part)
                    if canon:
                        tokens.append(
                            EmojiToken(
                                canonical=canon,
                                codepoints=tuple(ord(c) for c in canon),
                                position=part_offset,
                            )
                        )
                    consumed.append(len("‍".encode("utf-8")))
        byte_pos += len(cluster.encode("utf-8"))
    return tokens


def _split_zwj_parts(cluster: str) -> list[str]:
    return [p for p in cluster.split(chr(_ZWJ))]


def _canonical_or_none(part: str) -> str | None:
    kept = "".join(
        c for c in part if not (_is_skin(ord(c)) or ord(c) in (_VS15, _VS16))
    )
    if kept and is_emoji_cluster(kept):
        return kept
    return None


MODALITIES = ("E", "T", "TE")


def project_modality(post: Post, modality: str, zwj_mode: str = "default") -> str:
    """Input projection: E = emojis only, T = text only, TE = unchanged."""
    if modality not in MODALITIES:
        raise InputError(f"unknown modality {modality!r}")
    if modality == "TE":
        return post.text
    if modality == "E":
        return " ".join(t.canonical for t in extract_emojis(post.text, zwj_mode))
    pieces = [
        cluster
        for cluster, _, _ in _cluster_spans(post.text)
        if not is_emoji_cluster(cluster)
    ]
    return regex.sub(r"\s+", " ", "".join(pieces)).strip()
