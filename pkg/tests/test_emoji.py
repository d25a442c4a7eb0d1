import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emojilab.emoji import (
    EmojiToken,
    extract_emojis,
    is_emoji_cluster,
    normalize_emoji,
    project_modality,
)
from emojilab.errors import InputError
from emojilab.ingest import Post, normalize_text

ENGLAND = "\U0001F3F4\U000E0067\U000E0062\U000E0065\U000E006E\U000E0067\U000E007F"

# (name, text, expected tokens in default mode, expected tokens in literal mode)
CONFORMANCE = [
    # plain pictographs
    ("rocket", "\U0001F680", ["\U0001F680"], ["\U0001F680"]),
    ("two rockets", "to the moon \U0001F680\U0001F680",
     ["\U0001F680", "\U0001F680"], ["\U0001F680", "\U0001F680"]),
    ("fire between words", "moon\U0001F525now", ["\U0001F525"], ["\U0001F525"]),
    ("gem hands", "\U0001F48E\U0001F64C", ["\U0001F48E", "\U0001F64C"],
     ["\U0001F48E", "\U0001F64C"]),
    ("chart", "\U0001F4C8 up", ["\U0001F4C8"], ["\U0001F4C8"]),
    ("no emoji", "plain text 15% $btc", [], []),
    # skin tones
    ("thumbs medium", "\U0001F44D\U0001F3FD ok", ["\U0001F44D"], ["\U0001F44D"]),
    ("thumbs dark", "\U0001F44D\U0001F3FF", ["\U0001F44D"], ["\U0001F44D"]),
    ("wave light", "\U0001F44B\U0001F3FBhello", ["\U0001F44B"], ["\U0001F44B"]),
    ("ok medium light", "\U0001F44C\U0001F3FC", ["\U0001F44C"], ["\U0001F44C"]),
    ("muscle medium dark", "\U0001F4AA\U0001F3FE strong", ["\U0001F4AA"], ["\U0001F4AA"]),
    ("repeated toned", "\U0001F64C\U0001F3FD\U0001F64C\U0001F3FD",
     ["\U0001F64C", "\U0001F64C"], ["\U0001F64C", "\U0001F64C"]),
    ("lone skin tone", "x \U0001F3FD y", [], []),
    ("pointer toned", "☝\U0001F3FB", ["☝"], ["☝"]),
    # variation selectors
    ("red heart vs16", "❤️", ["❤"], ["❤"]),
    ("red heart bare", "❤", ["❤"], ["❤"]),
    ("check vs16", "✅️", ["✅"], ["✅"]),
    ("airplane vs15", "✈︎", ["✈"], ["✈"]),
    ("envelope vs16", "✉️ mail", ["✉"], ["✉"]),
    ("trademark vs16", "™️", ["™"], ["™"]),
    ("warning attached", "risk⚠️!", ["⚠"], ["⚠"]),
    ("star vs16", "⭐️", ["⭐"], ["⭐"]),
    # flags
    ("us flag", "\U0001F1FA\U0001F1F8 stocks",
     ["\U0001F1FA\U0001F1F8"], ["\U0001F1FA\U0001F1F8"]),
    ("adjacent flags", "\U0001F1FA\U0001F1F8\U0001F1EB\U0001F1F7",
     ["\U0001F1FA\U0001F1F8", "\U0001F1EB\U0001F1F7"],
     ["\U0001F1FA\U0001F1F8", "\U0001F1EB\U0001F1F7"]),
    ("jp flag", "\U0001F1EF\U0001F1F5", ["\U0001F1EF\U0001F1F5"], ["\U0001F1EF\U0001F1F5"]),
    ("flag mid text", "buy \U0001F1F9\U0001F1F7 lira",
     ["\U0001F1F9\U0001F1F7"], ["\U0001F1F9\U0001F1F7"]),
    ("non rgi pair", "\U0001F1E6\U0001F1E6",
     ["\U0001F1E6\U0001F1E6"], ["\U0001F1E6\U0001F1E6"]),
    ("lone regional indicator", "\U0001F1FA alone", [], []),
    ("england tags", ENGLAND, [ENGLAND], [ENGLAND]),
    ("black flag", "\U0001F3F4", ["\U0001F3F4"], ["\U0001F3F4"]),
    # ZWJ sequences
    ("family mwg", "\U0001F468‍\U0001F469‍\U0001F467",
     ["\U0001F468‍\U0001F469‍\U0001F467"],
     ["\U0001F468", "\U0001F469", "\U0001F467"]),
    ("family mwgb", "\U0001F468‍\U0001F469‍\U0001F467‍\U0001F466",
     ["\U0001F468‍\U0001F469‍\U0001F467‍\U0001F466"],
     ["\U0001F468", "\U0001F469", "\U0001F467", "\U0001F466"]),
    ("kiss", "\U0001F469‍❤️‍\U0001F48B‍\U0001F468",
     ["\U0001F469‍❤‍\U0001F48B‍\U0001F468"],
     ["\U0001F469", "❤", "\U0001F48B", "\U0001F468"]),
    ("couple heart", "\U0001F469‍❤️‍\U0001F469",
     ["\U0001F469‍❤‍\U0001F469"],
     ["\U0001F469", "❤", "\U0001F469"]),
    ("heart on fire", "❤️‍\U0001F525",
     ["❤‍\U0001F525"], ["❤", "\U0001F525"]),
    ("pirate flag", "\U0001F3F4‍☠️",
     ["\U0001F3F4‍☠"], ["\U0001F3F4", "☠"]),
    ("rainbow flag", "\U0001F3F3️‍\U0001F308",
     ["\U0001F3F3‍\U0001F308"], ["\U0001F3F3", "\U0001F308"]),
    ("technologist toned", "\U0001F469\U0001F3FD‍\U0001F4BB",
     ["\U0001F469‍\U0001F4BB"], ["\U0001F469", "\U0001F4BB"]),
    ("man shrug", "\U0001F937‍♂️",
     ["\U0001F937‍♂"], ["\U0001F937", "♂"]),
    ("woman pilot", "\U0001F469‍✈️",
     ["\U0001F469‍✈"], ["\U0001F469", "✈"]),
    ("handshake mixed tones", "\U0001FAF1\U0001F3FB‍\U0001FAF2\U0001F3FE",
     ["\U0001FAF1‍\U0001FAF2"], ["\U0001FAF1", "\U0001FAF2"]),
    ("zwj between letters", "a‍b", [], []),
    # keycaps
    ("keycap one", "1️⃣", ["1⃣"], ["1⃣"]),
    ("keycap hash", "#️⃣", ["#⃣"], ["#⃣"]),
    ("keycap star", "*️⃣", ["*⃣"], ["*⃣"]),
    ("keycap no vs", "0⃣", ["0⃣"], ["0⃣"]),
    ("two keycaps", "1️⃣2️⃣",
     ["1⃣", "2⃣"], ["1⃣", "2⃣"]),
    ("bare digit", "7", [], []),
    ("bare hash", "# tag", [], []),
    ("digits then emoji", "24\U0001F680", ["\U0001F680"], ["\U0001F680"]),
    # ordering and mixtures
    ("textual order", "\U0001F680 text \U0001F525 more \U0001F48E",
     ["\U0001F680", "\U0001F525", "\U0001F48E"],
     ["\U0001F680", "\U0001F525", "\U0001F48E"]),
    ("every occurrence", "\U0001F680\U0001F680\U0001F680",
     ["\U0001F680"] * 3, ["\U0001F680"] * 3),
    ("emoji between cjk", "日本\U0001F5FE株", ["\U0001F5FE"], ["\U0001F5FE"]),
    ("flag then family", "\U0001F1FA\U0001F1F8\U0001F468‍\U0001F469‍\U0001F467",
     ["\U0001F1FA\U0001F1F8", "\U0001F468‍\U0001F469‍\U0001F467"],
     ["\U0001F1FA\U0001F1F8", "\U0001F468", "\U0001F469", "\U0001F467"]),
    ("toned mid text", "go\U0001F44D\U0001F3FDgo", ["\U0001F44D"], ["\U0001F44D"]),
    ("keycap mid text", "vote #️⃣ now", ["#⃣"], ["#⃣"]),
    ("double exclamation", "‼️ alert", ["‼"], ["‼"]),
    ("interrobang", "⁉️", ["⁉"], ["⁉"]),
    ("copyright", "©️", ["©"], ["©"]),
    ("phone number", "call 911", [], []),
]


def test_conformance_fixture_size():
    assert len(CONFORMANCE) == 60


@pytest.mark.parametrize("name,text,expected,_", CONFORMANCE, ids=[c[0] for c in CONFORMANCE])
def test_conformance_default_mode(name, text, expected, _):
    got = [t.canonical for t in extract_emojis(text, "default")]
    assert got == expected


@pytest.mark.parametrize("name,text,_,expected", CONFORMANCE, ids=[c[0] for c in CONFORMANCE])
def test_conformance_literal_mode(name, text, _, expected):
    got = [t.canonical for t in extract_emojis(text, "literal")]
    assert got == expected


class TestNormalizeEmoji:
    def test_skin_tone_strip(self):
        assert normalize_emoji("\U0001F44D\U0001F3FF") == ["\U0001F44D"]

    def test_vs16_strip(self):
        assert normalize_emoji("❤️") == ["❤"]

    def test_zwj_modes(self):
        family = "\U0001F468‍\U0001F469‍\U0001F467"
        assert normalize_emoji(family, "default") == [family]
        assert normalize_emoji(family, "literal") == [
            "\U0001F468", "\U0001F469", "\U0001F467"
        ]

    def test_non_emoji_cluster_errors(self):
        with pytest.raises(InputError):
            normalize_emoji("a")

    def test_unknown_mode(self):
        with pytest.raises(InputError):
            normalize_emoji("\U0001F680", "weird")

    def test_idempotent_on_fixture(self):
        for _, text, default, literal in CONFORMANCE:
            for token in default:
                assert normalize_emoji(token, "default") == [token]
            for token in literal:
                assert normalize_emoji(token, "literal") == [token]


class TestPositions:
    def test_byte_offsets(self):
        tokens = extract_emojis("a\U0001F680b\U0001F525")
        assert [t.position for t in tokens] == [1, 6]

    def test_literal_component_offsets(self):
        family = "\U0001F468‍\U0001F469‍\U0001F467"
        tokens = extract_emojis(family, "literal")
        assert [t.position for t in tokens] == [0, 7, 14]

    def test_strictly_increasing(self):
        text = "\U0001F1FA\U0001F1F8 up \U0001F680\U0001F680 #️⃣"
        for mode in ("default", "literal"):
            positions = [t.position for t in extract_emojis(text, mode)]
            assert positions == sorted(positions)
            assert len(positions) == len(set(positions))

    def test_codepoints_match_canonical(self):
        for token in extract_emojis("\U0001F44D\U0001F3FD ❤️"):
            assert token.codepoints == tuple(ord(c) for c in token.canonical)


def _make_post(text):
    return Post(id="x", raw_text=text, text=normalize_text(text))


class TestProjectModality:
    def test_projection_rules(self):
        post = _make_post("buy now \U0001F680\U0001F525")
        assert project_modality(post, "E") == "\U0001F680 \U0001F525"
        assert project_modality(post, "T") == "buy now"
        assert project_modality(post, "TE") == "buy now \U0001F680\U0001F525"

    def test_emoji_free_post(self):
        post = _make_post("no emojis here")
        assert project_modality(post, "E") == ""
        assert project_modality(post, "T") == "no emojis here"

    def test_emoji_only_post(self):
        post = _make_post("\U0001F680\U0001F680")
        assert project_modality(post, "T") == ""
        assert project_modality(post, "E") == "\U0001F680 \U0001F680"

    def test_unknown_modality(self):
        with pytest.raises(InputError):
            project_modality(_make_post("x"), "Q")


EMOJI_ALPHABET = [
    "\U0001F680", "\U0001F525", "\U0001F48E", "❤️", "\U0001F44D\U0001F3FD",
    "\U0001F1FA\U0001F1F8", "1️⃣",
    "\U0001F468‍\U0001F469‍\U0001F467", "\U0001F3F4‍☠️",
    "✅", "\U0001F4C8", "\U0001F4B0",
]

emoji_text = st.lists(
    st.one_of(
        st.sampled_from(EMOJI_ALPHABET),
        st.text(alphabet="abc #@$.!:/12 　", min_size=1, max_size=8),
        st.just("http://x.co/a"),
        st.just("@joe"),
        st.just("#moon"),
    ),
    max_size=10,
).map("".join)


class TestProperties:
    @given(emoji_text)
    @settings(max_examples=300, deadline=None)
    def test_normalization_preserves_emoji_tokens(self, text):
        before = sorted(t.canonical for t in extract_emojis(text))
        after = sorted(t.canonical for t in extract_emojis(normalize_text(text)))
        assert before == after

    @given(emoji_text)
    @settings(max_examples=200, deadline=None)
    def test_modalities_consistent(self, text):
        post = _make_post(text)
        te = sorted(t.canonical for t in extract_emojis(project_modality(post, "TE")))
        e_proj = project_modality(post, "E")
        e = sorted(e_proj.split(" ")) if e_proj else []
        assert te == e
        assert extract_emojis(project_modality(post, "T")) == []

    @given(st.text(max_size=60))
    @settings(max_examples=300, deadline=None)
    def test_positions_strictly_increase(self, text):
        for mode in ("default", "literal"):
            positions = [t.position for t in extract_emojis(text, mode)]
            assert all(a < b for a, b in zip(positions, positions[1:]))

    @given(st.text(max_size=60))
    @settings(max_examples=300, deadline=None)
    def test_normalize_idempotent_fuzz(self, text):
        for mode in ("default", "literal"):
            for token in extract_emojis(text, mode):
                assert normalize_emoji(token.canonical, mode) == [token.canonical]
