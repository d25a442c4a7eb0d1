import pytest

from emojilab.divergence import build_distribution, jsd, align_on_union
from emojilab.errors import InputError
from emojilab.polarity import polarity_table
from emojilab.synth import EmojiProfile, SynthSpec, acceptance_spec, generate_pair

ROCKET, BEAR = "\U0001F680", "\U0001F43B"


def _basic_spec(**overrides):
    defaults = dict(
        emojis=(
            EmojiProfile(ROCKET, 1.0, 1.0, 0.9, 0.9),
            EmojiProfile(BEAR, 1.0, 1.0, 0.1, 0.1),
        ),
        n_posts=600,
    )
    defaults.update(overrides)
    return SynthSpec(**defaults)


class TestSpecValidation:
    def test_bad_theta_rejected(self):
        with pytest.raises(InputError, match="outside"):
            SynthSpec(
                emojis=(EmojiProfile(ROCKET, theta_a=1.5),), n_posts=10
            ).validate()

    def test_bad_overlap_rejected(self):
        with pytest.raises(InputError):
            _basic_spec(text_overlap=1.2).validate()

    def test_from_dict_round_trip(self):
        spec = SynthSpec.from_dict(
            {
                "n_posts": 100,
                "emojis": [{"emoji": ROCKET, "theta_a": 0.8, "theta_b": 0.8}],
            }
        )
        assert spec.n_posts == 100
        assert spec.emojis[0].emoji == ROCKET

    def test_from_dict_unknown_key(self):
        with pytest.raises(InputError):
            SynthSpec.from_dict({"bogus": 1, "emojis": [{"emoji": ROCKET}]})


class TestGeneration:
    def test_deterministic(self):
        spec = _basic_spec()
        a1, _ = generate_pair(spec, seed=3)
        a2, _ = generate_pair(spec, seed=3)
        assert [p.id for p in a1] == [p.id for p in a2]
        assert [p.text for p in a1] == [p.text for p in a2]

    def test_balanced_labels(self):
        a, b = generate_pair(_basic_spec(), seed=1)
        for posts in (a, b):
            n_pos = sum(1 for p in posts if p.label == "positive")
            assert n_pos == len(posts) // 2

    def test_identical_generators_give_small_jsd(self):
        spec = _basic_spec(text_overlap=1.0, n_posts=3000)
        a, b = generate_pair(spec, seed=2)
        da = build_distribution(a, top_k=10)
        db = build_distribution(b, top_k=10)
        p, q, _ = align_on_union(da, db)
        assert jsd(p, q) < 0.1

    def test_polarity_tracks_theta(self):
        a, _ = generate_pair(_basic_spec(n_posts=4000), seed=4)
        table = polarity_table(a)
        assert table[ROCKET].theta == pytest.approx(0.9, abs=0.06)
        assert table[BEAR].theta == pytest.approx(0.1, abs=0.06)

    def test_disjoint_text_vocabularies(self):
        spec = _basic_spec(text_overlap=0.0)
        a, b = generate_pair(spec, seed=5)
        words_a = {t for p in a for t in p.text.split() if t[0] not in "\U0001F680\U0001F43B"}
        words_b = {t for p in b for t in p.text.split() if t[0] not in "\U0001F680\U0001F43B"}
        text_a = {w for w in words_a if w.isascii()}
        text_b = {w for w in words_b if w.isascii()}
        assert not text_a & text_b

    def test_full_overlap_shares_vocabulary(self):
        spec = _basic_spec(text_overlap=1.0)
        a, b = generate_pair(spec, seed=6)
        text_a = {w for p in a for w in p.text.split() if w.isascii()}
        text_b = {w for p in b for w in p.text.split() if w.isascii()}
        assert text_a & text_b

    def test_timestamps_span_months(self):
        a, _ = generate_pair(_basic_spec(n_posts=2000, months=12), seed=7)
        months = {p.timestamp.month for p in a}
        assert len(months) == 12

    def test_prevalence_control(self):
        spec = _basic_spec(emoji_prevalence=0.5, n_posts=2000)
        a, _ = generate_pair(spec, seed=8)
        from emojilab.emoji import extract_emojis

        with_emoji = sum(1 for p in a if extract_emojis(p.text))
        assert with_emoji / len(a) == pytest.approx(0.5, abs=0.05)


class TestAcceptanceSpec:
    def test_planted_flip_encoded(self):
        spec = acceptance_spec(n_posts=100, planted_flip=BEAR)
        profile = {p.emoji: p for p in spec.emojis}[BEAR]
        assert profile.theta_a == 0.9 and profile.theta_b == 0.1

    def test_no_flip_by_default(self):
        spec = acceptance_spec(n_posts=100)
        assert all(p.theta_a == p.theta_b for p in spec.emojis)
