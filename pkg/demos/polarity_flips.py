"""Planting and recovering a sentiment polarity flip.

One emoji is generated with opposite polarity in the two communities; the
bootstrap flip analysis should flag exactly that emoji and nothing else.
Run: python demos/polarity_flips.py
"""

from emojilab.polarity import compare_polarity
from emojilab.synth import acceptance_spec, generate_pair

FLIPPED = "\U0001F48E"  # gem: diamond hands vs bag holding

spec = acceptance_spec(n_posts=8000, planted_flip=FLIPPED, text_overlap=1.0)
corpus_a, corpus_b = generate_pair(spec, seed=21)

result = compare_polarity(corpus_a, corpus_b, regime="platform_asset", n_boot=1000, seed=5)

print(f"Shared emojis compared: {len(result.records_a)}")
print(f"Weighted Spearman rho_w = {result.rho_w:.3f}")
print(f"MAUD = {result.maud:.4f}   MAUD_w = {result.maud_w:.4f}")
print(f"Flip rate = {result.flip_rate:.1%}   weighted = {result.flip_rate_w:.1%}\n")

print("emoji  theta_a  theta_b  flip  95% CI of delta")
for rec_a, rec_b, flip in zip(result.records_a, result.records_b, result.flip_results):
    marker = "FLIP" if flip.is_flip else "    "
    print(
        f"  {rec_a.emoji}   {rec_a.theta:.3f}    {rec_b.theta:.3f}  {marker}"
        f"  [{flip.ci_lo:+.3f}, {flip.ci_hi:+.3f}]"
    )

assert {f.emoji for f in result.flips} == {FLIPPED}
print(f"\nRecovered the planted flip: {FLIPPED}")
