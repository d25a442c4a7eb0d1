"""How differently do two communities use emojis?

Generates a synthetic corpus pair whose emoji frequency profiles differ,
builds top-k distributions, and walks through the four similarity metrics.
Run: python demos/divergence_basics.py
"""

from emojilab import align_on_union, bhattacharyya, build_distribution, jsd, rbo, total_variation
from emojilab.divergence import descriptive_stats
from emojilab.synth import EmojiProfile, SynthSpec, generate_pair

spec = SynthSpec(
    emojis=(
        EmojiProfile("\U0001F680", freq_a=4.0, freq_b=1.0, theta_a=0.9, theta_b=0.9),
        EmojiProfile("\U0001F525", freq_a=2.0, freq_b=2.0, theta_a=0.8, theta_b=0.8),
        EmojiProfile("\U0001F48E", freq_a=1.0, freq_b=3.0, theta_a=0.7, theta_b=0.7),
        EmojiProfile("\U0001F4C9", freq_a=0.5, freq_b=2.0, theta_a=0.3, theta_b=0.3),
        EmojiProfile("\U0001F43B", freq_a=1.5, freq_b=0.5, theta_a=0.2, theta_b=0.2),
    ),
    n_posts=6000,
)
corpus_a, corpus_b = generate_pair(spec, seed=7)

print("Corpus A:", descriptive_stats(corpus_a))
print("Corpus B:", descriptive_stats(corpus_b))

dist_a = build_distribution(corpus_a, top_k=100)
dist_b = build_distribution(corpus_b, top_k=100)
p, q, union = align_on_union(dist_a, dist_b)
print(f"\nUnion vocabulary: {len(union)} emojis")
for emoji, pa, qa in zip(union, p, q):
    print(f"  {emoji}  A={pa:.3f}  B={qa:.3f}")

depth = min(len(dist_a.vocab), len(dist_b.vocab))
print("\nSimilarity metrics (higher JSD/TV = more divergent):")
print(f"  JSD = {jsd(p, q):.3f}")
print(f"  TV  = {total_variation(p, q):.3f}")
print(f"  BC  = {bhattacharyya(p, q):.3f}")
print(f"  RBO = {rbo(list(dist_a.vocab)[:depth], list(dist_b.vocab)[:depth], 0.9):.3f}")
