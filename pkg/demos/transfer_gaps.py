"""Why emojis help models cross community boundaries.

Two communities share emoji polarity but write in completely disjoint
vocabularies. A text-only model collapses to chance out of domain; an
emoji-only model barely loses accuracy; text+emoji keeps most of its edge.
Run: python demos/transfer_gaps.py
"""

from emojilab.ingest import make_split
from emojilab.synth import acceptance_spec, generate_pair
from emojilab.transfer import run_transfer

spec = acceptance_spec(n_posts=8000, text_overlap=0.0)
corpus_a, corpus_b = generate_pair(spec, seed=99)

sizes = {"train": 3000, "validation": 300, "test": 800}
split_a = make_split(corpus_a, sizes, seed=1)
split_b = make_split(corpus_b, sizes, seed=2)

print("modality  in-domain  out-of-domain    gap   perm p")
for modality in ("E", "T", "TE"):
    report = run_transfer(
        split_a, split_b.test_in, modality, seed=3, n_boot=300, n_perm=500
    )
    print(
        f"   {modality:2s}      {report.acc_in:.3f}       {report.acc_out:.3f}"
        f"      {report.gap:+.3f}  {report.perm_p:.4f}"
    )

print(
    "\nText features never transfer here (disjoint vocabulary), emoji"
    "\nfeatures transfer almost losslessly, and the combined model keeps"
    "\nthe emoji channel as a safety net."
)
