"""Command-line entrypoint binding every analysis into subcommands.

Reports are JSON-first: each subcommand writes a JSON report embedding a run
manifest (argv, config snapshot, seeds, input digests, emoji data version,
toolkit version, wall clock); markdown and CSV renderings are projections of
that JSON via ``emojilab report``. Exit codes: 0 success, 2 input error,
3 numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import unicodedata
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .align import (
    alignment_permutation_test,
    compute_centroids,
    procrustes,
    read_embeddings,
    score_alignment,
)
from .divergence import (
    align_on_union,
    bhattacharyya,
    build_distribution,
    descriptive_stats,
    jsd,
    rbo,
    total_variation,
)
from .emoji import ZWJ_MODES, emoji_data_info, extract_emojis
from .errors import InputError, NumericalError
from .ingest import dedup, load_posts, make_split, save_posts
from .polarity import compare_polarity
from .rng import derive_seed, hash_tag
from .stats import ResamplePlan, percentile_interval, resample_indices
from .synth import SynthSpec, generate_pair
from .transfer import evaluate_predictions, run_transfer

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Config and manifest


def load_config(path: Optional[str]) -> dict:
    if path is None:
        path = os.environ.get("EMOJILAB_CONFIG")
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"config file {path}: {exc}")


def _opt(cli_value, config: dict, section: str, key: str, default):
    if cli_value is not None:
        return cli_value
    return config.get(section, {}).get(key, default)


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(args, config: dict, inputs: Sequence[str]) -> dict:
    digests = {}
    for path in inputs:
        if Path(path).exists():
            digests[str(path)] = _digest(path)
    return {
        "argv": list(getattr(args, "_argv", [])),
        "config": config,
        "seed": args.seed,
        "threads": args.threads,
        "inputs": digests,
        "emoji_data": emoji_data_info(),
        "unicodedata_version": unicodedata.unidata_version,
        "toolkit_version": __version__,
        "wall_clock_utc": datetime.now(timezone.utc).isoformat(),
    }


def write_report(path, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_ingest(args, config) -> int:
    posts, parse_report = load_posts(args.infile, strict=not args.lenient)
    for line_no, message in parse_report.warnings:
        print(f"warning: line {line_no}: {message}", file=sys.stderr)
    threshold = _opt(args.dedup_threshold, config, "ingest", "dedup_threshold", 3)
    deduped = dedup(posts, threshold)
    try:
        train, val, test = (int(x) for x in args.sizes.split(","))
    except ValueError:
        raise UsageError("--sizes expects train,val,test integers")
    sizes = {"train": train, "validation": val, "test": test}
    split = make_split(deduped, sizes, args.seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, posts_part in split.all_splits().items():
        save_posts(posts_part, outdir / f"{name}.jsonl", split=name)
    notes = []
    if val and train and abs(train / (train + val) - 0.8) > 1e-9:
        notes.append(
            "explicit sizes honored; train/validation ratio differs from 80/20"
        )
    payload = {
        "type": "ingest",
        "input_posts": parse_report.n_posts,
        "after_dedup": len(deduped),
        "dedup_threshold": threshold,
        "sizes": {k: len(v) for k, v in split.all_splits().items()},
        "notes": notes,
        "manifest": build_manifest(args, config, [args.infile]),
    }
    write_report(outdir / "ingest.json", payload)
    print(f"wrote splits to {outdir}")
    return 0


def _cmd_emoji_extract(args, config) -> int:
    mode = _opt(args.mode, config, "emoji", "zwj_mode", "default")
    if mode not in ZWJ_MODES:
        raise UsageError(f"--mode must be one of {ZWJ_MODES}")
    posts, _ = load_posts(args.infile)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for post in posts:
            record = {
                "id": post.id,
                "emojis": [t.canonical for t in extract_emojis(post.text, mode)],
            }
            out.write(json.dumps(record, ensure_ascii=False) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _divergence_cis(dist_a, dist_b, p, q, vocab, rank_a, rank_b, rbo_p, args, config):
    n_boot = args.bootstrap
    counts_a = np.array([dist_a.count_of(e) for e in vocab], dtype=np.float64)
    counts_b = np.array([dist_b.count_of(e) for e in vocab], dtype=np.float64)
    plan = ResamplePlan(
        unit="emoji",
        n_replicates=n_boot,
        master_seed=derive_seed(args.seed, hash_tag("divergence")),
    )
    idx = resample_indices(list(range(len(vocab))), plan)
    cis = {}
    reps = {"jsd": [], "tv": [], "bc": [], "rbo": []}
    rank_set_a = {e: i for i, e in enumerate(rank_a)}
    rank_set_b = {e: i for i, e in enumerate(rank_b)}
    for row in idx:
        ca, cb = counts_a[row], counts_b[row]
        sa, sb = ca.sum(), cb.sum()
        if sa > 0 and sb > 0:
            pa, pb = ca / sa, cb / sb
            reps["jsd"].append(jsd(pa, pb))
            reps["tv"].append(total_variation(pa, pb))
            reps["bc"].append(bhattacharyya(pa, pb))
        sampled = {vocab[i] for i in row}
        ra = [e for e in rank_a if e in sampled]
        rb = [e for e in rank_b if e in sampled]
        depth = min(len(ra), len(rb))
        if depth >= 1:
            reps["rbo"].append(rbo(ra[:depth], rb[:depth], rbo_p))
    for key, values in reps.items():
        if values:
            lo, hi = percentile_interval(np.asarray(values), 0.95)
            cis[key] = [lo, hi]
    return cis


def _cmd_divergence(args, config) -> int:
    top_k = _opt(args.top_k, config, "divergence", "top_k", 100)
    rbo_p = _opt(args.rbo_p, config, "divergence", "rbo_p", 0.9)
    zwj_mode = _opt(None, config, "emoji", "zwj_mode", "default")
    posts_a, _ = load_posts(args.a)
    posts_b, _ = load_posts(args.b)
    dist_a = build_distribution(posts_a, top_k, zwj_mode)
    dist_b = build_distribution(posts_b, top_k, zwj_mode)
    p, q, vocab = align_on_union(dist_a, dist_b)
    depth = min(len(dist_a.vocab), len(dist_b.vocab))
    rank_a = list(dist_a.vocab)[:depth]
    rank_b = list(dist_b.vocab)[:depth]
    payload = {
        "type": "divergence",
        "jsd": jsd(p, q),
        "tv": total_variation(p, q),
        "bc": bhattacharyya(p, q),
        "rbo": rbo(rank_a, rank_b, rbo_p),
        "rbo_truncated": rbo(rank_a, rank_b, rbo_p, extrapolate=False),
        "vocab_union_size": len(vocab),
        "rbo_persistence": rbo_p,
        "rbo_depth": depth,
        "top_k": top_k,
        "zwj_mode": zwj_mode,
        "stats_a": descriptive_stats(posts_a, zwj_mode).__dict__,
        "stats_b": descriptive_stats(posts_b, zwj_mode).__dict__,
        "manifest": build_manifest(args, config, [args.a, args.b]),
    }
    if args.bootstrap:
        payload["cis"] = _divergence_cis(
            dist_a, dist_b, p, q, vocab, rank_a, rank_b, rbo_p, args, config
        )
    write_report(args.out, payload)
    print(f"wrote {args.out}")
    return 0


def _cmd_align(args, config) -> int:
    n_samples = _opt(args.n, config, "align", "n", 500)
    ks = sorted({int(x) for x in args.k.split(",")}) if args.k else [1, 2, 3, 4, 5]
    store_a = read_embeddings(args.a_emb)
    store_b = read_embeddings(args.b_emb)
    posts_a, _ = load_posts(args.posts_a)
    posts_b, _ = load_posts(args.posts_b)
    zwj_mode = _opt(None, config, "emoji", "zwj_mode", "default")

    def counts(posts, store):
        ids = set(store.ids)
        out = {}
        for post in posts:
            if post.id not in ids:
                continue
            for e in {t.canonical for t in extract_emojis(post.text, zwj_mode)}:
                out[e] = out.get(e, 0) + 1
        return out

    counts_a = counts(posts_a, store_a)
    counts_b = counts(posts_b, store_b)
    shared = sorted(
        e
        for e in set(counts_a) & set(counts_b)
        if counts_a[e] >= n_samples and counts_b[e] >= n_samples
    )
    if len(shared) < 2:
        raise InputError(
            f"only {len(shared)} emojis have >= {n_samples} embedded posts in both corpora"
        )
    cm_a = compute_centroids(
        store_a, posts_a, shared, n_samples,
        derive_seed(args.seed, hash_tag("centroids:a")), zwj_mode=zwj_mode,
    )
    cm_b = compute_centroids(
        store_b, posts_b, shared, n_samples,
        derive_seed(args.seed, hash_tag("centroids:b")), zwj_mode=zwj_mode,
    )
    rotation = procrustes(cm_a, cm_b)
    result = score_alignment(cm_a, cm_b, rotation, ks)
    perm_p = None
    if args.perm:
        perm_p = alignment_permutation_test(
            cm_a, cm_b, n_perm=args.perm,
            seed=derive_seed(args.seed, hash_tag("align-perm")),
        )
    payload = {
        "type": "alignment",
        "n_emojis": len(shared),
        "n_samples": n_samples,
        "mean_cosine": result.mean_cosine,
        "nn_at": {str(k): v for k, v in result.nn_at.items()},
        "permutation_p": perm_p,
        "excluded": list(result.excluded),
        "direction": "a->b",
        "manifest": build_manifest(
            args, config,
            [f"{args.a_emb}.mat", f"{args.b_emb}.mat", args.posts_a, args.posts_b],
        ),
    }
    write_report(args.out, payload)
    print(f"wrote {args.out}")
    return 0


def _cmd_polarity(args, config) -> int:
    regime = {"platform": "platform_asset", "asset": "platform_asset",
              "language": "language"}.get(args.regime)
    if regime is None:
        raise UsageError("--regime must be platform, asset, or language")
    zwj_mode = _opt(None, config, "emoji", "zwj_mode", "default")
    posts_a, _ = load_posts(args.a)
    posts_b, _ = load_posts(args.b)
    cmp = compare_polarity(
        posts_a, posts_b, regime=regime, n_boot=args.boot, seed=args.seed,
        zwj_mode=zwj_mode,
    )
    payload = {
        "type": "polarity",
        "regime": regime,
        "n_emojis": len(cmp.records_a),
        "n_tail": sum(1 for r in cmp.records_a if r.in_tail),
        "rho_w": cmp.rho_w,
        "rho_w_threshold_only": cmp.rho_w_threshold_only,
        "maud": cmp.maud,
        "maud_w": cmp.maud_w,
        "flip_rate": cmp.flip_rate,
        "flip_w_pct": 100.0 * cmp.flip_rate_w,
        "flips": [f.emoji for f in cmp.flips],
        "manifest": build_manifest(args, config, [args.a, args.b]),
    }
    write_report(args.out, payload)
    if args.detail:
        with open(args.detail, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["emoji", "theta_a", "theta_b", "weight", "flip", "ci_lo", "ci_hi"]
            )
            for rec, weight, res in zip(cmp.records_a, cmp.weights, cmp.flip_results):
                writer.writerow(
                    [rec.emoji, f"{res.theta_a:.6f}", f"{res.theta_b:.6f}",
                     f"{weight:.6f}", int(res.is_flip),
                     f"{res.ci_lo:.6f}", f"{res.ci_hi:.6f}"]
                )
    print(f"wrote {args.out}")
    return 0


def _load_split(source_dir) -> "CorpusSplit":
    from .ingest import CorpusSplit

    source = Path(source_dir)
    parts = {}
    for name in ("train", "validation", "test"):
        path = source / f"{name}.jsonl"
        if not path.exists():
            raise InputError(f"missing split file {path}")
        parts[name], _ = load_posts(path)
    return CorpusSplit(
        train=parts["train"],
        validation=parts["validation"],
        test_in=parts["test"],
        test_out=None,
        seed=0,
    )


def _cmd_transfer_run(args, config) -> int:
    split = _load_split(args.source)
    target, _ = load_posts(args.target)
    report = run_transfer(
        split,
        target,
        args.modality,
        seed=args.seed,
        regime=args.regime,
        n_boot=args.boot,
        n_perm=args.perm,
        zwj_mode=_opt(None, config, "emoji", "zwj_mode", "default"),
    )
    payload = {"type": "transfer", **report.as_dict()}
    payload["manifest"] = build_manifest(args, config, [args.target])
    write_report(args.out, payload)
    print(f"wrote {args.out}")
    return 0


def _cmd_transfer_eval(args, config) -> int:
    report = evaluate_predictions(
        args.pred_in, args.pred_out, seed=args.seed,
        n_boot=args.boot, n_perm=args.perm,
    )
    payload = {"type": "transfer", **report.as_dict()}
    payload["manifest"] = build_manifest(args, config, [args.pred_in, args.pred_out])
    write_report(args.out, payload)
    print(f"wrote {args.out}")
    return 0


def _cmd_synth(args, config) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        raw = json.load(fh)
    spec = SynthSpec.from_dict(raw)
    posts_a, posts_b = generate_pair(spec, args.seed)
    save_posts(posts_a, args.out_a)
    save_posts(posts_b, args.out_b)
    print(f"wrote {args.out_a} ({len(posts_a)} posts), {args.out_b} ({len(posts_b)} posts)")
    return 0


# ---------------------------------------------------------------------------
# Markdown rendering

_MD_COLUMNS = {
    "divergence": ["JSD", "TV", "BC", "RBO", "|V|"],
    "alignment": ["Mean Cosine", "NN@1", "NN@2", "NN@3", "NN@4", "NN@5", "p"],
    "polarity": ["rho_w", "MAUD_w", "Flip_w (%)"],
    "transfer": ["Modality", "Model", "In-domain", "Gap [95% CI]", "p"],
}


def _fmt(value, digits=3):
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def render_markdown(payload: dict) -> str:
    kind = payload.get("type")
    if kind == "divergence":
        headers = list(_MD_COLUMNS["divergence"])
        cis = payload.get("cis", {})
        row = [
            _fmt(payload["jsd"]), _fmt(payload["tv"]),
            _fmt(payload["bc"]), _fmt(payload["rbo"]),
            str(payload["vocab_union_size"]),
        ]
        if cis:
            for key in ("jsd", "tv", "bc", "rbo"):
                headers.append(f"{key.upper()} 95% CI")
                interval = cis.get(key)
                row.append(
                    f"[{interval[0]:.3f}, {interval[1]:.3f}]" if interval else "-"
                )
        return _md_table(headers, [row])
    if kind == "alignment":
        nn = payload.get("nn_at", {})
        headers = ["Mean Cosine"] + [f"NN@{k}" for k in sorted(nn, key=int)] + ["p"]
        row = [_fmt(payload["mean_cosine"])]
        row += [_fmt(nn[k]) for k in sorted(nn, key=int)]
        row.append(_fmt(payload.get("permutation_p"), 4))
        return _md_table(headers, [row])
    if kind == "polarity":
        headers = list(_MD_COLUMNS["polarity"])
        row = [
            _fmt(payload["rho_w"]), _fmt(payload["maud_w"]),
            f"{payload['flip_w_pct']:.1f}",
        ]
        return _md_table(headers, [row])
    if kind == "transfer":
        headers = list(_MD_COLUMNS["transfer"])
        ci = payload["gap_ci"]
        row = [
            payload["modality"], payload["model"], _fmt(payload["acc_in"]),
            f"{payload['gap']:.3f} [{ci[0]:.3f}, {ci[1]:.3f}]",
            _fmt(payload["perm_p"], 4),
        ]
        return _md_table(headers, [row])
    raise InputError(f"cannot render report of type {kind!r}")


def _md_table(headers, rows) -> str:
    lines = ["| " + " | ".join(headers) + " |"]
    lines.append("|" + "|".join(" --- " for _ in headers) + "|")
    for row in rows:
        lines.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(lines) + "\n"


def _cmd_report(args, config) -> int:
    with open(args.source, encoding="utf-8") as fh:
        payload = json.load(fh)
    if args.format != "md":
        raise UsageError("only --format md is supported")
    text = render_markdown(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Parser wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="emojilab", description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--config", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, dedup, and split a corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dedup-threshold", type=int, default=None)
    p.add_argument("--sizes", required=True, help="train,val,test")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("emoji", help="emoji operations")
    emoji_sub = p.add_subparsers(dest="emoji_command", required=True)
    pe = emoji_sub.add_parser("extract")
    pe.add_argument("--in", dest="infile", required=True)
    pe.add_argument("--mode", choices=ZWJ_MODES, default=None)
    pe.add_argument("--out", default=None)
    pe.set_defaults(func=_cmd_emoji_extract)

    p = sub.add_parser("divergence", help="frequency distribution comparison")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--rbo-p", type=float, default=None)
    p.add_argument("--bootstrap", type=int, default=0)
    p.add_argument("--out", default="divergence.json")
    p.set_defaults(func=_cmd_divergence)

    p = sub.add_parser("align", help="centroid alignment")
    p.add_argument("--a-emb", required=True)
    p.add_argument("--b-emb", required=True)
    p.add_argument("--posts-a", required=True)
    p.add_argument("--posts-b", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", default="1,2,3,4,5")
    p.add_argument("--perm", type=int, default=1000)
    p.add_argument("--out", default="alignment.json")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("polarity", help="polarity consistency comparison")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--regime", required=True)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--detail", default=None, help="per-emoji CSV path")
    p.add_argument("--out", default="polarity.json")
    p.set_defaults(func=_cmd_polarity)

    p = sub.add_parser("transfer", help="zero-shot transfer experiments")
    transfer_sub = p.add_subparsers(dest="transfer_command", required=True)
    pr = transfer_sub.add_parser("run")
    pr.add_argument("--source", required=True, help="ingest output directory")
    pr.add_argument("--target", required=True, help="target test JSONL")
    pr.add_argument("--modality", required=True, choices=["E", "T", "TE"])
    pr.add_argument("--regime", default="custom")
    pr.add_argument("--boot", type=int, default=1000)
    pr.add_argument("--perm", type=int, default=1000)
    pr.add_argument("--out", default="transfer.json")
    pr.set_defaults(func=_cmd_transfer_run)
    pv = transfer_sub.add_parser("eval")
    pv.add_argument("--pred-in", required=True)
    pv.add_argument("--pred-out", required=True)
    pv.add_argument("--boot", type=int, default=1000)
    pv.add_argument("--perm", type=int, default=1000)
    pv.add_argument("--out", default="transfer.json")
    pv.set_defaults(func=_cmd_transfer_eval)

    p = sub.add_parser("report", help="render a JSON report as markdown")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--format", default="md")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate paired synthetic corpora")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args._argv = argv
        config = load_config(args.config)
        return args.func(args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 64
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
