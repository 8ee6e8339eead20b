"""Command-line entry point: ingest -> train -> extract -> dissect -> detect ->
evaluate -> report.

Every command reads and writes the documented file formats; a single JSON
config file supplies defaults and flags override it.  Exit codes: 0 on
success, 1 on usage or validation errors, 2 on internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import applications, baselines, compare, evaluate, extraction, synth
from .config import ToolConfig, load_config
from .corpus import (
    load_annotations,
    load_corpus,
    load_labels,
    write_annotations,
    write_corpus,
    write_labels,
)
from .embeddings import EmbeddingStore, load_word_vectors, save_word_vectors, train_embeddings
from .errors import ToolError
from .extraction import TrainingParams
from .tuples import dissect_all


class _Parser(argparse.ArgumentParser):
    """Argparse that reports usage errors through the ToolError channel (exit 1)."""

    def error(self, message):  # noqa: D401 - argparse API
        self.print_usage(sys.stderr)
        raise ToolError(message)


def _load_store(vectors_path: str, corpus) -> EmbeddingStore:
    """Load word vectors and fit frequencies from the corpus (needed by SIF)."""
    store = load_word_vectors(vectors_path)
    sentences = [sent for tok in corpus.tokenized().values() for sent in tok.sentences]
    return store.with_frequencies(sentences)


def _lexicon(cfg: ToolConfig) -> compare.IndicativeLexicon:
    if cfg.lexicon_path:
        return compare.load_lexicon(cfg.lexicon_path)
    return compare.IndicativeLexicon()


def _comparison_config(extractions, store, cfg: ToolConfig, exclude=()) -> compare.ComparisonConfig:
    tuples_by_id, _ = dissect_all(extractions)
    return compare.build_comparison_config(
        tuples_by_id,
        store,
        threshold=cfg.threshold,
        lexicon=_lexicon(cfg),
        sif_a=cfg.sif_a,
        exclude_slots=exclude,
    )


def _cmd_synth(args, cfg: ToolConfig) -> int:
    spec = synth.SynthSpec(
        size=args.size,
        redundancy_rate=args.redundancy_rate,
        paraphrase_rate=args.paraphrase_rate,
        near_rate=args.near_rate,
        n_projects=args.projects,
    )
    generated = synth.generate_synthetic_corpus(args.seed if args.seed is not None else cfg.seed, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(generated.corpus, out / "corpus.jsonl")
    write_annotations(generated.annotations, out / "annotations.json")
    write_labels(generated.labels, out / "labels.jsonl")
    pairs = {
        "redundant_pairs": [
            {"base": p.base_id, "derived": p.derived_id, "paraphrased": p.paraphrased}
            for p in generated.redundant_pairs
        ],
        "near_pairs": [
            {"base": p.base_id, "derived": p.derived_id, "differing_slot": p.differing_slot}
            for p in generated.near_pairs
        ],
    }
    (out / "pairs.json").write_text(json.dumps(pairs, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(generated.corpus)} cases, {len(generated.labels)} labels to {out}")
    return 0


def _cmd_preprocess(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    payload = {
        case_id: {"sentences": [list(s) for s in tok.sentences], "sep_sequence": list(tok.sep_sequence)}
        for case_id, tok in sorted(corpus.tokenized().items())
    }
    Path(args.out).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"tokenized {len(corpus)} cases into {args.out}")
    return 0


def _cmd_train_embeddings(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    sentences = [sent for tok in corpus.tokenized().values() for sent in tok.sentences]
    store = train_embeddings(
        sentences,
        dim=args.dim if args.dim is not None else cfg.embed_dim,
        window=args.window if args.window is not None else cfg.embed_window,
        epochs=args.epochs if args.epochs is not None else cfg.embed_epochs,
        seed=args.seed if args.seed is not None else cfg.seed,
    )
    save_word_vectors(store, args.out)
    print(f"trained {len(store.vectors)} word vectors (dim={store.dim}) into {args.out}")
    return 0


def _cmd_train_model(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    annotations = load_annotations(args.annotations, corpus)
    store = _load_store(args.vectors, corpus)
    params = TrainingParams(
        learning_rate=args.learning_rate if args.learning_rate is not None else cfg.learning_rate,
        epochs=args.epochs if args.epochs is not None else cfg.model_epochs,
        negative_ratio=args.neg_ratio if args.neg_ratio is not None else cfg.neg_ratio,
        seed=args.seed if args.seed is not None else cfg.seed,
    )
    model, trace = extraction.train_joint(
        corpus, annotations, store, params,
        c0_window=cfg.c0_window, c1_cap=cfg.c1_cap, max_span_len=cfg.span_max_len,
    )
    extraction.save_model(model, args.out)
    first, last = trace[0], trace[-1]
    print(
        f"trained model into {args.out} "
        f"(loss {first.total:.4f} -> {last.total:.4f} over {len(trace)} epochs)"
    )
    return 0


def _cmd_extract(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    store = _load_store(args.vectors, corpus)
    model = extraction.load_model(args.model)
    extractions = {
        case.id: extraction.extract(case, model, store, max_span_len=cfg.span_max_len)
        for case in corpus
    }
    tuples_by_id, flagged = dissect_all(extractions)
    extraction.write_extractions(extractions, args.out, tuples_by_id=tuples_by_id)
    print(f"extracted {len(extractions)} cases into {args.out} ({len(flagged)} without tuples)")
    return 0


def _load_extractions(path: str, corpus):
    """Extraction files and gold annotation files share one format."""
    return extraction.import_extractions(path, corpus)


def _cmd_detect(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    extractions = _load_extractions(args.extractions, corpus)
    store = _load_store(args.vectors, corpus)
    config = _comparison_config(extractions, store, cfg)
    result = compare.detect_redundancy(corpus, extractions, store, config, scope=cfg.scope)
    compare.write_verdicts(result, args.out)
    skipped_path = args.skipped or str(Path(args.out).with_suffix(".skipped.json"))
    compare.write_skipped(result.skipped, skipped_path)
    redundant = sum(1 for v in result.verdicts if v.redundant)
    print(
        f"judged {len(result.verdicts)} pairs ({redundant} redundant, "
        f"{len(result.skipped)} cases skipped) into {args.out}"
    )
    return 0


def _cmd_baseline(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    store = _load_store(args.vectors, corpus)
    result = baselines.wholetext_detect(corpus, store, threshold=cfg.threshold, scope=cfg.scope)
    compare.write_verdicts(result, args.out)
    redundant = sum(1 for v in result.verdicts if v.redundant)
    print(f"baseline judged {len(result.verdicts)} pairs ({redundant} redundant) into {args.out}")
    return 0


def _cmd_evaluate(args, cfg: ToolConfig) -> int:
    if args.mode == "detection":
        if not args.verdicts or not args.labels:
            raise ToolError("evaluate --mode detection requires --verdicts and --labels")
        verdicts = compare.load_verdicts(args.verdicts)
        labels = load_labels(args.labels)
        skipped = compare.load_skipped(args.skipped) if args.skipped else ()
        report = evaluate.detection_metrics(verdicts, labels, skipped)
        payload = {"detection": report.as_record()}
    else:
        if not (args.extractions and args.gold and args.corpus):
            raise ToolError("evaluate --mode extraction requires --corpus, --extractions and --gold")
        corpus = load_corpus(args.corpus)
        predicted = _load_extractions(args.extractions, corpus)
        gold = extraction.gold_extractions(corpus, load_annotations(args.gold, corpus))
        score = evaluate.extraction_metrics(predicted, gold)
        payload = {
            "entities": {c: r.as_record() for c, r in score.entity.items()},
            "entity_micro": score.entity_micro.as_record(),
            "relations": {c: r.as_record() for c, r in score.relation.items()},
            "relation_micro": score.relation_micro.as_record(),
        }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


_ABLATION_CATEGORIES = ("Component", "Behavior", "Prerequisite", "Manner", "Constraint")


def _cmd_ablate(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    extractions = _load_extractions(args.extractions, corpus)
    store = _load_store(args.vectors, corpus)
    labels = load_labels(args.labels, corpus)
    config = _comparison_config(extractions, store, cfg)
    drops = _ABLATION_CATEGORIES if args.drop == "all" else (args.drop,)

    def fmt(value):
        return f"{value:.3f}" if value is not None else "n/a"

    rows = []
    for drop in drops:
        result = evaluate.ablate(corpus, extractions, drop, store, config, labels, scope=cfg.scope)
        rows.append(
            {
                "dropped": drop,
                "precision": result.report.precision,
                "recall": result.report.recall,
                "f1": result.report.f1,
                "delta_precision": result.delta("precision"),
                "delta_recall": result.delta("recall"),
                "delta_f1": result.delta("f1"),
            }
        )
        print(
            f"without {drop:<13} P={fmt(result.report.precision)} "
            f"R={fmt(result.report.recall)} F1={fmt(result.report.f1)} "
            f"(dP={fmt(result.delta('precision'))}, dR={fmt(result.delta('recall'))}, "
            f"dF1={fmt(result.delta('f1'))})"
        )
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_apps(args, cfg: ToolConfig) -> int:
    corpus = load_corpus(args.corpus)
    extractions = _load_extractions(args.extractions, corpus)
    store = _load_store(args.vectors, corpus)
    config = _comparison_config(extractions, store, cfg)

    if args.action == "groups":
        groups = applications.group_by_prerequisite(extractions, store, config)
        payload: dict = {"prerequisite_groups": groups}
    elif args.action == "completeness":
        payload = {
            "missing_categories": {
                case_id: applications.completeness_check(ext)
                for case_id, ext in sorted(extractions.items())
            }
        }
    else:
        dependences = []
        ids = sorted(extractions)
        for id_a in ids:
            for id_b in ids:
                if id_a != id_b and applications.detect_dependence(
                    extractions[id_a], extractions[id_b], store, config
                ):
                    dependences.append({"prerequisite_case": id_a, "dependent_case": id_b})
        payload = {"method": "heuristic-component-manner-match", "dependences": dependences}

    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_report(args, cfg: ToolConfig) -> int:
    records = compare.load_verdicts(args.verdicts)
    skipped = compare.load_skipped(args.skipped) if args.skipped else ()
    result = compare.DetectionResult(
        verdicts=tuple(compare.verdict_from_record(r) for r in records),
        skipped=tuple(skipped),
    )
    text = compare.render_report(result)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote report for {len(records)} pairs to {args.out}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
    p.add_argument("--threshold", type=float, help="similarity threshold override")
    p.add_argument("--scope", choices=("per_project", "global"))
    p.add_argument("--lexicon-path", dest="lexicon_path")
    return p


def _build_parser() -> _Parser:
    parser = _Parser(prog="tuplecover", description=__doc__)
    parser.add_argument("--config", help="JSON config file with pipeline defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=50)
    p.add_argument("--redundancy-rate", type=float, default=0.3)
    p.add_argument("--paraphrase-rate", type=float, default=0.5)
    p.add_argument("--near-rate", type=float, default=0.2)
    p.add_argument("--projects", type=int, default=4)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("preprocess", help="tokenize a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("train-embeddings", help="train word vectors on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_train_embeddings)

    p = sub.add_parser("train-model", help="train the joint extraction model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--neg-ratio", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_train_model)

    p = sub.add_parser("extract", help="extract entities/relations/tuples")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("detect", help="detect redundant pairs by tuple covering")
    p.add_argument("--corpus", required=True)
    p.add_argument("--extractions", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--skipped", help="skipped-cases report path")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("baseline", help="whole-text cosine baseline detector")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("evaluate", help="score detection or extraction output")
    p.add_argument("--mode", choices=("detection", "extraction"), default="detection")
    p.add_argument("--verdicts")
    p.add_argument("--labels")
    p.add_argument("--skipped")
    p.add_argument("--corpus")
    p.add_argument("--extractions")
    p.add_argument("--gold")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ablate", help="re-run detection with one slot dropped")
    p.add_argument("--corpus", required=True)
    p.add_argument("--extractions", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--drop", default="all", choices=_ABLATION_CATEGORIES + ("all",))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("apps", help="grouping, completeness and dependence reports")
    p.add_argument("--action", required=True, choices=("groups", "completeness", "dependence"))
    p.add_argument("--corpus", required=True)
    p.add_argument("--extractions", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_apps)

    p = sub.add_parser("report", help="render a human-readable verdict report")
    p.add_argument("--verdicts", required=True)
    p.add_argument("--skipped")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    for subparser in sub.choices.values():
        _add_common(subparser)
    return parser


def _apply_flag_overrides(cfg: ToolConfig, args) -> ToolConfig:
    overrides = {}
    for key in ("threshold", "scope", "lexicon_path"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    return cfg.replace(**overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _apply_flag_overrides(load_config(args.config), args)
        return args.func(args, cfg)
    except (ToolError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
