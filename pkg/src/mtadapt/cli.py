"""Pipeline driver: select, filter, align, augment, build, eval, report.

Every command reads a YAML config (flags override keys of the same name),
writes its outputs atomically under the output directory, and drops a
manifest recording input hashes, seeds, and parameters. No command mutates
its inputs, and rerunning with identical config and inputs reproduces
byte-identical files (manifests carry no timestamps).

Exit codes: 2 config, 3 data, 4 protocol.
"""

import argparse
import contextlib
import csv
import dataclasses
import glob
import hashlib
import json
import os
import re
import sys

from . import __version__
from .aligner import TranslationTable, extract_lexicon, train
from .aligner.kernels import KERNEL_NAME
from .augment import SyntheticPair, augment_word, discard_stats
from .config import (AlignerConfig, PipelineConfig, ProviderConfig,
                     check_input_paths, load_config)
from .corpus import (Origin, ParallelCorpus, Sentence, SentencePair,
                     load_corpus, merge_corpora, save_corpus)
from .ctxsearch import SearchConfig
from .embed import BuiltinProvider, ExternalProvider
from .errors import ConfigError, DataError, MtadaptError
from .metrics import EvalCorpus, report_csv_rows, score_report
from .seeding import derive_seed
from .sets import (build_set, parse_approach, per_reference_synthetics,
                   save_set, set_basename)
from .wordselect import EvaluationWord, sample_references, select_words, split_corpus

LABEL_RE = re.compile(r"^[A-Za-z0-9._-]+$")


# ---------------------------------------------------------------- plumbing

def _hash_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return "sha256:" + digest.hexdigest()


@contextlib.contextmanager
def _atomic(path: str):
    """Yield a temp path that replaces `path` only on success."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _write_json(path: str, payload) -> None:
    with _atomic(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")


def _write_jsonl(path: str, records) -> None:
    with _atomic(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            for record in records:
                f.write(json.dumps(record, sort_keys=True, ensure_ascii=False,
                                   separators=(",", ":")))
                f.write("\n")


def _read_jsonl(path: str) -> list:
    records = []
    try:
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    records.append(json.loads(line))
    except FileNotFoundError:
        raise DataError(f"missing pipeline file: {path} "
                        "(run the earlier stages first)") from None
    return records


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise DataError(f"missing pipeline file: {path} "
                        "(run the earlier stages first)") from None


def _write_csv(path: str, rows) -> None:
    with _atomic(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            csv.writer(f, lineterminator="\n").writerows(rows)


def _manifest(config: PipelineConfig, command: str, inputs: dict,
              outputs: list, parameters: dict) -> None:
    payload = {
        "command": command,
        "version": __version__,
        "seed": config.seed,
        "parameters": parameters,
        "inputs": {name: {"path": path, "digest": _hash_file(path)}
                   for name, path in sorted(inputs.items())},
        "outputs": {os.path.relpath(path, config.resolve(config.output_dir)):
                    _hash_file(path) for path in sorted(outputs)},
    }
    _write_json(config.out_path(f"{command}.json"), payload)


def _load_training(config: PipelineConfig) -> tuple[ParallelCorpus, dict]:
    paths = check_input_paths(config, "source", "target")
    corpus = load_corpus(paths["source"], paths["target"], Origin.GENUINE,
                         config.corpus.lowercase)
    if bool(config.corpus.synthetic_source) != bool(config.corpus.synthetic_target):
        raise ConfigError("synthetic_source and synthetic_target "
                          "must be given together")
    if config.corpus.synthetic_source:
        extra = check_input_paths(config, "synthetic_source", "synthetic_target")
        synthetic = load_corpus(extra["synthetic_source"],
                                extra["synthetic_target"], Origin.SYNTHETIC,
                                config.corpus.lowercase, first_id=len(corpus))
        corpus = merge_corpora(corpus, synthetic)
        paths.update(extra)
    return corpus, paths


def _load_words(config: PipelineConfig) -> list[EvaluationWord]:
    payload = _read_json(config.out_path("words.json"))
    return [EvaluationWord(entry["word"], entry["train_count"],
                           entry["test_count"], entry.get("source_word"))
            for entry in payload["words"]]


def _make_provider(config: PipelineConfig):
    if config.provider.kind == "external":
        return ExternalProvider(config.provider.address)
    return BuiltinProvider(dim=config.provider.dim,
                           window=config.provider.window, seed=config.seed)


def _heldout_pairs(config: PipelineConfig) -> dict:
    pairs = {}
    for record in _read_jsonl(config.out_path("split", "heldout.jsonl")):
        pairs[record["id"]] = SentencePair(
            record["id"], Sentence.parse(record["source"]),
            Sentence.parse(record["target"]), Origin(record["origin"]))
    return pairs


def _reference_map(config: PipelineConfig):
    """word -> [(pair, position)] in sampling order, from the split stage."""
    heldout = _heldout_pairs(config)
    references: dict[str, list] = {}
    for record in _read_jsonl(config.out_path("split", "refs.jsonl")):
        pair = heldout.get(record["pair_id"])
        if pair is None:
            raise DataError(f"refs.jsonl names pair {record['pair_id']} "
                            "absent from heldout.jsonl")
        references.setdefault(record["word"], []).append(
            (pair, record["position"]))
    if not references:
        raise DataError("refs.jsonl is empty")
    return references


# ---------------------------------------------------------------- commands

def cmd_select(config: PipelineConfig) -> int:
    train_corpus, input_paths = _load_training(config)
    test_paths = check_input_paths(config, "test_source", "test_target")
    test_corpus = load_corpus(test_paths["test_source"],
                              test_paths["test_target"], Origin.GENUINE,
                              config.corpus.lowercase)
    words = select_words(train_corpus, test_corpus, config.selection)

    words_json = config.out_path("words.json")
    _write_json(words_json, {
        "criteria": {
            "min_test_count": config.selection.min_test_count,
            "min_train_count": config.selection.min_train_count,
            "max_words": config.selection.max_words,
            "per_sentence": config.selection.per_sentence,
            "excluded": sorted(config.selection.exclusion_list),
        },
        "words": [w.as_dict() for w in words],
    })
    words_csv = config.out_path("words.csv")
    _write_csv(words_csv, [["word", "train_count", "test_count"]]
               + [[w.target_word, w.train_count, w.test_count] for w in words])

    inputs = dict(input_paths, **test_paths)
    if config.exclusion_path:
        inputs["exclusion_list"] = config.resolve(config.exclusion_path)
    _manifest(config, "select", inputs, [words_json, words_csv], {
        "min_test_count": config.selection.min_test_count,
        "min_train_count": config.selection.min_train_count,
        "max_words": config.selection.max_words,
        "per_sentence": config.selection.per_sentence,
    })
    print(f"selected {len(words)} evaluation words -> {words_json}")
    return 0


def cmd_filter(config: PipelineConfig) -> int:
    train_corpus, input_paths = _load_training(config)
    words = _load_words(config)
    split = split_corpus(train_corpus, words)

    filtered_src = config.out_path("split", "filtered.src")
    filtered_tgt = config.out_path("split", "filtered.tgt")
    with _atomic(filtered_src) as tmp_src, _atomic(filtered_tgt) as tmp_tgt:
        save_corpus(split.filtered_training, tmp_src, tmp_tgt)

    # augmentation candidates: the genuine-origin part of the filtered set
    genuine = split.filtered_training.subset(
        [p for p in split.filtered_training if p.origin is Origin.GENUINE])
    candidates_src = config.out_path("split", "candidates.src")
    candidates_tgt = config.out_path("split", "candidates.tgt")
    with _atomic(candidates_src) as tmp_src, _atomic(candidates_tgt) as tmp_tgt:
        save_corpus(genuine, tmp_src, tmp_tgt)

    heldout_path = config.out_path("split", "heldout.jsonl")
    seen = {}
    for word in split.evaluation_words:
        for pair_id in word.held_out:
            seen.setdefault(pair_id, []).append(word.target_word)
    heldout_records = []
    for pair_id in sorted(seen):
        pair = train_corpus[pair_id]
        heldout_records.append({
            "id": pair_id,
            "source": pair.source.text,
            "target": pair.target.text,
            "origin": pair.origin.value,
            "words": sorted(seen[pair_id]),
        })
    _write_jsonl(heldout_path, heldout_records)

    refs_path = config.out_path("split", "refs.jsonl")
    ref_records = []
    for word in split.evaluation_words:
        pool = split.held_out_pool[word.target_word]
        if len(pool) < config.references_per_word:
            raise DataError(
                f"word {word.target_word!r} has {len(pool)} held-out pairs, "
                f"needs references_per_word={config.references_per_word}")
        chosen = sample_references(pool, config.references_per_word,
                                   derive_seed(config.seed, "references",
                                               word.target_word))
        for pair in chosen:
            ref_records.append({
                "word": word.target_word,
                "pair_id": pair.id,
                "position": pair.target.tokens.index(word.target_word),
            })
    _write_jsonl(refs_path, ref_records)

    outputs = [filtered_src, filtered_tgt, candidates_src, candidates_tgt,
               heldout_path, refs_path]
    _manifest(config, "filter", input_paths, outputs, {
        "original_pairs": len(train_corpus),
        "filtered_pairs": len(split.filtered_training),
        "candidate_pairs": len(genuine),
        "distinct_held_out": split.distinct_held_out,
        "references_per_word": config.references_per_word,
        "per_word_pool": {w.target_word: len(split.held_out_pool[w.target_word])
                          for w in split.evaluation_words},
    })
    print(f"filtered {len(train_corpus)} -> {len(split.filtered_training)} pairs, "
          f"{split.distinct_held_out} held out")
    return 0


def cmd_align(config: PipelineConfig) -> int:
    train_corpus, input_paths = _load_training(config)
    filtered_src = config.out_path("split", "filtered.src")
    filtered_tgt = config.out_path("split", "filtered.tgt")
    if not (os.path.exists(filtered_src) and os.path.exists(filtered_tgt)):
        raise DataError("filtered corpus not found; run the filter command first")
    filtered = load_corpus(filtered_src, filtered_tgt)
    words = _load_words(config)

    unfiltered_table = train(train_corpus, config.aligner.iterations,
                             config.aligner.tension)
    filtered_table = train(filtered, config.aligner.iterations,
                           config.aligner.tension)
    lexicon = extract_lexicon(train_corpus, unfiltered_table, words)
    if lexicon.missing:
        raise DataError("no aligned source word found for: "
                        + ", ".join(lexicon.missing))

    unfiltered_path = config.out_path("tables", "unfiltered.tsv")
    with _atomic(unfiltered_path) as tmp:
        unfiltered_table.save_tsv(tmp)
    filtered_path = config.out_path("tables", "filtered.tsv")
    with _atomic(filtered_path) as tmp:
        filtered_table.save_tsv(tmp)
    lexicon_path = config.out_path("tables", "lexicon.json")
    _write_json(lexicon_path, {
        "entries": {word: {"source_word": entry.source_word,
                           "count": entry.count}
                    for word, entry in sorted(lexicon.entries.items())},
    })

    inputs = dict(input_paths,
                  filtered_source=filtered_src, filtered_target=filtered_tgt)
    _manifest(config, "align", inputs,
              [unfiltered_path, filtered_path, lexicon_path], {
                  "iterations": config.aligner.iterations,
                  "tension": config.aligner.tension,
                  "kernel": KERNEL_NAME,
                  "unfiltered_log_likelihoods": unfiltered_table.log_likelihoods,
                  "filtered_log_likelihoods": filtered_table.log_likelihoods,
              })
    print(f"trained tables ({KERNEL_NAME} kernel, "
          f"{config.aligner.iterations} iterations) -> {lexicon_path}")
    return 0


def cmd_augment(config: PipelineConfig) -> int:
    candidates_src = config.out_path("split", "candidates.src")
    candidates_tgt = config.out_path("split", "candidates.tgt")
    if not (os.path.exists(candidates_src) and os.path.exists(candidates_tgt)):
        raise DataError("candidate corpus not found; run the filter command first")
    candidates = load_corpus(candidates_src, candidates_tgt, Origin.GENUINE)
    table_path = config.out_path("tables", "filtered.tsv")
    if not os.path.exists(table_path):
        raise DataError("filtered table not found; run the align command first")
    table = TranslationTable.load_tsv(table_path,
                                      diagonal_tension=config.aligner.tension)
    lexicon_payload = _read_json(config.out_path("tables", "lexicon.json"))
    references = _reference_map(config)

    from .aligner import Lexicon, LexiconEntry
    lexicon = Lexicon()
    for word, entry in lexicon_payload["entries"].items():
        lexicon.entries[word] = LexiconEntry(entry["source_word"],
                                             entry["count"])

    provider = _make_provider(config)
    k = config.search_k or 3 * config.per_reference_target
    records = []
    per_word_discards = {}
    next_id = 0
    try:
        for word in sorted(references):
            synthetics, discards = augment_word(
                references[word], candidates, provider, table, lexicon,
                per_reference_target=config.per_reference_target, k=k,
                seed=derive_seed(config.seed, "augment", word),
                workers=config.workers, first_id=next_id)
            next_id += len(synthetics)
            per_word_discards[word] = discard_stats(discards)
            for synthetic in synthetics:
                records.append({
                    "id": synthetic.pair.id,
                    "word": word,
                    "reference_id": synthetic.provenance["reference_id"],
                    "rank": synthetic.provenance["rank"],
                    "source": synthetic.pair.source.text,
                    "target": synthetic.pair.target.text,
                    "provenance": synthetic.provenance,
                })
    finally:
        close = getattr(provider, "close", None)
        if close:
            close()

    synth_jsonl = config.out_path("synth", "synthetics.jsonl")
    _write_jsonl(synth_jsonl, records)
    synth_src = config.out_path("synth", "synthetics.src")
    synth_tgt = config.out_path("synth", "synthetics.tgt")
    with _atomic(synth_src) as tmp_src, _atomic(synth_tgt) as tmp_tgt:
        with open(tmp_src, "w", encoding="utf-8", newline="\n") as src, \
             open(tmp_tgt, "w", encoding="utf-8", newline="\n") as tgt:
            for record in records:
                src.write(record["source"] + "\n")
                tgt.write(record["target"] + "\n")
    totals = {reason: sum(stats[reason] for stats in per_word_discards.values())
              for reason in next(iter(per_word_discards.values()), {})}
    discards_path = config.out_path("synth", "discards.json")
    _write_json(discards_path, {"per_word": per_word_discards,
                                "total": totals})

    inputs = {"candidates_source": candidates_src,
              "candidates_target": candidates_tgt,
              "filtered_table": table_path,
              "lexicon": config.out_path("tables", "lexicon.json"),
              "refs": config.out_path("split", "refs.jsonl"),
              "heldout": config.out_path("split", "heldout.jsonl")}
    _manifest(config, "augment", inputs,
              [synth_jsonl, synth_src, synth_tgt, discards_path], {
                  "provider": getattr(provider, "name", config.provider.kind),
                  "dim": provider.dim,
                  "k": k,
                  "per_reference_target": config.per_reference_target,
                  "min_similarity": config.min_similarity,
              })
    print(f"synthesized {len(records)} pairs for {len(references)} words "
          f"-> {synth_jsonl}")
    return 0


def _synthetics_by_word(config: PipelineConfig, references: dict) -> dict:
    path = config.out_path("synth", "synthetics.jsonl")
    if not os.path.exists(path):
        return {}
    flat: dict[str, list] = {}
    for record in _read_jsonl(path):
        pair = SentencePair(record["id"], Sentence.parse(record["source"]),
                            Sentence.parse(record["target"]), Origin.SYNTHETIC)
        flat.setdefault(record["word"], []).append(
            SyntheticPair(pair, record["provenance"]))
    grouped = {}
    for word, items in flat.items():
        if word not in references:
            continue
        ref_pairs = [pair for pair, _ in references[word]]
        grouped[word] = per_reference_synthetics(ref_pairs, items)
    return grouped


def cmd_build(config: PipelineConfig) -> int:
    filtered_src = config.out_path("split", "filtered.src")
    filtered_tgt = config.out_path("split", "filtered.tgt")
    if not (os.path.exists(filtered_src) and os.path.exists(filtered_tgt)):
        raise DataError("filtered corpus not found; run the filter command first")
    filtered = load_corpus(filtered_src, filtered_tgt)
    references = _reference_map(config)
    fewest = min(len(items) for items in references.values())
    if max(config.schedule.steps) > fewest:
        raise ConfigError(
            f"schedule peaks at {max(config.schedule.steps)} occurrences but "
            f"some word has only {fewest} sampled references")
    synthetics = _synthetics_by_word(config, references)
    reference_pairs = {word: [pair for pair, _ in items]
                       for word, items in references.items()}

    sets_dir = config.out_path("sets")
    os.makedirs(sets_dir, exist_ok=True)
    manifests = {}
    outputs = []
    for approach in config.approaches:
        for step in config.schedule.steps:
            fset = build_set(approach, step, reference_pairs, synthetics,
                             filtered, config.seed)
            manifests[set_basename(fset)] = save_set(fset, sets_dir)
            outputs.extend([
                os.path.join(sets_dir, set_basename(fset) + ".src"),
                os.path.join(sets_dir, set_basename(fset) + ".tgt"),
                os.path.join(sets_dir, set_basename(fset) + ".json"),
            ])

    inputs = {"filtered_source": filtered_src, "filtered_target": filtered_tgt,
              "refs": config.out_path("split", "refs.jsonl"),
              "heldout": config.out_path("split", "heldout.jsonl")}
    synth_path = config.out_path("synth", "synthetics.jsonl")
    if os.path.exists(synth_path):
        inputs["synthetics"] = synth_path
    _manifest(config, "build", inputs, outputs, {
        "approaches": [a.label for a in config.approaches],
        "schedule": list(config.schedule.steps),
        "sets": manifests,
    })
    print(f"built {len(manifests)} fine-tuning sets -> {sets_dir}")
    return 0


def cmd_eval(config: PipelineConfig, hypotheses: str, label: str | None,
             approach: str | None, occurrences: int | None,
             references_path: str | None) -> int:
    if not os.path.exists(hypotheses):
        raise ConfigError(f"no such hypotheses file: {hypotheses}")
    if references_path is None:
        paths = check_input_paths(config, "test_target")
        references_path = paths["test_target"]
    elif not os.path.exists(references_path):
        raise ConfigError(f"no such references file: {references_path}")

    parsed = None
    if approach is not None:
        parsed = parse_approach(approach)
    if label is None:
        if parsed is None or occurrences is None:
            raise ConfigError("give --label, or --approach and --occurrences "
                              "so a label can be derived")
        label = f"{parsed.kind}_{parsed.ratio}_{occurrences}"
    if not LABEL_RE.match(label):
        raise ConfigError(f"label {label!r} may use letters, digits, . _ - only")

    words = [w.target_word for w in _load_words(config)]
    corpus = EvalCorpus.from_files(hypotheses, references_path)
    report = score_report(corpus, words, config.accuracy_mode)

    payload = {
        "label": label,
        "approach": parsed.kind if parsed else None,
        "ratio": parsed.ratio if parsed else None,
        "occurrences": occurrences,
        "scores": report,
        "inputs": {"hypotheses": _hash_file(hypotheses),
                   "references": _hash_file(references_path)},
    }
    json_path = config.out_path("eval", f"{label}.json")
    _write_json(json_path, payload)
    csv_path = config.out_path("eval", f"{label}.csv")
    _write_csv(csv_path, report_csv_rows(report))
    print(f"{label}: BLEU {report['overall_bleu']:.2f} "
          f"accuracy {report['overall_accuracy']:.4f} "
          f"overtranslation {report['overall_overtranslation']:.4f}")
    return 0


def cmd_report(config: PipelineConfig) -> int:
    pattern = config.out_path("eval", "*.json")
    rows = []
    for path in sorted(glob.glob(pattern)):
        payload = _read_json(path)
        if payload.get("approach") is None or payload.get("occurrences") is None:
            continue
        rows.append({
            "approach": payload["approach"],
            "ratio": payload["ratio"],
            "occurrences": payload["occurrences"],
            "bleu": payload["scores"]["overall_bleu"],
            "accuracy": payload["scores"]["overall_accuracy"],
            "overtranslation": payload["scores"]["overall_overtranslation"],
            "accuracy_mode": payload["scores"]["accuracy_mode"],
            "label": payload["label"],
        })
    if not rows:
        raise DataError(f"no labeled evaluation results under {pattern}")
    rows.sort(key=lambda r: (r["approach"], r["ratio"], r["occurrences"]))

    json_path = config.out_path("report.json")
    _write_json(json_path, {"rows": rows})
    csv_path = config.out_path("report.csv")
    csv_rows = [["approach", "ratio", "occurrences", "bleu", "accuracy",
                 "overtranslation"]]
    for row in rows:
        csv_rows.append([row["approach"], row["ratio"], row["occurrences"],
                         repr(row["bleu"]), repr(row["accuracy"]),
                         repr(row["overtranslation"])])
    _write_csv(csv_path, csv_rows)
    print(f"report over {len(rows)} runs -> {csv_path}")
    return 0


# ---------------------------------------------------------------- argparse

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtadapt",
        description="Few-shot MT vocabulary adaptation toolkit: hold out "
                    "rare words, synthesize training sentences for them, "
                    "build fine-tuning sets, and score the results.")
    parser.add_argument("--config", "-c", required=True,
                        help="YAML pipeline configuration")
    parser.add_argument("--output-dir", help="override config output_dir")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--workers", type=int, help="override config workers")
    parser.add_argument("--provider", choices=["builtin", "external"],
                        help="embedding provider kind")
    parser.add_argument("--provider-address",
                        help="external provider address (host:port or stdio:CMD)")
    parser.add_argument("--iterations", type=int,
                        help="override aligner.iterations")
    parser.add_argument("--tension", type=float,
                        help="override aligner.tension")
    parser.add_argument("--per-reference-target", type=int,
                        help="override augment.per_reference_target")
    parser.add_argument("--search-k", type=int, help="override search.k")
    parser.add_argument("--references-per-word", type=int,
                        help="override references_per_word")
    parser.add_argument("--accuracy-mode", choices=["micro", "macro"],
                        help="override accuracy_mode")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("select", help="choose the evaluation words")
    sub.add_parser("filter", help="hold out their sentence pairs")
    sub.add_parser("align", help="train translation tables and the lexicon")
    sub.add_parser("augment", help="synthesize sentences for each word")
    sub.add_parser("build", help="assemble fine-tuning sets")
    p_eval = sub.add_parser("eval", help="score hypothesis translations")
    p_eval.add_argument("--hypotheses", required=True,
                        help="tokenized hypothesis file, one per test sentence")
    p_eval.add_argument("--label", help="name for this evaluation run")
    p_eval.add_argument("--approach",
                        help="approach label, e.g. augmented(20)")
    p_eval.add_argument("--occurrences", type=int,
                        help="occurrence count c of the evaluated set")
    p_eval.add_argument("--references",
                        help="override the reference file (default: corpus.test_target)")
    sub.add_parser("report", help="merge evaluation runs into one table")
    return parser


def _apply_overrides(config: PipelineConfig, args) -> PipelineConfig:
    if args.output_dir is not None:
        # relative override is relative to the caller, not the config file
        config.output_dir = os.path.abspath(args.output_dir)
    if args.seed is not None:
        config.seed = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("workers must be >= 1")
        config.workers = args.workers
    if args.provider is not None or args.provider_address is not None:
        kind = args.provider or config.provider.kind
        address = args.provider_address or config.provider.address
        if args.provider_address and args.provider is None:
            kind = "external"
        config.provider = ProviderConfig(kind=kind, address=address,
                                         dim=config.provider.dim,
                                         window=config.provider.window)
    if args.iterations is not None or args.tension is not None:
        config.aligner = AlignerConfig(
            iterations=args.iterations if args.iterations is not None
            else config.aligner.iterations,
            tension=args.tension if args.tension is not None
            else config.aligner.tension)
    if args.per_reference_target is not None:
        if args.per_reference_target < 1:
            raise ConfigError("per_reference_target must be >= 1")
        config.per_reference_target = args.per_reference_target
    if args.search_k is not None:
        if args.search_k < 1:
            raise ConfigError("search.k must be >= 1")
        config.search_k = args.search_k
    if args.references_per_word is not None:
        if args.references_per_word < 1:
            raise ConfigError("references_per_word must be >= 1")
        config.references_per_word = args.references_per_word
    if args.accuracy_mode is not None:
        config.accuracy_mode = args.accuracy_mode
    return config


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        os.makedirs(config.resolve(config.output_dir), exist_ok=True)
        if args.command == "select":
            return cmd_select(config)
        if args.command == "filter":
            return cmd_filter(config)
        if args.command == "align":
            return cmd_align(config)
        if args.command == "augment":
            return cmd_augment(config)
        if args.command == "build":
            return cmd_build(config)
        if args.command == "eval":
            return cmd_eval(config, args.hypotheses, args.label,
                            args.approach, args.occurrences, args.references)
        if args.command == "report":
            return cmd_report(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except MtadaptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
