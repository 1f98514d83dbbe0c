"""Acceptance suite: one test per release criterion.

Each test records a PASS/FAIL line (with its runtime against the stated
bound); the lines are printed in the terminal summary of every pytest run.
"""
import functools
import hashlib
import json
import math
import os
import shutil
import time

import numpy as np
import pytest
import yaml

from conftest import (ACCEPTANCE_RESULTS, CountingProvider, make_corpus,
                      make_pair, oracle_bleu, oracle_word_counts)
from test_cli import write_config, write_corpora
from mtadapt.aligner import (NULL_TOKEN, Alignment, Lexicon, LexiconEntry,
                             alignment_posteriors, train, uniform_table)
from mtadapt.augment import (DiscardRecord, augment_word, containment_ok,
                             substitute)
from mtadapt.cli import main
from mtadapt.corpus import (Origin, ParallelCorpus, Sentence, SentencePair,
                            save_corpus)
from mtadapt.ctxsearch import (ContextMatch, SearchConfig, exhaustive_search,
                               search_contexts)
from mtadapt.embed import BuiltinProvider
from mtadapt.errors import DataError
from mtadapt.fixtures import (ISLAND_REFERENCE, ISLAND_WORD, PlantedWord,
                              ToyLanguageSpec, curated_words, generate,
                              generate_adaptation_fixture,
                              island_candidate_corpus)
from mtadapt.metrics import EvalCorpus, corpus_bleu, over_translation, word_accuracy
from mtadapt.wordselect import EvaluationWord, split_corpus


def criterion(name, bound_seconds=None):
    """Run the test body, then record one PASS/FAIL line for the criterion."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException:
                ACCEPTANCE_RESULTS.append(f"[acceptance] FAIL {name}")
                raise
            took = time.perf_counter() - start
            in_bound = bound_seconds is None or took < bound_seconds
            bound = "" if bound_seconds is None else f", bound {bound_seconds}s"
            verdict = "PASS" if in_bound else "FAIL"
            ACCEPTANCE_RESULTS.append(
                f"[acceptance] {verdict} {name} ({took:.1f}s{bound})")
            assert in_bound, f"{name}: {took:.1f}s exceeded {bound_seconds}s"
        return wrapper
    return deco


# --------------------------------------------------- 1. protocol arithmetic

@criterion("protocol arithmetic: set sizes track r*n_ref over the schedule", 60)
def test_protocol_arithmetic(tmp_path):
    words = curated_words()
    assert len(words) == 96
    spec = ToyLanguageSpec(vocab_size=20, n_pairs=40_000, length_range=(4, 9),
                           seed=31)
    planted = [PlantedWord(f"xs{i:02d}", w, train_occurrences=20,
                           test_occurrences=3) for i, w in enumerate(words)]
    train_c, test_c = generate_adaptation_fixture(spec, planted,
                                                  n_test_pairs=400)
    save_corpus(train_c, tmp_path / "train.src", tmp_path / "train.tgt")
    save_corpus(test_c, tmp_path / "test.src", tmp_path / "test.tgt")
    cfg = tmp_path / "config.yaml"
    cfg.write_text(yaml.safe_dump({
        "corpus": {"source": "train.src", "target": "train.tgt",
                   "test_source": "test.src", "test_target": "test.tgt"},
        "seed": 11,
        "selection": {"min_test_count": 3, "min_train_count": 20,
                      "max_words": 96},
        "references_per_word": 20,
        "approaches": ["finetune", "randompad(20)", "augmented(20)",
                       "half(20)"],
        "schedule": [1, 2, 3, 5, 10, 15, 20],
    }), encoding="utf-8")
    argv = ["--config", str(cfg)]
    assert main(argv + ["select"]) == 0
    assert main(argv + ["filter"]) == 0

    selected = json.loads((tmp_path / "out" / "words.json").read_text())
    assert [w["word"] for w in selected["words"]] == sorted(words)
    assert all(w["train_count"] == 20 for w in selected["words"])

    # synthetic pool: 19 fabricated sentences per sampled reference
    refs = [json.loads(line) for line in
            (tmp_path / "out" / "split" / "refs.jsonl").read_text().splitlines()]
    assert len(refs) == 96 * 20
    synth_dir = tmp_path / "out" / "synth"
    synth_dir.mkdir()
    with open(synth_dir / "synthetics.jsonl", "w", encoding="utf-8") as f:
        for seq, ref in enumerate(r for ref in refs for r in [ref] * 19):
            rank = seq % 19
            record = {
                "id": 1_000_000 + seq,
                "word": ref["word"],
                "reference_id": ref["pair_id"],
                "rank": rank,
                "source": f"sc{rank} xsrc tail",
                "target": f"tc{rank} {ref['word']} tail",
                "provenance": {
                    "reference_id": ref["pair_id"], "rank": rank,
                    "pair_id": ref["pair_id"], "position": 1,
                    "span_start": 1, "replaced_span": ["xsrc"],
                    "word": ref["word"], "source_word": "xsrc",
                    "similarity": 1.0 - rank / 19,
                },
            }
            f.write(json.dumps(record, sort_keys=True) + "\n")

    assert main(argv + ["build"]) == 0
    manifest = json.loads((tmp_path / "out" / "build.json").read_text())
    sets = manifest["parameters"]["sets"]
    assert len(sets) == 4 * 7

    # 96 words at three occurrences each: 288 reference sentences
    fin3 = sets["finetune_1_3"]
    assert fin3["dedup_merged"] == 0
    assert fin3["counts"] == {"reference": 288, "synthetic": 0, "random": 0}
    assert fin3["total"] == 288

    # mixed set at one occurrence: 1 reference + 10 synthetic + 9 random
    # sentences per word
    half1 = sets["half_20_1"]
    assert half1["counts"] == {"reference": 96, "synthetic": 960,
                               "random": 864}
    assert half1["total"] == 20 * 96

    # exact ratio arithmetic across every approach and schedule step
    for entry in sets.values():
        c = entry["occurrences"]
        assert entry["nominal_references"] == 96 * c
        assert entry["dedup_merged"] == 0
        assert entry["total"] == entry["ratio"] * 96 * c
        counts = entry["counts"]
        assert counts["reference"] + counts["synthetic"] + counts["random"] \
            == entry["total"]


# ------------------------------------------------------- 2. filter soundness

@criterion("filter soundness: no leaked occurrences, exact partition", 60)
def test_filter_soundness():
    spec = ToyLanguageSpec(vocab_size=30, n_pairs=100_000, length_range=(4, 9),
                           seed=77)
    planted = [PlantedWord(f"ps{i:02d}", f"pw{i:02d}", train_occurrences=8,
                           test_occurrences=2) for i in range(50)]
    train_c, _ = generate_adaptation_fixture(spec, planted, n_test_pairs=200)
    words = [EvaluationWord(f"pw{i:02d}", 8, 2) for i in range(50)]
    split = split_corpus(train_c, words)

    eval_words = {w.target_word for w in words}
    for pair in split.filtered_training:
        assert not eval_words.intersection(pair.target.tokens)
    assert len(split.filtered_training) + split.distinct_held_out \
        == len(train_c)
    assert split.distinct_held_out == 50 * 8
    assert {w: len(pool) for w, pool in split.held_out_pool.items()} \
        == {w.target_word: 8 for w in words}


# --------------------------------------------------------- 3. aligner oracle

@criterion("aligner: hand posteriors, monotone likelihood, full recovery", 10)
def test_aligner_oracle():
    # single pair, uniform start: NULL and the one source token split the
    # posterior evenly, and the first-iteration likelihood is exactly 0
    corpus = make_corpus(("x", "y"))
    posteriors = alignment_posteriors(corpus[0], uniform_table(corpus))
    assert posteriors[0, 0] == 0.5
    assert posteriors[1, 0] == 0.5
    table = train(corpus, iterations=1)
    assert table.prob("x", "y") == 1.0
    assert table.prob(NULL_TOKEN, "y") == 1.0
    assert table.log_likelihoods == [0.0]

    # a bijective toy language is recovered exactly by row argmax
    fixture = generate(ToyLanguageSpec(vocab_size=20, n_pairs=150, seed=6))
    learned = train(fixture, iterations=5)
    lls = learned.log_likelihoods
    assert len(lls) == 5
    assert all(b - a >= -1e-12 for a, b in zip(lls, lls[1:]))
    best = {}
    for source, target, prob in learned.items():
        if source == NULL_TOKEN:
            continue
        if source not in best or prob > best[source][1]:
            best[source] = (target, prob)
    expected = {f"f{i:03d}": f"e{i:03d}" for i in range(20)}
    recovered = {s: t for s, (t, _) in best.items()}
    assert recovered == {s: t for s, t in expected.items() if s in recovered}
    assert len(recovered) == 20


# --------------------------------------------------- 4. augmentation soundness

@criterion("augmentation: zero-discard fill, planted discard reasons", 30)
def test_augmentation_soundness():
    candidates = generate(ToyLanguageSpec(vocab_size=12, n_pairs=80, seed=21,
                                          copy_language=True))
    table = train(candidates, iterations=5)
    references = [
        (make_pair(1000, "w001 w002 w003 w004", "w001 NEWWORD w003 w004"), 1),
        (make_pair(1001, "w005 w006 w007", "w005 NEWWORD w007"), 1),
    ]
    lexicon = Lexicon(entries={"NEWWORD": LexiconEntry("NEWSRC", 9)})
    synthetics, discards = augment_word(
        references, candidates, BuiltinProvider(dim=64), table, lexicon,
        per_reference_target=6, seed=3, first_id=0)
    assert discards == []
    assert len(synthetics) == 12
    for synthetic in synthetics:
        # independent containment re-scan, not just the stored flag
        assert synthetic.pair.target.tokens.count("NEWWORD") == 1
        assert "NEWSRC" in synthetic.pair.source.tokens
        assert synthetic.pair.origin is Origin.SYNTHETIC
        assert containment_ok(synthetic)
    assert [s.provenance["reference_id"] for s in synthetics] \
        == [1000] * 6 + [1001] * 6

    # planted adversarial alignments produce exactly the planted reasons
    candidate = make_pair(7, "a b c", "p q r")
    match = ContextMatch(7, 1, 0.5)
    gap = Alignment(frozenset({(0, 1), (2, 1)}), 7)
    assert substitute(match, candidate, gap, "Z", "z") \
        == DiscardRecord(7, "non_consecutive_alignment")
    empty = Alignment(frozenset(), 7)
    assert substitute(match, candidate, empty, "Z", "z") \
        == DiscardRecord(7, "no_aligned_source")
    present = make_pair(8, "a b c", "p q Z")
    linked = Alignment(frozenset({(1, 1)}), 8)
    assert substitute(ContextMatch(8, 1, 0.5), present, linked, "Z", "z") \
        == DiscardRecord(8, "w_already_present")
    swap = make_pair(9, "z b", "Z q")
    identity = Alignment(frozenset({(0, 0)}), 9)
    assert substitute(ContextMatch(9, 0, 0.5), swap, identity, "Z", "z") \
        == DiscardRecord(9, "degenerate")


# ---------------------------------------------------------- 5. metrics oracle

@criterion("metrics: brute-force oracle agreement on randomized corpora", 10)
def test_metrics_oracle():
    identity = EvalCorpus(tuple(
        (Sentence.parse(t), Sentence.parse(t))
        for t in ("a b c d e", "the w0 cat w0", "one two three four")))
    assert corpus_bleu(identity) == 100.0
    score = word_accuracy(identity, "w0")
    assert score.accuracy == 1.0
    assert score.overtranslation == 0.0

    rng = np.random.default_rng(2024)
    for _ in range(20):
        pairs = []
        for _ in range(int(rng.integers(3, 9))):
            hyp = [f"w{rng.integers(0, 5)}"
                   for _ in range(int(rng.integers(1, 13)))]
            ref = [f"w{rng.integers(0, 5)}"
                   for _ in range(int(rng.integers(1, 13)))]
            pairs.append((hyp, ref))
        corpus = EvalCorpus(tuple(
            (Sentence(tuple(h)), Sentence(tuple(r))) for h, r in pairs))
        assert corpus_bleu(corpus) == pytest.approx(oracle_bleu(pairs),
                                                    abs=1e-9)
        for i in range(5):
            word = f"w{i}"
            n_total, p_total, clipped, excess, ratios = \
                oracle_word_counts(pairs, word)
            if n_total == 0:
                with pytest.raises(DataError):
                    word_accuracy(corpus, word)
                continue
            score = word_accuracy(corpus, word)
            assert (score.n_total, score.p_total, score.p_clipped,
                    score.excess) == (n_total, p_total, clipped, excess)
            # the count identity holds on every run
            assert score.p_total == score.p_clipped + score.excess
            assert score.accuracy == clipped / n_total
            assert over_translation(corpus, word) == excess / n_total
            macro = word_accuracy(corpus, word, "macro")
            assert macro.accuracy == sum(ratios) / len(ratios)


# ------------------------------------------------- 6. context-search contract

@criterion("context search: determinism, call count, order, planted nearest", 10)
def test_context_search_contract():
    corpus = island_candidate_corpus()
    target = Sentence.parse(ISLAND_REFERENCE)
    position = target.tokens.index(ISLAND_WORD)
    reference = SentencePair(999, Sentence.parse("src"), target, Origin.GENUINE)

    # plant the provably nearest context: same sentence, different focus word
    planted_tokens = list(target.tokens)
    planted_tokens[position] = "Mindoro"
    planted = SentencePair(len(corpus), Sentence.parse("planted src"),
                           Sentence(tuple(planted_tokens)), Origin.GENUINE)
    pool = ParallelCorpus(list(corpus.pairs) + [planted])

    # the masked embedding cannot see the focus token, so the planted
    # near-duplicate context comes back at rank 1
    top = exhaustive_search(reference, position, pool,
                            BuiltinProvider(dim=64), k=5)
    assert top[0].pair_id == planted.id
    assert top[0].position == position
    assert top[0].similarity > 0.999999

    def run(seed):
        provider = CountingProvider(BuiltinProvider(dim=64))
        matches = search_contexts(reference, position, pool, provider,
                                  SearchConfig(k=5, seed=seed))
        return matches, provider.calls

    first, calls = run(seed=5)
    again, _ = run(seed=5)
    assert first == again
    # one call per eligible candidate plus one for the reference itself
    assert calls == len(pool) + 1
    assert first == sorted(first, key=lambda m: (-m.similarity, m.pair_id))
    assert len(first) == 5


# ------------------------------------------------- 7. end-to-end determinism

@criterion("end-to-end determinism: pipeline reruns are byte-identical")
def test_end_to_end_determinism(tmp_path):
    _, test_c = write_corpora(tmp_path)
    config = write_config(tmp_path)
    hyp = tmp_path / "identity.hyp"
    hyp.write_text("".join(p.target.text + "\n" for p in test_c),
                   encoding="utf-8")

    def run_all():
        for command in ("select", "filter", "align", "augment", "build"):
            assert main(["--config", config, command]) == 0
        assert main(["--config", config, "eval", "--hypotheses", str(hyp),
                     "--approach", "finetune", "--occurrences", "1"]) == 0
        assert main(["--config", config, "report"]) == 0
        digests = {}
        out_dir = tmp_path / "out"
        for root, _, files in os.walk(out_dir):
            for name in files:
                path = os.path.join(root, name)
                with open(path, "rb") as f:
                    digest = hashlib.sha256(f.read()).hexdigest()
                digests[os.path.relpath(path, out_dir)] = digest
        return digests

    first = run_all()
    shutil.rmtree(tmp_path / "out")
    second = run_all()
    assert second == first
    assert len(first) > 25
