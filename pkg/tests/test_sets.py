import json

import pytest

from conftest import make_corpus, make_pair
from mtadapt.errors import ConfigError, DataError
from mtadapt.sets import (APPROACH_KINDS, TRAINER_DEFAULTS, ApproachSpec,
                          FinetuneSet, OccurrenceSchedule, SetMember,
                          build_set, parse_approach, per_reference_synthetics,
                          save_set, schedule_runs, set_basename, set_manifest)

# ------------------------------------------------------------- ApproachSpec


def test_approach_constructors_split_shares():
    assert ApproachSpec.finetune() == ApproachSpec("finetune", 1, 0, 0)
    assert ApproachSpec.randompad(2) == ApproachSpec("randompad", 2, 0, 1)
    assert ApproachSpec.randompad(20) == ApproachSpec("randompad", 20, 0, 19)
    assert ApproachSpec.augmented(20) == ApproachSpec("augmented", 20, 19, 0)
    # odd remainder favors the synthetic side
    assert ApproachSpec.half(20) == ApproachSpec("half", 20, 10, 9)
    assert ApproachSpec.half(3) == ApproachSpec("half", 3, 1, 1)


def test_approach_invariants():
    with pytest.raises(ConfigError, match="add up"):
        ApproachSpec("randompad", 2, 0, 2)
    with pytest.raises(ConfigError, match="ratio 1"):
        ApproachSpec("finetune", 2, 0, 1)
    with pytest.raises(ConfigError, match="no synthetic"):
        ApproachSpec("randompad", 3, 1, 1)
    with pytest.raises(ConfigError, match="no random"):
        ApproachSpec("augmented", 3, 1, 1)
    with pytest.raises(ConfigError, match="both"):
        ApproachSpec("half", 3, 2, 0)
    with pytest.raises(ConfigError, match="unknown"):
        ApproachSpec("magic", 2, 0, 1)
    with pytest.raises(ConfigError):
        ApproachSpec.half(2)
    with pytest.raises(ConfigError):
        ApproachSpec("randompad", 0, 0, -1)


def test_approach_labels():
    assert ApproachSpec.finetune().label == "finetune(1)"
    assert ApproachSpec.half(20).label == "half(20)"


def test_trainer_defaults_for_documented_regimes():
    assert ApproachSpec.finetune().trainer_defaults() == {
        "slow": {"epochs": 10, "learning_rate": 4e-5},
        "fast": {"epochs": 30, "learning_rate": 1e-4}}
    assert ApproachSpec.randompad(20).trainer_defaults() == {
        "slow": {"epochs": 10, "learning_rate": 1e-5},
        "fast": {"epochs": 30, "learning_rate": 4e-5}}
    assert (ApproachSpec.augmented(20).trainer_defaults()
            == ApproachSpec.half(20).trainer_defaults()
            == {"slow": {"epochs": 10, "learning_rate": 4e-6},
                "fast": {"epochs": 10, "learning_rate": 4e-5}})
    assert ApproachSpec.randompad(2).trainer_defaults() == \
        TRAINER_DEFAULTS[("randompad", 2)]
    assert ApproachSpec.randompad(5).trainer_defaults() is None


def test_parse_approach():
    assert parse_approach("finetune") == ApproachSpec.finetune()
    assert parse_approach("finetune(1)") == ApproachSpec.finetune()
    assert parse_approach("randompad(2)") == ApproachSpec.randompad(2)
    assert parse_approach("augmented(20)") == ApproachSpec.augmented(20)
    assert parse_approach("half(20)") == ApproachSpec.half(20)
    for bad in ("randompad", "bogus(3)", "half(x)", "finetune(2)",
                "augmented(20", "half"):
        with pytest.raises(ConfigError):
            parse_approach(bad)


def test_schedule_validation():
    assert OccurrenceSchedule().steps == (1, 2, 3, 5, 10, 15, 20)
    assert OccurrenceSchedule((1, 4)).steps == (1, 4)
    for bad in ((), (0, 1), (2, 2), (3, 1)):
        with pytest.raises(ConfigError):
            OccurrenceSchedule(bad)


# ------------------------------------------------------------------ fixture

WORDS = ("wa", "wb")


def sets_fixture(n_refs=5, n_synth=4, n_filtered=200):
    references = {
        w: [make_pair(10000 + 100 * wi + i, f"r{w}{i} src", f"{w} context {i}")
            for i in range(n_refs)]
        for wi, w in enumerate(WORDS)
    }
    synthetics = {
        w: [[make_pair(20000 + 1000 * wi + 10 * ri + s,
                       f"s{w}{ri}{s} src", f"{w} synth {ri} {s}")
             for s in range(n_synth)]
            for ri in range(n_refs)]
        for wi, w in enumerate(WORDS)
    }
    filtered = make_corpus(*((f"f{i} src", f"f{i} tgt word{i}")
                             for i in range(n_filtered)))
    return references, synthetics, filtered


def by_role(fset, role, word=None):
    return [m for m in fset.members
            if m.role == role and (word is None or m.word == word)]


# ----------------------------------------------------------------- build_set

def test_finetune_set_is_references_only():
    references, synthetics, filtered = sets_fixture()
    fset = build_set(ApproachSpec.finetune(), 3, references, synthetics,
                     filtered, seed=1)
    assert fset.counts() == {"reference": 6, "synthetic": 0, "random": 0}
    assert len(fset) == 6
    assert fset.nominal_references == 6
    assert fset.dedup_merged == 0
    got = {m.pair.id for m in by_role(fset, "reference", "wa")}
    assert got == {references["wa"][i].id for i in range(3)}


def test_sets_nest_as_occurrences_grow():
    references, synthetics, filtered = sets_fixture()
    small = build_set(ApproachSpec.finetune(), 2, references, synthetics,
                      filtered, seed=1)
    large = build_set(ApproachSpec.finetune(), 4, references, synthetics,
                      filtered, seed=1)
    small_ids = {m.pair.id for m in small.members}
    large_ids = {m.pair.id for m in large.members}
    assert small_ids < large_ids


def test_randompad_ratio_arithmetic():
    references, synthetics, filtered = sets_fixture()
    fset = build_set(ApproachSpec.randompad(3), 2, references, {}, filtered,
                     seed=1)
    assert fset.counts() == {"reference": 4, "synthetic": 0, "random": 8}
    assert len(fset) == 12
    assert len(fset) == 3 * fset.nominal_references - fset.dedup_merged
    random_ids = [m.pair.id for m in by_role(fset, "random")]
    assert len(set(random_ids)) == 8


def test_augmented_takes_rank_prefix():
    references, synthetics, filtered = sets_fixture()
    fset = build_set(ApproachSpec.augmented(3), 2, references, synthetics,
                     filtered, seed=1)
    assert fset.counts() == {"reference": 4, "synthetic": 8, "random": 0}
    got = sorted(m.pair.id for m in by_role(fset, "synthetic", "wa"))
    expected = sorted(synthetics["wa"][ri][s].id
                      for ri in range(2) for s in range(2))
    assert got == expected


def test_half_mixes_seeded_synthetic_subset_with_padding():
    references, synthetics, filtered = sets_fixture()
    spec = ApproachSpec.half(5)
    fset = build_set(spec, 2, references, synthetics, filtered, seed=1)
    assert fset.counts() == {"reference": 4, "synthetic": 8, "random": 8}
    assert len(fset) == 5 * 4
    available = {p.id for ref in synthetics["wa"][:2] for p in ref}
    chosen = {m.pair.id for m in by_role(fset, "synthetic", "wa")}
    assert chosen < available and len(chosen) == 4
    again = build_set(spec, 2, references, synthetics, filtered, seed=1)
    assert [m.pair.id for m in fset.members] == [m.pair.id for m in again.members]


def test_half_synthetic_subset_depends_on_seed():
    references, synthetics, filtered = sets_fixture(n_synth=12)
    spec = ApproachSpec.half(5)
    picks = set()
    for seed in range(6):
        fset = build_set(spec, 1, references, synthetics, filtered, seed=seed)
        picks.add(frozenset(m.pair.id for m in by_role(fset, "synthetic", "wa")))
    assert len(picks) > 1


def test_shared_reference_enters_once_but_keeps_companions():
    references, synthetics, filtered = sets_fixture()
    shared = make_pair(31337, "shared src", "wa wb here")
    references = {"wa": [shared] + references["wa"][:1],
                  "wb": [shared] + references["wb"][:1]}
    fset = build_set(ApproachSpec.randompad(2), 2, references, {}, filtered,
                     seed=1)
    assert fset.nominal_references == 4
    assert fset.dedup_merged == 1
    assert fset.counts() == {"reference": 3, "synthetic": 0, "random": 4}
    assert len(fset) == 2 * 4 - 1


def test_random_padding_is_without_replacement_and_clean():
    references, synthetics, filtered = sets_fixture(n_filtered=80)
    fset = build_set(ApproachSpec.randompad(20), 2, references, {}, filtered,
                     seed=1)
    random_ids = [m.pair.id for m in by_role(fset, "random")]
    assert len(random_ids) == 76
    assert len(set(random_ids)) == 76
    for m in by_role(fset, "random"):
        assert not set(WORDS).intersection(m.pair.target.tokens)


def test_padding_rejects_contaminated_filtered_corpus():
    references, synthetics, _ = sets_fixture()
    dirty = make_corpus(("f src", "clean here"), ("g src", "wa leaked"))
    with pytest.raises(DataError, match="wa"):
        build_set(ApproachSpec.randompad(2), 1, references, {}, dirty, seed=1)


def test_build_set_shuffles_deterministically():
    references, synthetics, filtered = sets_fixture()
    spec = ApproachSpec.randompad(3)
    a = build_set(spec, 3, references, {}, filtered, seed=5)
    b = build_set(spec, 3, references, {}, filtered, seed=5)
    c = build_set(spec, 3, references, {}, filtered, seed=6)
    assert [m.pair.id for m in a.members] == [m.pair.id for m in b.members]
    assert [m.pair.id for m in a.members] != [m.pair.id for m in c.members]
    # the reference content is seed-independent; only sampling/order moves
    refs = {m.pair.id for m in by_role(a, "reference")}
    assert refs == {m.pair.id for m in by_role(c, "reference")}


def test_build_set_failure_modes():
    references, synthetics, filtered = sets_fixture(n_refs=2, n_synth=1)
    with pytest.raises(ConfigError):
        build_set(ApproachSpec.finetune(), 0, references, synthetics, filtered)
    with pytest.raises(DataError, match="wa.*has 2 reference pairs.*needs 3"):
        build_set(ApproachSpec.finetune(), 3, references, synthetics, filtered)
    with pytest.raises(DataError, match="1 synthetic pairs available"):
        build_set(ApproachSpec.augmented(3), 1, references, synthetics, filtered)
    with pytest.raises(DataError, match="no synthetic pool"):
        build_set(ApproachSpec.augmented(2), 1, references, {}, filtered)
    tiny = make_corpus(("a", "b"))
    with pytest.raises(DataError, match="holds only 1"):
        build_set(ApproachSpec.randompad(2), 2, references, {}, tiny)


def test_schedule_runs_orders_by_approach_then_step():
    references, synthetics, filtered = sets_fixture()
    approaches = [ApproachSpec.finetune(), ApproachSpec.randompad(2)]
    runs = schedule_runs(OccurrenceSchedule((1, 3)), approaches, references,
                         synthetics, filtered, seed=2)
    assert [(r.approach.kind, r.occurrences) for r in runs] == [
        ("finetune", 1), ("finetune", 3), ("randompad", 1), ("randompad", 3)]


# ------------------------------------------------------------- persistence

def test_per_reference_synthetics_regroups_by_provenance():
    class Item:
        def __init__(self, pair, reference_id, rank):
            self.pair = pair
            self.provenance = {"reference_id": reference_id, "rank": rank}

    refs = [make_pair(1, "a", "b"), make_pair(2, "c", "d")]
    items = [Item(make_pair(10, "x", "y"), 2, 1),
             Item(make_pair(11, "x", "y"), 1, 0),
             Item(make_pair(12, "x", "y"), 2, 0),
             Item(make_pair(13, "x", "y"), 99, 0)]
    grouped = per_reference_synthetics(refs, items)
    assert [[i.pair.id for i in group] for group in grouped] == [[11], [12, 10]]
    with pytest.raises(DataError, match="provenance"):
        per_reference_synthetics(refs, [object()])


def test_set_manifest_and_files(tmp_path):
    references, synthetics, filtered = sets_fixture(n_synth=12)
    fset = build_set(ApproachSpec.half(20), 1, references, synthetics,
                     filtered, seed=4)
    assert set_basename(fset) == "half_20_1"
    manifest = save_set(fset, tmp_path)
    assert manifest["counts"] == {"reference": 2, "synthetic": 20, "random": 18}
    assert manifest["total"] == 40
    assert manifest["trainer_defaults"]["slow"] == {
        "epochs": 10, "learning_rate": 4e-6}
    src_lines = (tmp_path / "half_20_1.src").read_text("utf-8").splitlines()
    tgt_lines = (tmp_path / "half_20_1.tgt").read_text("utf-8").splitlines()
    assert len(src_lines) == len(tgt_lines) == 40
    assert src_lines[0] == fset.members[0].pair.source.text
    assert tgt_lines[-1] == fset.members[-1].pair.target.text
    on_disk = json.loads((tmp_path / "half_20_1.json").read_text("utf-8"))
    assert on_disk == manifest
    # byte-identical rerun
    first = (tmp_path / "half_20_1.src").read_bytes()
    save_set(build_set(ApproachSpec.half(20), 1, references, synthetics,
                       filtered, seed=4), tmp_path)
    assert (tmp_path / "half_20_1.src").read_bytes() == first


def test_manifest_without_documented_defaults():
    references, synthetics, filtered = sets_fixture()
    fset = build_set(ApproachSpec.randompad(3), 1, references, {}, filtered)
    assert "trainer_defaults" not in set_manifest(fset)


def test_counts_over_roles():
    fset = FinetuneSet(ApproachSpec.finetune(), 1,
                       [SetMember(make_pair(0, "a", "b"), "reference", "w")],
                       seed=0)
    assert fset.counts() == {"reference": 1, "synthetic": 0, "random": 0}
