"""Assemble fine-tuning sets under the four adaptation approaches.

Every set is batched over all evaluation words at an occurrence count c:
each word contributes its first c reference pairs, and every (word,
reference) slot brings along synth_share synthetic and rand_share random
padding pairs so that the set holds r pairs per reference overall.
"""

import json
import math
from dataclasses import dataclass, field

from .corpus import ParallelCorpus, SentencePair
from .errors import ConfigError, DataError
from .seeding import rng_for

ROLES = ("reference", "synthetic", "random")

APPROACH_KINDS = ("finetune", "randompad", "augmented", "half")

# documented external-trainer settings (epochs, learning rate) per regime;
# keyed by (kind, ratio), exact matches only
TRAINER_DEFAULTS = {
    ("finetune", 1): {"slow": {"epochs": 10, "learning_rate": 4e-5},
                      "fast": {"epochs": 30, "learning_rate": 1e-4}},
    ("randompad", 2): {"slow": {"epochs": 10, "learning_rate": 4e-5},
                       "fast": {"epochs": 30, "learning_rate": 1e-4}},
    ("randompad", 20): {"slow": {"epochs": 10, "learning_rate": 1e-5},
                        "fast": {"epochs": 30, "learning_rate": 4e-5}},
    ("augmented", 20): {"slow": {"epochs": 10, "learning_rate": 4e-6},
                        "fast": {"epochs": 10, "learning_rate": 4e-5}},
    ("half", 20): {"slow": {"epochs": 10, "learning_rate": 4e-6},
                   "fast": {"epochs": 10, "learning_rate": 4e-5}},
}


@dataclass(frozen=True)
class ApproachSpec:
    """One adaptation strategy: every reference pair is accompanied by
    synth_share synthetic and rand_share random pairs (1 + shares == ratio)."""

    kind: str
    ratio: int
    synth_share: int
    rand_share: int

    def __post_init__(self):
        if self.kind not in APPROACH_KINDS:
            raise ConfigError(f"unknown approach kind {self.kind!r}")
        if self.ratio < 1:
            raise ConfigError("ratio must be >= 1")
        if 1 + self.synth_share + self.rand_share != self.ratio:
            raise ConfigError(
                f"shares do not add up: 1 + {self.synth_share} + "
                f"{self.rand_share} != {self.ratio}")
        if self.kind == "finetune" and self.ratio != 1:
            raise ConfigError("finetune means ratio 1")
        if self.kind == "randompad" and self.synth_share != 0:
            raise ConfigError("randompad takes no synthetic pairs")
        if self.kind == "augmented" and self.rand_share != 0:
            raise ConfigError("augmented takes no random pairs")
        if self.kind == "half" and not (self.synth_share > 0 and self.rand_share > 0):
            raise ConfigError("half needs both synthetic and random shares")

    @property
    def label(self) -> str:
        return f"{self.kind}({self.ratio})"

    @classmethod
    def finetune(cls) -> "ApproachSpec":
        return cls("finetune", 1, 0, 0)

    @classmethod
    def randompad(cls, ratio: int) -> "ApproachSpec":
        return cls("randompad", ratio, 0, ratio - 1)

    @classmethod
    def augmented(cls, ratio: int) -> "ApproachSpec":
        return cls("augmented", ratio, ratio - 1, 0)

    @classmethod
    def half(cls, ratio: int) -> "ApproachSpec":
        # odd remainders favor the synthetic side: half(20) = 1 + 10 + 9
        if ratio < 3:
            raise ConfigError("half needs ratio >= 3")
        synth = math.ceil((ratio - 1) / 2)
        return cls("half", ratio, synth, ratio - 1 - synth)

    def trainer_defaults(self):
        return TRAINER_DEFAULTS.get((self.kind, self.ratio))


def parse_approach(label: str) -> ApproachSpec:
    """Parse "finetune", "randompad(2)", "augmented(20)", "half(20)"."""
    name, sep, rest = label.partition("(")
    name = name.strip()
    if not sep:
        if name == "finetune":
            return ApproachSpec.finetune()
        raise ConfigError(f"approach {label!r} needs a ratio, e.g. {name}(20)")
    if not rest.endswith(")"):
        raise ConfigError(f"cannot parse approach {label!r}")
    try:
        ratio = int(rest[:-1])
    except ValueError:
        raise ConfigError(f"cannot parse approach ratio in {label!r}") from None
    if name == "finetune":
        if ratio != 1:
            raise ConfigError("finetune means ratio 1")
        return ApproachSpec.finetune()
    maker = {"randompad": ApproachSpec.randompad,
             "augmented": ApproachSpec.augmented,
             "half": ApproachSpec.half}.get(name)
    if maker is None:
        raise ConfigError(f"unknown approach kind {name!r}")
    return maker(ratio)


@dataclass(frozen=True)
class OccurrenceSchedule:
    steps: tuple = (1, 2, 3, 5, 10, 15, 20)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(int(s) for s in self.steps))
        if not self.steps:
            raise ConfigError("schedule is empty")
        if self.steps[0] < 1 or any(b <= a for a, b in zip(self.steps, self.steps[1:])):
            raise ConfigError("schedule steps must be positive and strictly increasing")


@dataclass(frozen=True)
class SetMember:
    pair: SentencePair
    role: str
    word: str | None = None


@dataclass
class FinetuneSet:
    approach: ApproachSpec
    occurrences: int
    members: list
    seed: int
    nominal_references: int = 0
    dedup_merged: int = 0

    def counts(self) -> dict:
        out = {role: 0 for role in ROLES}
        for member in self.members:
            out[member.role] += 1
        return out

    def __len__(self) -> int:
        return len(self.members)


def _as_pair(item) -> SentencePair:
    return getattr(item, "pair", item)


def per_reference_synthetics(references, synthetics) -> list:
    """Regroup a flat synthetic list into rank-ordered lists aligned with
    `references`, using each item's provenance (reference_id, rank)."""
    by_reference = {ref.id: [] for ref in references}
    for item in synthetics:
        prov = getattr(item, "provenance", None)
        if prov is None or "reference_id" not in prov:
            raise DataError("synthetic item lacks reference provenance")
        if prov["reference_id"] in by_reference:
            by_reference[prov["reference_id"]].append(item)
    for items in by_reference.values():
        items.sort(key=lambda it: it.provenance["rank"])
    return [by_reference[ref.id] for ref in references]


def build_set(approach: ApproachSpec, occurrences: int, references: dict,
              synthetics: dict, filtered_training: ParallelCorpus,
              seed: int = 0) -> FinetuneSet:
    """One fine-tuning set over all words at occurrence count `occurrences`.

    references: word -> reference pairs in sampling order (first c are used,
    so sets at growing c nest). synthetics: word -> per-reference
    rank-ordered lists (only consulted when synth_share > 0). A reference
    serving several words enters once; its companions are still drawn per
    word. Random padding is sampled from filtered_training without
    replacement across the whole set.
    """
    if occurrences < 1:
        raise ConfigError("occurrences must be >= 1")
    words = sorted(references)
    members = []
    seen_reference_ids = set()
    nominal = 0
    dedup_merged = 0
    rand_slots = 0

    for word in words:
        refs = references[word]
        if len(refs) < occurrences:
            raise DataError(
                f"word {word!r} has {len(refs)} reference pairs, "
                f"needs {occurrences}")
        per_ref_synth = None
        if approach.synth_share > 0:
            if word not in synthetics:
                raise DataError(f"no synthetic pool for word {word!r}")
            per_ref_synth = synthetics[word]
        for index in range(occurrences):
            reference = refs[index]
            nominal += 1
            if reference.id in seen_reference_ids:
                dedup_merged += 1
            else:
                seen_reference_ids.add(reference.id)
                members.append(SetMember(reference, "reference", word))
            if approach.synth_share > 0:
                available = [_as_pair(s) for s in per_ref_synth[index]]
                if len(available) < approach.synth_share:
                    raise DataError(
                        f"word {word!r} reference {reference.id}: "
                        f"{len(available)} synthetic pairs available, "
                        f"needs {approach.synth_share}")
                if approach.kind == "half":
                    rng = rng_for(seed, "half-synthetics", word, index)
                    chosen_idx = sorted(rng.permutation(len(available))
                                        [:approach.synth_share].tolist())
                    chosen = [available[i] for i in chosen_idx]
                else:
                    chosen = available[:approach.synth_share]
                for pair in chosen:
                    members.append(SetMember(pair, "synthetic", word))
            rand_slots += approach.rand_share

    if rand_slots:
        if rand_slots > len(filtered_training):
            raise DataError(
                f"need {rand_slots} random padding pairs but the filtered "
                f"corpus holds only {len(filtered_training)}")
        rng = rng_for(seed, "random-padding", approach.kind,
                      approach.ratio, occurrences)
        order = rng.permutation(len(filtered_training))[:rand_slots]
        eval_words = set(words)
        for slot in order.tolist():
            pair = filtered_training.pairs[slot]
            present = eval_words.intersection(pair.target.tokens)
            if present:
                raise DataError(
                    f"filtered corpus pair {pair.id} still contains "
                    f"evaluation word(s) {sorted(present)}")
            members.append(SetMember(pair, "random", None))

    rng = rng_for(seed, "set-order", approach.kind, approach.ratio, occurrences)
    shuffled = [members[i] for i in rng.permutation(len(members)).tolist()]
    return FinetuneSet(approach, occurrences, shuffled, seed,
                       nominal_references=nominal, dedup_merged=dedup_merged)


def schedule_runs(schedule: OccurrenceSchedule, approaches, references,
                  synthetics, filtered_training, seed: int = 0) -> list:
    """One FinetuneSet per (approach, step), steps ascending per approach."""
    runs = []
    for approach in approaches:
        for step in schedule.steps:
            runs.append(build_set(approach, step, references, synthetics,
                                  filtered_training, seed))
    return runs


def set_basename(fset: FinetuneSet) -> str:
    return f"{fset.approach.kind}_{fset.approach.ratio}_{fset.occurrences}"


def set_manifest(fset: FinetuneSet) -> dict:
    counts = fset.counts()
    manifest = {
        "approach": fset.approach.kind,
        "ratio": fset.approach.ratio,
        "occurrences": fset.occurrences,
        "seed": fset.seed,
        "counts": counts,
        "total": len(fset.members),
        "nominal_references": fset.nominal_references,
        "dedup_merged": fset.dedup_merged,
    }
    defaults = fset.approach.trainer_defaults()
    if defaults is not None:
        manifest["trainer_defaults"] = defaults
    return manifest


def save_set(fset: FinetuneSet, out_dir) -> dict:
    """Write {kind}_{r}_{c}.src/.tgt plus the manifest JSON; returns the
    manifest. This is the hand-off format to the external trainer."""
    import os
    base = os.path.join(str(out_dir), set_basename(fset))
    with open(base + ".src", "w", encoding="utf-8", newline="\n") as src, \
         open(base + ".tgt", "w", encoding="utf-8", newline="\n") as tgt:
        for member in fset.members:
            src.write(member.pair.source.text + "\n")
            tgt.write(member.pair.target.text + "\n")
    manifest = set_manifest(fset)
    with open(base + ".json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest
