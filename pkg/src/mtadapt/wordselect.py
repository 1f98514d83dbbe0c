"""Evaluation-word selection and corpus splitting.

Picks the rarest qualifying target-side words, then separates every training
pair whose target sentence contains one of them into per-word held-out pools
of simulated reference translations. The remainder is the filtered training
set the base MT model is trained on.
"""

from dataclasses import dataclass, field, replace

from .corpus import ParallelCorpus, SentencePair, Side, count_occurrences
from .errors import ConfigError, DataError
from .seeding import rng_for


@dataclass(frozen=True)
class SelectionCriteria:
    min_test_count: int = 5
    min_train_count: int = 20
    max_words: int = 100
    exclusion_list: frozenset = frozenset()
    # count containing sentences instead of token occurrences
    per_sentence: bool = False

    def __post_init__(self):
        if self.min_test_count < 1 or self.min_train_count < 1 or self.max_words < 1:
            raise ConfigError("selection thresholds must all be >= 1")


@dataclass(frozen=True)
class EvaluationWord:
    """A held-out target word with its counts and held-out reference pairs."""

    target_word: str
    train_count: int
    test_count: int
    source_word: str | None = None
    held_out: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "word": self.target_word,
            "source_word": self.source_word,
            "train_count": self.train_count,
            "test_count": self.test_count,
            "held_out_ids": list(self.held_out),
        }


@dataclass
class FilteredSplit:
    filtered_training: ParallelCorpus
    evaluation_words: list[EvaluationWord]
    held_out_pool: dict[str, list[SentencePair]] = field(default_factory=dict)

    @property
    def distinct_held_out(self) -> int:
        ids = {p.id for pool in self.held_out_pool.values() for p in pool}
        return len(ids)


def select_words(train: ParallelCorpus, test: ParallelCorpus,
                 criteria: SelectionCriteria) -> list[EvaluationWord]:
    """The max_words target-side words with the lowest training counts among
    those meeting both frequency thresholds, excluding the manual list.

    Sorted ascending by train count, ties broken lexicographically.
    """
    qualifying = []
    for word in train.vocabulary(Side.TARGET):
        if word in criteria.exclusion_list:
            continue
        train_count = count_occurrences(train, word, Side.TARGET, criteria.per_sentence)
        if train_count < criteria.min_train_count:
            continue
        test_count = count_occurrences(test, word, Side.TARGET, criteria.per_sentence)
        if test_count < criteria.min_test_count:
            continue
        qualifying.append(EvaluationWord(word, train_count, test_count))
    if not qualifying:
        raise DataError(
            f"no word meets the selection thresholds "
            f"(>= {criteria.min_train_count} in train, >= {criteria.min_test_count} in test)"
        )
    qualifying.sort(key=lambda w: (w.train_count, w.target_word))
    return qualifying[:criteria.max_words]


def split_corpus(train: ParallelCorpus, words: list[EvaluationWord]) -> FilteredSplit:
    """Move every pair whose target contains an evaluation word to the
    held-out pool; a pair containing several evaluation words is held out
    once and listed under each word.
    """
    if not words:
        raise ConfigError("split_corpus requires at least one evaluation word")
    word_set = {w.target_word for w in words}
    pool: dict[str, list[SentencePair]] = {w.target_word: [] for w in words}
    kept = []
    for pair in train:
        hits = word_set.intersection(pair.target.tokens)
        if hits:
            for word in hits:
                pool[word].append(pair)
        else:
            kept.append(pair)
    updated = [replace(w, held_out=tuple(p.id for p in pool[w.target_word]))
               for w in words]
    return FilteredSplit(train.subset(kept), updated, pool)


def sample_references(pool: list[SentencePair], n: int, seed: int) -> list[SentencePair]:
    """n distinct pairs sampled uniformly, deterministic under seed."""
    if len(pool) < n:
        raise DataError(f"pool has {len(pool)} pairs, cannot sample {n}")
    rng = rng_for(seed, "sample-references")
    order = rng.permutation(len(pool))
    return [pool[int(i)] for i in order[:n]]


def load_exclusion_list(path) -> frozenset:
    """Plain text, one word per line; blank lines ignored."""
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip() for line in f if line.strip())
