"""Deterministic synthetic bilingual corpora for exact desk-scale checks.

Generated corpora follow a bijective token lexicon positionwise, so identity
alignment is the unique maximum-likelihood alignment by construction and
every pipeline stage has a computable ground truth.
"""

from dataclasses import dataclass, field

from .corpus import Origin, ParallelCorpus, Sentence, SentencePair
from .errors import ConfigError
from .seeding import rng_for


def default_lexicon(vocab_size: int, copy_language: bool = False) -> dict[str, str]:
    if copy_language:
        return {f"w{i:03d}": f"w{i:03d}" for i in range(vocab_size)}
    return {f"f{i:03d}": f"e{i:03d}" for i in range(vocab_size)}


@dataclass
class ToyLanguageSpec:
    """Parameters for a toy bilingual language with a 1:1 token lexicon."""

    vocab_size: int = 20
    n_pairs: int = 100
    length_range: tuple[int, int] = (4, 9)
    seed: int = 0
    copy_language: bool = False
    lexicon: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.lexicon:
            self.lexicon = default_lexicon(self.vocab_size, self.copy_language)
        targets = set(self.lexicon.values())
        if len(targets) != len(self.lexicon):
            raise ConfigError("toy lexicon must be a bijection")
        lo, hi = self.length_range
        if lo < 1 or hi < lo:
            raise ConfigError(f"bad length range {self.length_range}")


def generate(spec: ToyLanguageSpec, origin: Origin = Origin.GENUINE,
             first_id: int = 0) -> ParallelCorpus:
    """Random pairs where target_j == lexicon(source_j) positionwise."""
    rng = rng_for(spec.seed, "toy-corpus")
    source_vocab = sorted(spec.lexicon)
    lo, hi = spec.length_range
    pairs = []
    for i in range(spec.n_pairs):
        length = int(rng.integers(lo, hi + 1))
        src_tokens = tuple(source_vocab[j] for j in rng.integers(0, len(source_vocab), size=length))
        tgt_tokens = tuple(spec.lexicon[t] for t in src_tokens)
        pairs.append(SentencePair(first_id + i, Sentence(src_tokens), Sentence(tgt_tokens), origin))
    return ParallelCorpus(pairs)


@dataclass
class PlantedWord:
    """A rare lexicon entry inserted a controlled number of times."""

    source_word: str
    target_word: str
    train_occurrences: int = 24
    test_occurrences: int = 6


def plant_words(corpus: ParallelCorpus, planted: list[PlantedWord],
                occurrences_attr: str, seed: int) -> ParallelCorpus:
    """Overwrite one aligned position in n distinct pairs per planted word.

    Pairs are chosen so that no pair receives two planted words and counts
    come out exact. Positionwise parallelism is preserved.
    """
    need = sum(getattr(w, occurrences_attr) for w in planted)
    if need > len(corpus):
        raise ConfigError(f"need {need} pairs to plant into, corpus has {len(corpus)}")
    rng = rng_for(seed, "plant", occurrences_attr)
    slots = rng.permutation(len(corpus))
    pairs = list(corpus.pairs)
    cursor = 0
    for word in planted:
        for _ in range(getattr(word, occurrences_attr)):
            slot = int(slots[cursor])
            cursor += 1
            pair = pairs[slot]
            pos = int(rng.integers(0, len(pair.target)))
            src = list(pair.source.tokens)
            tgt = list(pair.target.tokens)
            src[pos] = word.source_word
            tgt[pos] = word.target_word
            pairs[slot] = SentencePair(
                pair.id, Sentence(tuple(src)), Sentence(tuple(tgt)), pair.origin)
    return ParallelCorpus(pairs)


def generate_adaptation_fixture(spec: ToyLanguageSpec, planted: list[PlantedWord],
                                n_test_pairs: int):
    """(train, test) corpora with planted rare words at exact counts."""
    train = generate(spec)
    test_spec = ToyLanguageSpec(
        vocab_size=spec.vocab_size, n_pairs=n_test_pairs,
        length_range=spec.length_range, seed=spec.seed + 1,
        copy_language=spec.copy_language, lexicon=dict(spec.lexicon))
    test = generate(test_spec, first_id=0)
    train = plant_words(train, planted, "train_occurrences", spec.seed)
    test = plant_words(test, planted, "test_occurrences", spec.seed)
    return train, test


# Hand-written substitution example used across augmentation tests: a retrieved
# candidate about one energy source rewritten to introduce a new one.
ENERGY_EXAMPLE = {
    "candidate_source": "Le charbon est une énergie non renouvelable.",
    "candidate_target": "Coal is a non-renewable energy.",
    "focus_position": 0,
    "aligned_source_positions": (1,),
    "new_target_word": "Nuclear",
    "new_source_word": "nucléaire",
    "expected_source": "Le nucléaire est une énergie non renouvelable.",
    "expected_target": "Nuclear is a non-renewable energy.",
}

# Real-text retrieval fixture: a reference sentence introducing a novel island
# name plus the five candidate sentences a strong contextual model should rank
# highest. Rankings are only asserted against an external provider; with the
# built-in provider the fixture exercises mechanics.
ISLAND_REFERENCE = (
    "A powerful 7.5 magnitude earthquake hit the Indonesian island of Sulawesi "
    "on Friday , September 29 , triggering a tsunami and leaving nearly 400 people dead ."
)
ISLAND_WORD = "Sulawesi"

ISLAND_CANDIDATES = [
    "This labour shortage prompted the authorities to import slaves from Indonesia and Madagascar .",
    "Many of them have settled down in Ahmedabad , Vadodara , Mumbai , Kolkota , Delhi , Nagpur "
    "and far away places like Java , Rangoon , Singapore , Fiji , Eden , Kenya , Uganda , America "
    "etc and established their business in these places .",
    "The rice lands of Java are among the richest in the world .",
    "Rising ocean temperatures and ocean acidification means that the capacity of the ocean carbon "
    "sink will gradually get weaker , giving rise to global concerns expressed in the Monaco and "
    "Manado Declarations .",
    "Lara 's first school was St. Joseph 's Roman Catholic primary .",
]

ISLAND_DISTRACTORS = [
    "The quarterly report shows a modest increase in revenue .",
    "Please submit the form before the end of the month .",
    "The recipe calls for two cups of flour and a pinch of salt .",
    "Traffic on the northern bypass was heavier than usual this morning .",
    "The committee postponed its vote until the next session .",
    "Her latest novel explores the lives of three generations of clockmakers .",
    "Software updates will be installed automatically over the weekend .",
    "The museum 's new wing opens to the public in April .",
]


def island_candidate_corpus() -> ParallelCorpus:
    """Candidate pool for the island retrieval fixture (target side is what
    matters for context search; sources are placeholders)."""
    pairs = []
    for i, text in enumerate(ISLAND_CANDIDATES + ISLAND_DISTRACTORS):
        tgt = Sentence.parse(text)
        src = Sentence(tuple(f"s{i}t{j}" for j in range(len(tgt))))
        pairs.append(SentencePair(i, src, tgt, Origin.GENUINE))
    return ParallelCorpus(pairs)


def curated_words() -> tuple[str, ...]:
    """The bundled 96-word English evaluation list (rare-but-attested words,
    mostly proper nouns), usable as a starting exclusion/selection fixture."""
    from importlib import resources
    text = resources.files("mtadapt").joinpath(
        "data/curated_eval_words.txt").read_text(encoding="utf-8")
    return tuple(line for line in text.splitlines() if line)
