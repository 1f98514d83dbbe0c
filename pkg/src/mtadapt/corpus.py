"""Data model and IO for tokenized parallel corpora.

Input is expected to be pre-tokenized (Moses-style): one sentence per line,
tokens separated by single spaces, UTF-8 with LF line endings. This module
never re-tokenizes. The alternative single-file form is TSV with exactly one
TAB per line (source TAB target).
"""

import enum
from collections import Counter
from dataclasses import dataclass, field

from .errors import DataError

_WHITESPACE = tuple(" \t\n\r\v\f ")


class Origin(enum.Enum):
    GENUINE = "genuine"
    SYNTHETIC = "synthetic-backtranslation"


class Side(enum.Enum):
    SOURCE = "source"
    TARGET = "target"


def check_token(token: str) -> str:
    """A token is a non-empty string with no whitespace in it."""
    if not token:
        raise DataError("empty token")
    if any(ch in token for ch in _WHITESPACE):
        raise DataError(f"token contains whitespace: {token!r}")
    return token


@dataclass(frozen=True)
class Sentence:
    """An ordered, non-empty sequence of tokens."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise DataError("sentence must contain at least one token")

    @classmethod
    def parse(cls, line: str) -> "Sentence":
        # split on single spaces so serialization round-trips byte-for-byte
        parts = line.split(" ")
        return cls(tuple(check_token(t) for t in parts))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def count(self, word: str) -> int:
        return self.tokens.count(word)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, word: str) -> bool:
        return word in self.tokens


@dataclass(frozen=True)
class SentencePair:
    id: int
    source: Sentence
    target: Sentence
    origin: Origin = Origin.GENUINE

    def side(self, side: Side) -> Sentence:
        return self.source if side is Side.SOURCE else self.target


class ParallelCorpus:
    """Immutable list of sentence pairs with per-side token frequency tables."""

    def __init__(self, pairs):
        self.pairs: tuple[SentencePair, ...] = tuple(pairs)
        ids = [p.id for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate pair ids in corpus")
        self._freq = {Side.SOURCE: Counter(), Side.TARGET: Counter()}
        for pair in self.pairs:
            self._freq[Side.SOURCE].update(pair.source.tokens)
            self._freq[Side.TARGET].update(pair.target.tokens)
        self._by_id = {p.id: p for p in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, pair_id: int) -> SentencePair:
        return self._by_id[pair_id]

    def frequencies(self, side: Side) -> Counter:
        return self._freq[side]

    def vocabulary(self, side: Side) -> set:
        return set(self._freq[side])

    def subset(self, pairs) -> "ParallelCorpus":
        """New corpus over a subset of pairs; ids are kept as-is."""
        return ParallelCorpus(pairs)


def _normalize(line: str, lowercase: bool) -> str:
    return line.lower() if lowercase else line


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8", newline="\n") as f:
        text = f.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def load_corpus(source_path, target_path, origin: Origin = Origin.GENUINE,
                lowercase: bool = False, first_id: int = 0) -> ParallelCorpus:
    """Load a two-file parallel corpus; ids are assigned in file order."""
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise DataError(
            f"line-count mismatch: {source_path} has {len(src_lines)} lines, "
            f"{target_path} has {len(tgt_lines)}"
        )
    pairs = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines)):
        if src == "":
            raise DataError(f"{source_path}: empty line {i + 1}")
        if tgt == "":
            raise DataError(f"{target_path}: empty line {i + 1}")
        pairs.append(SentencePair(
            id=first_id + i,
            source=Sentence.parse(_normalize(src, lowercase)),
            target=Sentence.parse(_normalize(tgt, lowercase)),
            origin=origin,
        ))
    return ParallelCorpus(pairs)


def load_corpus_tsv(path, origin: Origin = Origin.GENUINE,
                    lowercase: bool = False, first_id: int = 0) -> ParallelCorpus:
    """Load the single-file TSV form: exactly one TAB per line."""
    pairs = []
    for i, line in enumerate(_read_lines(path)):
        if line.count("\t") != 1:
            raise DataError(
                f"{path}: line {i + 1} has {line.count(chr(9))} TABs, expected exactly 1"
            )
        src, tgt = line.split("\t")
        if src == "" or tgt == "":
            raise DataError(f"{path}: empty side on line {i + 1}")
        pairs.append(SentencePair(
            id=first_id + i,
            source=Sentence.parse(_normalize(src, lowercase)),
            target=Sentence.parse(_normalize(tgt, lowercase)),
            origin=origin,
        ))
    return ParallelCorpus(pairs)


def save_corpus(corpus: ParallelCorpus, source_path, target_path) -> None:
    with open(source_path, "w", encoding="utf-8", newline="\n") as src, \
         open(target_path, "w", encoding="utf-8", newline="\n") as tgt:
        for pair in corpus:
            src.write(pair.source.text + "\n")
            tgt.write(pair.target.text + "\n")


def merge_corpora(*corpora: ParallelCorpus) -> ParallelCorpus:
    """Concatenate corpora, reassigning ids sequentially."""
    pairs = []
    next_id = 0
    for corpus in corpora:
        for pair in corpus:
            pairs.append(SentencePair(next_id, pair.source, pair.target, pair.origin))
            next_id += 1
    return ParallelCorpus(pairs)


def count_occurrences(corpus: ParallelCorpus, word: str, side: Side,
                      per_sentence: bool = False) -> int:
    """Occurrences of word on one side.

    Token-level by default (multiple occurrences per sentence all counted);
    per_sentence counts each containing sentence once.
    """
    if per_sentence:
        return sum(1 for pair in corpus if word in pair.side(side))
    return corpus.frequencies(side)[word]
