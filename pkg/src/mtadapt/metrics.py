"""Score hypothesis translations against references.

Three measures: clipped bag-of-words accuracy per evaluation word,
over-translation (occurrences in excess of the reference), and corpus BLEU.
Every word-level result carries its exact integer numerators and
denominators next to the real value so reports can be audited.
"""

import math
from collections import Counter
from dataclasses import dataclass

from .corpus import Sentence, _read_lines
from .errors import ConfigError, DataError

ACCURACY_MODES = ("micro", "macro")


@dataclass(frozen=True)
class EvalCorpus:
    """Hypothesis/reference sentences aligned 1:1 with the test set."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @classmethod
    def from_files(cls, hypothesis_path, reference_path) -> "EvalCorpus":
        hyp_lines = _read_lines(hypothesis_path)
        ref_lines = _read_lines(reference_path)
        if len(hyp_lines) != len(ref_lines):
            raise DataError(
                f"{hypothesis_path} has {len(hyp_lines)} lines but "
                f"{reference_path} has {len(ref_lines)}")
        entries = []
        for line_no, (hyp, ref) in enumerate(zip(hyp_lines, ref_lines), 1):
            if not hyp.strip() or not ref.strip():
                raise DataError(f"empty sentence at line {line_no}")
            entries.append((Sentence.parse(hyp), Sentence.parse(ref)))
        return cls(tuple(entries))


@dataclass(frozen=True)
class WordScore:
    word: str
    n_total: int        # reference occurrences
    p_total: int        # hypothesis occurrences
    p_clipped: int      # sum of per-sentence min(p_i, n_i)
    excess: int         # sum of per-sentence max(p_i - n_i, 0)
    accuracy: float
    overtranslation: float
    mode: str = "micro"

    def __post_init__(self):
        # exact integer decomposition of hypothesis occurrences
        if self.p_clipped + self.excess != self.p_total:
            raise DataError(f"inconsistent counts for word {self.word!r}")


def _sentence_counts(corpus: EvalCorpus, word: str):
    for hypothesis, reference in corpus:
        yield hypothesis.count(word), reference.count(word)


def word_accuracy(corpus: EvalCorpus, word: str, mode: str = "micro") -> WordScore:
    """Clipped per-sentence matches aggregated over the corpus.

    micro: sum of min(p_i, n_i) over sum of n_i. macro: mean of the
    per-sentence ratios min(p_i, n_i)/n_i over sentences with n_i > 0.
    Excess occurrences count in every sentence, including those whose
    reference lacks the word.
    """
    if mode not in ACCURACY_MODES:
        raise ConfigError(f"mode must be one of {ACCURACY_MODES}")
    n_total = p_total = p_clipped = excess = 0
    ratios = []
    for p, n in _sentence_counts(corpus, word):
        n_total += n
        p_total += p
        p_clipped += min(p, n)
        excess += max(p - n, 0)
        if n > 0:
            ratios.append(min(p, n) / n)
    if n_total == 0:
        raise DataError(f"word {word!r} never occurs in the references")
    if mode == "micro":
        accuracy = p_clipped / n_total
    else:
        accuracy = sum(ratios) / len(ratios)
    return WordScore(word, n_total, p_total, p_clipped, excess,
                     accuracy, excess / n_total, mode)


def over_translation(corpus: EvalCorpus, word: str) -> float:
    return word_accuracy(corpus, word).overtranslation


def overall_accuracy(corpus: EvalCorpus, words, mode: str = "micro") -> float:
    """Unweighted mean of per-word accuracies."""
    scores = [word_accuracy(corpus, w, mode) for w in words]
    if not scores:
        raise DataError("no evaluation words given")
    return sum(s.accuracy for s in scores) / len(scores)


def overall_over_translation(corpus: EvalCorpus, words) -> float:
    scores = [word_accuracy(corpus, w) for w in words]
    if not scores:
        raise DataError("no evaluation words given")
    return sum(s.overtranslation for s in scores) / len(scores)


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(corpus: EvalCorpus, max_n: int = 4) -> float:
    """Corpus-level BLEU in [0, 100]: geometric mean of clipped n-gram
    precisions (n = 1..max_n) times the brevity penalty, no smoothing
    (any zero precision gives 0).
    """
    if len(corpus) == 0:
        raise DataError("cannot score an empty corpus")
    if max_n < 1:
        raise ConfigError("max_n must be >= 1")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for hypothesis, reference in corpus:
        hyp_len += len(hypothesis)
        ref_len += len(reference)
        for n in range(1, max_n + 1):
            hyp_ngrams = _ngrams(hypothesis.tokens, n)
            ref_ngrams = _ngrams(reference.tokens, n)
            totals[n - 1] += max(len(hypothesis) - n + 1, 0)
            matches[n - 1] += sum(min(count, ref_ngrams[gram])
                                  for gram, count in hyp_ngrams.items())
    if hyp_len == 0 or any(t == 0 for t in totals) or any(m == 0 for m in matches):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_precision)


def score_report(corpus: EvalCorpus, words, mode: str = "micro") -> dict:
    """Full report: corpus BLEU, mean accuracy/over-translation, and the
    per-word rows (the scatter data for accuracy-vs-BLEU plots)."""
    scores = [word_accuracy(corpus, w, mode) for w in sorted(words)]
    if not scores:
        raise DataError("no evaluation words given")
    return {
        "accuracy_mode": mode,
        "overall_bleu": corpus_bleu(corpus),
        "overall_accuracy": sum(s.accuracy for s in scores) / len(scores),
        "overall_overtranslation":
            sum(s.overtranslation for s in scores) / len(scores),
        "sentences": len(corpus),
        "per_word": [
            {
                "word": s.word,
                "n_total": s.n_total,
                "p_total": s.p_total,
                "p_clipped": s.p_clipped,
                "excess": s.excess,
                "accuracy": s.accuracy,
                "overtranslation": s.overtranslation,
            }
            for s in scores
        ],
    }


def report_csv_rows(report: dict) -> list:
    """Flatten a score report to CSV rows (header first)."""
    rows = [["word", "n_total", "p_total", "p_clipped", "excess",
             "accuracy", "overtranslation"]]
    for entry in report["per_word"]:
        rows.append([entry["word"], entry["n_total"], entry["p_total"],
                     entry["p_clipped"], entry["excess"],
                     repr(entry["accuracy"]), repr(entry["overtranslation"])])
    return rows
