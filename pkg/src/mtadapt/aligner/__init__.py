"""EM-trained lexical word alignment.

A classic expectation-maximization lexical translation model: every target
token is generated by one source token (or a distinguished NULL), and the
table t(target | source) is re-estimated from posterior-weighted counts.
An optional fixed-tension diagonal prior reweights alignment positions the
way fast statistical aligners do; tension is never learned.

The E-step sweep is the hot loop. It runs through a compiled kernel when the
extension built, with a numpy fallback selected at import (see .kernels).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..corpus import ParallelCorpus, SentencePair
from ..errors import ConfigError, DataError
from ._em_py import diag_weight_matrix
from .kernels import KERNEL_NAME, em_sweep

NULL_TOKEN = "<NULL>"
# fixed probability mass reserved for NULL when the diagonal prior is active
NULL_PRIOR = 0.08
# alignment-time floor for (source, target) pairs never seen in training,
# chosen so unseen targets deterministically fall to NULL
EPSILON = 1e-6


@dataclass
class _Layout:
    """Corpus encoded for the E-step kernels."""

    n_src: int
    n_tgt: int
    param_src: np.ndarray
    param_tgt: np.ndarray
    idx_flat: np.ndarray
    pair_offsets: np.ndarray
    src_lens: np.ndarray
    tgt_lens: np.ndarray

    @property
    def n_params(self) -> int:
        return self.param_src.shape[0]


class TranslationTable:
    """Sparse t(target | source) over co-occurring token pairs.

    Rows are source tokens (NULL included); each row sums to 1 over the
    stored targets. Probabilities for unstored pairs are 0 (the alignment
    floor EPSILON is applied only at alignment time).
    """

    def __init__(self, src_tokens, tgt_tokens, param_src, param_tgt, probs,
                 diagonal_tension=None, log_likelihoods=()):
        self.src_tokens = list(src_tokens)
        self.tgt_tokens = list(tgt_tokens)
        self.param_src = np.asarray(param_src, dtype=np.int32)
        self.param_tgt = np.asarray(param_tgt, dtype=np.int32)
        self.probs = np.asarray(probs, dtype=np.float64)
        self.diagonal_tension = diagonal_tension
        self.log_likelihoods = list(log_likelihoods)
        self._src_index = {tok: i for i, tok in enumerate(self.src_tokens)}
        self._tgt_index = {tok: i for i, tok in enumerate(self.tgt_tokens)}
        self._params = {
            (int(s), int(t)): i
            for i, (s, t) in enumerate(zip(self.param_src, self.param_tgt))
        }

    def prob(self, source_token: str, target_token: str, default: float = 0.0) -> float:
        s = self._src_index.get(source_token)
        t = self._tgt_index.get(target_token)
        if s is None or t is None:
            return default
        i = self._params.get((s, t))
        return float(self.probs[i]) if i is not None else default

    def row_sums(self) -> np.ndarray:
        sums = np.zeros(len(self.src_tokens))
        np.add.at(sums, self.param_src, self.probs)
        return sums

    def items(self):
        for i in range(self.probs.shape[0]):
            yield (self.src_tokens[self.param_src[i]],
                   self.tgt_tokens[self.param_tgt[i]],
                   float(self.probs[i]))

    def save_tsv(self, path) -> None:
        rows = sorted(self.items(), key=lambda r: (r[0], r[1]))
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for s, t, p in rows:
                f.write(f"{s}\t{t}\t{p!r}\n")

    @classmethod
    def load_tsv(cls, path, diagonal_tension=None) -> "TranslationTable":
        src_tokens, tgt_tokens = [NULL_TOKEN], []
        src_index, tgt_index = {NULL_TOKEN: 0}, {}
        param_src, param_tgt, probs = [], [], []
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 3:
                    raise DataError(f"{path}: line {line_no} is not source TAB target TAB prob")
                s, t, p = parts
                if s not in src_index:
                    src_index[s] = len(src_tokens)
                    src_tokens.append(s)
                if t not in tgt_index:
                    tgt_index[t] = len(tgt_tokens)
                    tgt_tokens.append(t)
                param_src.append(src_index[s])
                param_tgt.append(tgt_index[t])
                probs.append(float(p))
        return cls(src_tokens, tgt_tokens, param_src, param_tgt, probs,
                   diagonal_tension=diagonal_tension)


@dataclass(frozen=True)
class Alignment:
    """Viterbi links for one pair: each target index links to at most one
    source index; a NULL choice yields no link."""

    links: frozenset
    pair_id: int

    def source_for(self, target_index: int):
        for i, j in self.links:
            if j == target_index:
                return i
        return None

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links, key=lambda l: (l[1], l[0])))


@dataclass
class LexiconEntry:
    source_word: str
    count: int


@dataclass
class Lexicon:
    """Most-frequently-aligned source word per evaluation word."""

    entries: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)

    def source_for(self, word: str) -> str:
        if word not in self.entries:
            raise DataError(f"lexicon has no source word for {word!r}")
        return self.entries[word].source_word


def encode_corpus(corpus: ParallelCorpus) -> tuple[_Layout, list, list]:
    src_tokens, tgt_tokens = [NULL_TOKEN], []
    src_index, tgt_index = {NULL_TOKEN: 0}, {}
    params: dict = {}
    param_src, param_tgt = [], []
    idx_chunks, src_lens, tgt_lens = [], [], []
    offsets = [0]
    for pair in corpus:
        sids = [0]
        for tok in pair.source.tokens:
            sid = src_index.get(tok)
            if sid is None:
                sid = src_index[tok] = len(src_tokens)
                src_tokens.append(tok)
            sids.append(sid)
        tids = []
        for tok in pair.target.tokens:
            tid = tgt_index.get(tok)
            if tid is None:
                tid = tgt_index[tok] = len(tgt_tokens)
                tgt_tokens.append(tok)
            tids.append(tid)
        chunk = np.empty(len(sids) * len(tids), dtype=np.int32)
        pos = 0
        for sid in sids:
            for tid in tids:
                key = (sid, tid)
                pidx = params.get(key)
                if pidx is None:
                    pidx = params[key] = len(params)
                    param_src.append(sid)
                    param_tgt.append(tid)
                chunk[pos] = pidx
                pos += 1
        idx_chunks.append(chunk)
        src_lens.append(len(sids))
        tgt_lens.append(len(tids))
        offsets.append(offsets[-1] + chunk.shape[0])
    layout = _Layout(
        n_src=len(src_tokens),
        n_tgt=len(tgt_tokens),
        param_src=np.asarray(param_src, dtype=np.int32),
        param_tgt=np.asarray(param_tgt, dtype=np.int32),
        idx_flat=(np.concatenate(idx_chunks) if idx_chunks
                  else np.empty(0, dtype=np.int32)),
        pair_offsets=np.asarray(offsets, dtype=np.int64),
        src_lens=np.asarray(src_lens, dtype=np.int32),
        tgt_lens=np.asarray(tgt_lens, dtype=np.int32),
    )
    return layout, src_tokens, tgt_tokens


def _normalize_rows(counts: np.ndarray, param_src: np.ndarray, n_src: int) -> np.ndarray:
    row = np.zeros(n_src)
    np.add.at(row, param_src, counts)
    return counts / row[param_src]


def uniform_table(corpus: ParallelCorpus) -> TranslationTable:
    """The EM starting point: every co-occurring target equally likely."""
    layout, src_tokens, tgt_tokens = encode_corpus(corpus)
    probs = np.full(layout.n_params, 1.0 / layout.n_tgt)
    return TranslationTable(src_tokens, tgt_tokens, layout.param_src,
                            layout.param_tgt, probs)


def train(corpus: ParallelCorpus, iterations: int = 5,
          diagonal_tension: float | None = None) -> TranslationTable:
    """Run `iterations` EM rounds from uniform initialization.

    The per-iteration corpus log-likelihood (under the parameters entering
    the iteration) is recorded on the table; without a diagonal prior it is
    non-decreasing.
    """
    if len(corpus) == 0:
        raise DataError("cannot train an aligner on an empty corpus")
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    layout, src_tokens, tgt_tokens = encode_corpus(corpus)
    probs = np.full(layout.n_params, 1.0 / layout.n_tgt)
    tension = float(diagonal_tension) if diagonal_tension else 0.0
    log_likelihoods = []
    for _ in range(iterations):
        counts = np.zeros(layout.n_params)
        ll = em_sweep(probs, layout.idx_flat, layout.pair_offsets,
                      layout.src_lens, layout.tgt_lens, counts,
                      tension, NULL_PRIOR)
        log_likelihoods.append(float(ll))
        probs = _normalize_rows(counts, layout.param_src, layout.n_src)
    return TranslationTable(src_tokens, tgt_tokens, layout.param_src,
                            layout.param_tgt, probs,
                            diagonal_tension=diagonal_tension,
                            log_likelihoods=log_likelihoods)


def _prior_weights(source_len: int, target_len: int, tension) -> np.ndarray:
    # rows: NULL then source positions; columns: target positions
    if not tension:
        m = source_len + 1
        return np.full((m, target_len), 1.0 / m)
    return diag_weight_matrix(source_len, target_len, float(tension), NULL_PRIOR)


def alignment_posteriors(pair: SentencePair, table: TranslationTable) -> np.ndarray:
    """Posterior p(link source | target position) matrix; row 0 is NULL."""
    weights = _prior_weights(len(pair.source), len(pair.target), table.diagonal_tension)
    scores = np.empty_like(weights)
    candidates = [NULL_TOKEN, *pair.source.tokens]
    for j, t in enumerate(pair.target.tokens):
        for i, s in enumerate(candidates):
            scores[i, j] = weights[i, j] * table.prob(s, t)
    denom = scores.sum(axis=0)
    if np.any(denom == 0.0):
        raise DataError("pair contains tokens with no probability mass under the table")
    return scores / denom


def align(pair: SentencePair, table: TranslationTable) -> Alignment:
    """Viterbi link per target token: argmax over NULL and source positions.

    Unseen (source, target) combinations score EPSILON, so a target token
    unseen in training ties everywhere and falls to NULL (no link). Real
    ties go to the lowest source index.
    """
    weights = _prior_weights(len(pair.source), len(pair.target), table.diagonal_tension)
    links = set()
    for j, t in enumerate(pair.target.tokens):
        best_i = None
        best_score = weights[0, j] * table.prob(NULL_TOKEN, t, EPSILON)
        for i, s in enumerate(pair.source.tokens):
            score = weights[i + 1, j] * table.prob(s, t, EPSILON)
            if score > best_score:
                best_i, best_score = i, score
        if best_i is not None:
            links.add((best_i, j))
    return Alignment(frozenset(links), pair.id)


def extract_lexicon(corpus: ParallelCorpus, table: TranslationTable,
                    words) -> Lexicon:
    """For each evaluation word, the source token most often aligned to its
    occurrences across the corpus (token-weighted; ties lexicographic)."""
    targets = [w.target_word if hasattr(w, "target_word") else w for w in words]
    counts: dict[str, dict[str, int]] = {w: {} for w in targets}
    wanted = set(targets)
    for pair in corpus:
        hits = wanted.intersection(pair.target.tokens)
        if not hits:
            continue
        alignment = align(pair, table)
        by_target = {j: i for i, j in alignment.links}
        for j, tok in enumerate(pair.target.tokens):
            if tok in hits:
                i = by_target.get(j)
                if i is not None:
                    source_tok = pair.source.tokens[i]
                    counts[tok][source_tok] = counts[tok].get(source_tok, 0) + 1
    lexicon = Lexicon()
    for word in targets:
        if counts[word]:
            best = sorted(counts[word].items(), key=lambda kv: (-kv[1], kv[0]))[0]
            lexicon.entries[word] = LexiconEntry(best[0], best[1])
        else:
            lexicon.missing.append(word)
    return lexicon


def log_likelihood(corpus: ParallelCorpus, table: TranslationTable) -> float:
    """Corpus log-likelihood under the table (for tests and reporting)."""
    total = 0.0
    for pair in corpus:
        weights = _prior_weights(len(pair.source), len(pair.target),
                                 table.diagonal_tension)
        candidates = [NULL_TOKEN, *pair.source.tokens]
        for j, t in enumerate(pair.target.tokens):
            z = sum(weights[i, j] * table.prob(s, t)
                    for i, s in enumerate(candidates))
            if z <= 0.0:
                return -math.inf
            total += math.log(z)
    return total
