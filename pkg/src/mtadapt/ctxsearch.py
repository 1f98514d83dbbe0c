"""Top-k retrieval of candidate sentences by context similarity.

For each candidate sentence exactly one position is sampled (seeded by the
pair id, so results do not depend on iteration order) and its context vector
is compared to the reference word's context. Scoring every position of every
candidate would be better but needs |sentence| times more provider calls;
exhaustive_search does exactly that and serves as the oracle in tests.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .corpus import Origin, ParallelCorpus, SentencePair
from .embed import ContextQuery, cosine, embed_context
from .errors import DataError
from .seeding import rng_for


@dataclass(frozen=True)
class ContextMatch:
    pair_id: int
    position: int
    similarity: float


@dataclass(frozen=True)
class SearchConfig:
    k: int = 10
    seed: int = 0
    min_similarity: float = -1.0
    genuine_only: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise DataError("search k must be >= 1")


def sample_position(seed: int, pair_id: int, length: int) -> int:
    return int(rng_for(seed, "ctx-position", pair_id).integers(0, length))


def _eligible(reference: SentencePair, candidates: ParallelCorpus,
              genuine_only: bool) -> list[SentencePair]:
    out = []
    for pair in candidates:
        if genuine_only and pair.origin is not Origin.GENUINE:
            continue
        if pair.id == reference.id:
            continue
        if (pair.source.tokens == reference.source.tokens
                and pair.target.tokens == reference.target.tokens):
            continue
        out.append(pair)
    return out


def _rank(matches: list[ContextMatch], k: int, total_eligible: int) -> list[ContextMatch]:
    matches.sort(key=lambda m: (-m.similarity, m.pair_id))
    if k > total_eligible:
        warnings.warn(
            f"asked for top {k} but only {total_eligible} eligible candidates")
    return matches[:k]


def search_contexts(reference: SentencePair, w_position: int,
                    candidates: ParallelCorpus, provider,
                    config: SearchConfig) -> list[ContextMatch]:
    """Top-k matches over one sampled position per candidate.

    Sorted by similarity descending, ties by pair id ascending. Candidates
    identical to the reference pair are skipped. One provider call per
    candidate (plus one for the reference itself).
    """
    if len(candidates) == 0:
        raise DataError("no candidate sentences to search")
    reference_vector = embed_context(
        provider, ContextQuery(reference.target, w_position))
    eligible = _eligible(reference, candidates, config.genuine_only)

    def score(pair: SentencePair) -> ContextMatch:
        pos = sample_position(config.seed, pair.id, len(pair.target))
        vec = embed_context(provider, ContextQuery(pair.target, pos))
        return ContextMatch(pair.id, pos, cosine(reference_vector, vec))

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            scored = list(pool.map(score, eligible))
    else:
        scored = [score(pair) for pair in eligible]
    kept = [m for m in scored if m.similarity >= config.min_similarity]
    return _rank(kept, config.k, len(eligible))


def exhaustive_search(reference: SentencePair, w_position: int,
                      candidates: ParallelCorpus, provider, k: int,
                      genuine_only: bool = True) -> list[ContextMatch]:
    """Score EVERY position of every candidate; keep each candidate's best
    position (ties: lowest position). The slow oracle for search_contexts.
    """
    if len(candidates) == 0:
        raise DataError("no candidate sentences to search")
    reference_vector = embed_context(
        provider, ContextQuery(reference.target, w_position))
    eligible = _eligible(reference, candidates, genuine_only)
    best = []
    for pair in eligible:
        pair_best = None
        for pos in range(len(pair.target)):
            vec = embed_context(provider, ContextQuery(pair.target, pos))
            sim = cosine(reference_vector, vec)
            if pair_best is None or sim > pair_best.similarity:
                pair_best = ContextMatch(pair.id, pos, sim)
        best.append(pair_best)
    return _rank(best, k, len(eligible))


def dump_matches(matches: list[ContextMatch], candidates: ParallelCorpus, path) -> None:
    """Audit TSV: pair id, position, similarity, sampled token, sentence."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for m in matches:
            sentence = candidates[m.pair_id].target
            f.write(f"{m.pair_id}\t{m.position}\t{m.similarity!r}\t"
                    f"{sentence.tokens[m.position]}\t{sentence.text}\n")
