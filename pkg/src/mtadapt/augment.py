"""Synthesize parallel pairs by substituting a held-out word into sentences
retrieved for their similar contexts.

The target side swaps the token at the matched position for the evaluation
word; the source side swaps the aligned span for the word's lexicon source.
Candidates that cannot take the swap cleanly become DiscardRecords instead
(discards are data, not failures).
"""

import dataclasses
import warnings
from dataclasses import dataclass

from .aligner import Alignment, Lexicon, TranslationTable, align
from .corpus import Origin, ParallelCorpus, Sentence, SentencePair
from .ctxsearch import ContextMatch, SearchConfig, search_contexts
from .errors import DataError

# augmentation runs on word tokens, before any subword segmentation
BPE_MARKER = "@@"

DISCARD_REASONS = (
    "no_aligned_source",
    "non_consecutive_alignment",
    "w_already_present",
    "degenerate",
)


@dataclass(frozen=True)
class DiscardRecord:
    pair_id: int
    reason: str

    def __post_init__(self):
        if self.reason not in DISCARD_REASONS:
            raise DataError(f"unknown discard reason {self.reason!r}")


@dataclass(frozen=True)
class SyntheticPair:
    """A synthesized pair plus the audit trail of how it was made.

    Provenance keys: pair_id (the candidate it came from), position (masked
    target index, where the word now sits), span_start, replaced_span
    (original source tokens), word, source_word, similarity. Provenance is
    for audit dumps only and never enters training-set files.
    """

    pair: SentencePair
    provenance: dict


def _reject_subword_tokens(sentence: Sentence, what: str) -> None:
    for token in sentence.tokens:
        if BPE_MARKER in token:
            raise DataError(
                f"{what} contains subword token {token!r}; "
                "augmentation requires word-tokenized text")


def substitute(match: ContextMatch, candidate: SentencePair,
               alignment: Alignment, w: str, w_prime: str):
    """Swap w into the matched target position and w_prime over the aligned
    source span. Returns a SyntheticPair, or a DiscardRecord when the
    candidate target holds w elsewhere, the position aligns to nothing or to
    a non-contiguous span, or the swap would change nothing.
    """
    if alignment.pair_id != candidate.id:
        raise DataError(
            f"alignment is for pair {alignment.pair_id}, not {candidate.id}")
    target_tokens = candidate.target.tokens
    if not 0 <= match.position < len(target_tokens):
        raise DataError(
            f"position {match.position} out of range for pair {candidate.id}")
    _reject_subword_tokens(candidate.source, f"pair {candidate.id} source")
    _reject_subword_tokens(candidate.target, f"pair {candidate.id} target")

    for j, token in enumerate(target_tokens):
        if token == w and j != match.position:
            return DiscardRecord(candidate.id, "w_already_present")
    linked = sorted(i for i, j in alignment.links if j == match.position)
    if not linked:
        return DiscardRecord(candidate.id, "no_aligned_source")
    lo, hi = linked[0], linked[-1]
    if len(linked) != hi - lo + 1:
        return DiscardRecord(candidate.id, "non_consecutive_alignment")

    source_tokens = candidate.source.tokens
    new_target = (target_tokens[:match.position] + (w,)
                  + target_tokens[match.position + 1:])
    new_source = source_tokens[:lo] + (w_prime,) + source_tokens[hi + 1:]
    if new_target == target_tokens and new_source == source_tokens:
        return DiscardRecord(candidate.id, "degenerate")

    # id is provisional (the candidate's); augment_word reassigns
    pair = SentencePair(candidate.id, Sentence(new_source),
                        Sentence(new_target), Origin.SYNTHETIC)
    provenance = {
        "pair_id": candidate.id,
        "position": match.position,
        "span_start": lo,
        "replaced_span": list(source_tokens[lo:hi + 1]),
        "word": w,
        "source_word": w_prime,
        "similarity": match.similarity,
    }
    return SyntheticPair(pair, provenance)


def containment_ok(synthetic: SyntheticPair) -> bool:
    """Re-scan the invariant: w sits at the masked target position and
    w_prime exactly where the replaced span was."""
    prov = synthetic.provenance
    pair = synthetic.pair
    return (pair.target.tokens[prov["position"]] == prov["word"]
            and pair.source.tokens[prov["span_start"]] == prov["source_word"])


def _augment_reference(reference: SentencePair, w_position: int, w: str,
                       w_prime: str, candidates: ParallelCorpus, provider,
                       table: TranslationTable, per_reference_target: int,
                       k: int, seed: int, genuine_only: bool):
    synthetics, discards = [], []
    attempted: set[int] = set()
    for fetch_k in (k, 2 * k):
        config = SearchConfig(k=fetch_k, seed=seed, genuine_only=genuine_only)
        matches = search_contexts(reference, w_position, candidates,
                                  provider, config)
        for match in matches:
            if len(synthetics) >= per_reference_target:
                break
            if match.pair_id in attempted:
                continue
            attempted.add(match.pair_id)
            candidate = candidates[match.pair_id]
            outcome = substitute(match, candidate,
                                 align(candidate, table), w, w_prime)
            if isinstance(outcome, SyntheticPair):
                outcome.provenance["reference_id"] = reference.id
                outcome.provenance["rank"] = len(synthetics)
                synthetics.append(outcome)
            else:
                discards.append(outcome)
        if len(synthetics) >= per_reference_target:
            break
    if len(synthetics) < per_reference_target:
        warnings.warn(
            f"word {w!r} reference {reference.id}: only {len(synthetics)} of "
            f"{per_reference_target} synthetic sentences could be built")
    return synthetics, discards


def augment_word(references, candidates: ParallelCorpus, provider,
                 table: TranslationTable, lexicon: Lexicon,
                 per_reference_target: int = 19, k: int | None = None,
                 seed: int = 0, genuine_only: bool = True,
                 workers: int = 1, first_id: int = 0):
    """Build per_reference_target synthetic pairs for each (pair, position)
    reference of one evaluation word.

    Candidates come from similarity search with over-fetch bound k (default
    3x the target); a shortfall doubles k once, retries the unattempted
    remainder, then emits what exists with a warning. Returns (synthetics,
    discards); synthetic pair ids run sequentially from first_id in
    reference order.
    """
    if not references:
        raise DataError("augment_word needs at least one reference")
    if per_reference_target < 1:
        raise DataError("per_reference_target must be >= 1")
    words = {ref.target.tokens[pos] for ref, pos in references}
    if len(words) != 1:
        raise DataError(
            f"references disagree on the evaluation word: {sorted(words)}")
    w = words.pop()
    w_prime = lexicon.source_for(w)
    for ref, _ in references:
        _reject_subword_tokens(ref.source, f"reference {ref.id} source")
        _reject_subword_tokens(ref.target, f"reference {ref.id} target")
    if k is None:
        k = 3 * per_reference_target
    if k < per_reference_target:
        raise DataError("k must be >= per_reference_target")

    def job(item):
        ref, pos = item
        return _augment_reference(ref, pos, w, w_prime, candidates, provider,
                                  table, per_reference_target, k, seed,
                                  genuine_only)

    if workers > 1 and len(references) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_reference = list(pool.map(job, references))
    else:
        per_reference = [job(item) for item in references]

    synthetics, discards = [], []
    next_id = first_id
    for ref_synths, ref_discards in per_reference:
        for synthetic in ref_synths:
            synthetics.append(SyntheticPair(
                dataclasses.replace(synthetic.pair, id=next_id),
                synthetic.provenance))
            next_id += 1
        discards.extend(ref_discards)
    return synthetics, discards


def discard_stats(discards) -> dict:
    stats = {reason: 0 for reason in DISCARD_REASONS}
    for record in discards:
        stats[record.reason] += 1
    return stats
