"""Corpus toolkit for few-shot adaptation of MT systems to novel vocabulary.

Selects held-out evaluation words, synthesizes parallel training sentences
by contextual substitution, builds fine-tuning sets under four mixing
strategies, and scores an external MT system's hypotheses.
"""

__version__ = "0.1.0"
