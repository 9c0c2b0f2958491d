"""Corpus BLEU matching the shared-task metric: case-sensitive, single
reference, exponential smoothing, mteval-13a tokenization.

The tokenizer pads punctuation with spaces except between digits, splits
symbols off words, and normalizes control characters, like the WMT
mteval-v13a scorer.  Scores take detokenized hypotheses and untokenized
references; pre-tokenized input (e.g. Japanese segmented by an external
tokenizer) can bypass the tokenizer.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyCorpus, LengthMismatch

NGRAM_ORDER = 4

_13A_RULES = [
    (re.compile(r'<skipped>'), ''),
    (re.compile(r'[\x00-\x1f\x7f]'), ' '),
    (re.compile(r'&quot;'), '"'),
    (re.compile(r'&amp;'), '&'),
    (re.compile(r'&lt;'), '<'),
    (re.compile(r'&gt;'), '>'),
]
_13A_PUNCT = re.compile(r'([\{-\~\[-\` -\&\(-\+\:-\@\/])')
_13A_PERIOD_PRE = re.compile(r'([^0-9])([\.,])')
_13A_PERIOD_POST = re.compile(r'([\.,])([^0-9])')
_13A_DIGIT_DASH = re.compile(r'([0-9])(-)')


def tokenize_13a(line: str) -> list:
    """mteval-v13a-compatible tokenization of one detokenized line."""
    norm = line
    for pattern, repl in _13A_RULES:
        norm = pattern.sub(repl, norm)
    norm = f' {norm} '
    norm = _13A_PUNCT.sub(r' \1 ', norm)
    norm = _13A_PERIOD_PRE.sub(r'\1 \2 ', norm)
    norm = _13A_PERIOD_POST.sub(r' \1 \2', norm)
    norm = _13A_DIGIT_DASH.sub(r'\1 \2 ', norm)
    return norm.split()


@dataclass(frozen=True)
class BleuScore:
    """A corpus BLEU score with its sufficient statistics.

    ``precisions`` are the four modified n-gram precisions as fractions in
    [0, 1]; the score equals ``brevity_penalty * geometric mean * 100``.
    """

    score: float
    precisions: tuple
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    correct: tuple
    total: tuple

    def signature(self, tokenized: bool = False) -> str:
        tok = 'none' if tokenized else '13a'
        return f'BLEU+case.mixed+numrefs.1+smooth.exp+tok.{tok}'

    def __str__(self):
        pcts = '/'.join(f'{100 * p:.1f}' for p in self.precisions)
        return (f'BLEU = {self.score:.2f} {pcts} '
                f'(BP = {self.brevity_penalty:.3f} '
                f'hyp_len = {self.hyp_len} ref_len = {self.ref_len})')


def _ngrams(tokens, order):
    return Counter(tuple(tokens[i:i + n])
                   for n in range(1, order + 1)
                   for i in range(len(tokens) - n + 1))


def _score_from_counts(correct, total, hyp_len, ref_len) -> BleuScore:
    precisions = []
    smooth = 1.0
    for n in range(NGRAM_ORDER):
        if total[n] == 0:
            precisions.append(0.0)
        elif correct[n] == 0:
            # exponential smoothing: each zero-match order doubles the
            # smoothing value and scores 1/(value * total)
            smooth *= 2
            precisions.append(1.0 / (smooth * total[n]))
        else:
            precisions.append(correct[n] / total[n])
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len)
    else:
        bp = 1.0
    if min(precisions) > 0:
        geo_mean = math.exp(sum(math.log(p) for p in precisions) / NGRAM_ORDER)
    else:
        geo_mean = 0.0
    return BleuScore(score=bp * geo_mean * 100.0,
                     precisions=tuple(precisions), brevity_penalty=bp,
                     hyp_len=hyp_len, ref_len=ref_len,
                     correct=tuple(correct), total=tuple(total))


def _bleu_from_tokens(hyp_token_lists, ref_token_lists) -> BleuScore:
    correct = [0] * NGRAM_ORDER
    total = [0] * NGRAM_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyp_token_lists, ref_token_lists):
        hyp_len += len(hyp)
        ref_len += len(ref)
        ref_counts = _ngrams(ref, NGRAM_ORDER)
        for ngram, count in _ngrams(hyp, NGRAM_ORDER).items():
            n = len(ngram) - 1
            total[n] += count
            correct[n] += min(count, ref_counts.get(ngram, 0))
    return _score_from_counts(correct, total, hyp_len, ref_len)


def _check_inputs(hyps, refs):
    if len(hyps) != len(refs):
        raise LengthMismatch(
            f'{len(hyps)} hypotheses vs {len(refs)} references')
    if not hyps:
        raise EmptyCorpus('no sentences to score')


def corpus_bleu(hyps, refs) -> BleuScore:
    """Corpus BLEU over detokenized hypothesis/reference line lists."""
    hyps, refs = list(hyps), list(refs)
    _check_inputs(hyps, refs)
    return _bleu_from_tokens([tokenize_13a(h) for h in hyps],
                             [tokenize_13a(r) for r in refs])


def pretokenized_bleu(hyps, refs, already_tokenized: bool = True) -> BleuScore:
    """Like :func:`corpus_bleu` but over whitespace-tokenized input (for
    text segmented by an external tokenizer, e.g. Japanese)."""
    if not already_tokenized:
        return corpus_bleu(hyps, refs)
    hyps, refs = list(hyps), list(refs)
    _check_inputs(hyps, refs)
    return _bleu_from_tokens([h.split() for h in hyps],
                             [r.split() for r in refs])
