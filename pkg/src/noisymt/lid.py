"""Character-trigram language identification.

A small add-one-smoothed trigram model per language, trained from seed
text shipped with the package (en, fr, ja).  It is meant for filtering
parallel corpora where the wrong-language side is usually obvious (a
copied sentence, a different script), not for fine-grained LID.  Any
callable mapping a line to a language code (or None) can replace it.
"""

import functools
import math
from collections import Counter

from .util import data_path

_SEED_FILES = {'en': 'lid_seed_en.txt', 'fr': 'lid_seed_fr.txt', 'ja': 'lid_seed_ja.txt'}


def _trigrams(line: str):
    s = ' ' + line.lower() + ' '
    return (s[i:i + 3] for i in range(len(s) - 2))


class TrigramClassifier:
    """Scores a line against per-language trigram log-probabilities."""

    def __init__(self, counts: dict):
        vocab = set()
        for c in counts.values():
            vocab.update(c)
        v = max(len(vocab), 1)
        self.logprobs = {}
        self.floors = {}
        for lang, c in counts.items():
            total = sum(c.values()) + v
            self.logprobs[lang] = {t: math.log((n + 1) / total) for t, n in c.items()}
            self.floors[lang] = math.log(1 / total)

    @classmethod
    def train(cls, texts: dict):
        """Train from ``{lang: iterable of lines}``."""
        counts = {}
        for lang, lines in texts.items():
            c = Counter()
            for line in lines:
                c.update(_trigrams(line))
            counts[lang] = c
        return cls(counts)

    def classify(self, line: str):
        """Return the most likely language code, or None if unclassifiable."""
        grams = [t for t in _trigrams(line.strip())] if line.strip() else []
        if not grams:
            return None
        best_lang, best_score = None, -math.inf
        for lang in sorted(self.logprobs):
            lp = self.logprobs[lang]
            floor = self.floors[lang]
            score = 0.0
            for t in grams:
                score += lp.get(t, floor)
            if score > best_score:
                best_lang, best_score = lang, score
        return best_lang

    __call__ = classify


@functools.lru_cache(maxsize=None)
def builtin_classifier() -> TrigramClassifier:
    """The default classifier, trained from the shipped en/fr/ja seed text."""
    texts = {}
    for lang, fname in _SEED_FILES.items():
        texts[lang] = data_path(fname).read_text(encoding='utf-8').splitlines()
    return TrigramClassifier.train(texts)
