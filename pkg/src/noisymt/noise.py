"""Natural-noise mining and injection.

Noisy variants of known words are mined from monolingual text by matching
out-of-lexicon tokens against the lexicon under an extended edit distance
(Damerau-Levenshtein computed on repetition-collapsed strings, so letter
repetitions are free).  Injection randomly replaces words with mined
variants and applies rule-based corruptions: confusion-pair swaps,
adjacent letter swaps, punctuation substitutions, spaces around
punctuation and accent removal.  Only source sides are ever noised.
"""

import random
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

from .corpusbuild import NOISE_TAG, tag_line
from .errors import ValidationError
from .filtering import SentencePair
from .util import data_path, derive_seed

_WORD = re.compile(r'[^\W\d_]+')


def collapse_repetitions(word: str) -> str:
    """Collapse every maximal run of an identical letter to length one."""
    out = []
    prev = None
    for c in word:
        if c.isalpha() and c == prev:
            continue
        out.append(c)
        prev = c
    return ''.join(out)


def _damerau_levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance with adjacent transpositions."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2 = None
    prev = list(range(lb + 1))
    for i in range(la):
        cur = [i + 1] + [0] * lb
        for j in range(lb):
            cost = 0 if a[i] == b[j] else 1
            cur[j + 1] = min(prev[j] + cost, prev[j + 1] + 1, cur[j] + 1)
            if i > 0 and j > 0 and a[i] == b[j - 1] and a[i - 1] == b[j]:
                cur[j + 1] = min(cur[j + 1], prev2[j - 1] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def extended_edit_distance(a: str, b: str) -> int:
    """Damerau-Levenshtein distance on repetition-collapsed strings, so
    ``soooo`` and ``so`` are at distance zero."""
    return _damerau_levenshtein(collapse_repetitions(a), collapse_repetitions(b))


@dataclass
class VariantMap:
    """Canonical word -> observed noisy variants with their corpus counts."""

    entries: dict = field(default_factory=dict)

    def add(self, canonical: str, variant: str, count: int):
        self.entries.setdefault(canonical, []).append((variant, count))

    def variants_for(self, word: str) -> list:
        return [v for v, _ in self.entries.get(word, [])]

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    def save(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            for canonical in sorted(self.entries):
                for variant, count in sorted(self.entries[canonical]):
                    f.write(f'{canonical}\t{variant}\t{count}\n')

    @classmethod
    def load(cls, path):
        m = cls()
        with open(path, encoding='utf-8') as f:
            for line in f:
                line = line.rstrip('\n')
                if not line or line.startswith('#'):
                    continue
                canonical, variant, count = line.split('\t')
                m.add(canonical, variant, int(count))
        return m


def _match_threshold(canonical_len: int):
    """Distance budget by canonical word length: short words are never
    matched (too many false positives), medium words get one edit, long
    words two."""
    if canonical_len < 4:
        return None
    return 1 if canonical_len <= 7 else 2


def mine_variants(lines, lexicon, min_count: int = 1) -> VariantMap:
    """Extract noisy variants of lexicon words from monolingual lines.

    Tokens absent from the lexicon are matched against lexicon words of
    length >= 4 within the extended edit distance budget; ties go to the
    lexicon word most frequent in the same data, then alphabetical.
    """
    lexicon = {w.casefold() for w in lexicon if w.strip()}
    if not lexicon:
        raise ValidationError('empty lexicon')
    counts = Counter()
    for line in lines:
        counts.update(t.casefold() for t in _WORD.findall(line))

    by_len = {}
    for w in lexicon:
        d = _match_threshold(len(w))
        if d is None:
            continue
        by_len.setdefault(len(collapse_repetitions(w)), []).append(w)

    variants = VariantMap()
    for token, count in counts.items():
        if token in lexicon or count < min_count:
            continue
        collapsed = collapse_repetitions(token)
        best = None
        for length, words in by_len.items():
            if abs(length - len(collapsed)) > 2:
                continue
            for w in words:
                d = _match_threshold(len(w))
                if abs(length - len(collapsed)) > d:
                    continue
                dist = extended_edit_distance(token, w)
                if dist <= d:
                    key = (dist, -counts[w], w)
                    if best is None or key < best[0]:
                        best = (key, w)
        if best is not None:
            variants.add(best[1], token, count)
    return variants


@dataclass
class NoiseRuleSet:
    """Probabilities and tables for the rule-based noise injector.

    Each rule class fires independently per token with its own
    probability; all probabilities default to zero so an empty rule set is
    the identity.
    """

    confusion_pairs: list = field(default_factory=list)  # (form_a, form_b, prob)
    word_replace_prob: float = 0.0
    letter_swap_prob: float = 0.0
    punct_subst_prob: float = 0.0
    punct_table: dict = field(default_factory=dict)
    space_around_punct_prob: float = 0.0
    accent_removal_prob: float = 0.0

    def __post_init__(self):
        probs = [self.word_replace_prob, self.letter_swap_prob,
                 self.punct_subst_prob, self.space_around_punct_prob,
                 self.accent_removal_prob]
        probs += [p for _, _, p in self.confusion_pairs]
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f'probability {p} outside [0, 1]')
        for a, b, _ in self.confusion_pairs:
            if a == b:
                raise ValidationError(f'confusion pair maps {a!r} to itself')
        self._confusions = {}
        for a, b, p in self.confusion_pairs:
            self._confusions[a] = (b, p)
            self._confusions.setdefault(b, (a, p))

    @classmethod
    def defaults(cls, lang: str = 'en'):
        """The shipped rule set: seed confusion lists for en/fr plus mild
        character-level corruption rates."""
        pairs = load_confusion_pairs(
            data_path(f'confusion_{lang}.tsv') if lang in ('en', 'fr')
            else data_path('confusion_en.tsv'), default_prob=0.1)
        table = {}
        with open(data_path('punct_subst.tsv'), encoding='utf-8') as f:
            for line in f:
                line = line.rstrip('\n')
                if not line or line.startswith('#'):
                    continue
                k, _, v = line.partition('\t')
                table[k] = v
        return cls(confusion_pairs=pairs, word_replace_prob=0.1,
                   letter_swap_prob=0.05, punct_subst_prob=0.05,
                   punct_table=table, space_around_punct_prob=0.05,
                   accent_removal_prob=0.05)


def load_confusion_pairs(path, default_prob: float = 0.1) -> list:
    """Read ``form_a<TAB>form_b[<TAB>prob]`` lines."""
    pairs = []
    with open(path, encoding='utf-8') as f:
        for line in f:
            line = line.rstrip('\n')
            if not line or line.startswith('#'):
                continue
            fields = line.split('\t')
            if len(fields) == 2:
                pairs.append((fields[0], fields[1], default_prob))
            else:
                pairs.append((fields[0], fields[1], float(fields[2])))
    return pairs


def _strip_accents(token: str) -> str:
    decomposed = unicodedata.normalize('NFD', token)
    return unicodedata.normalize(
        'NFC', ''.join(c for c in decomposed if unicodedata.category(c) != 'Mn'))


def _noise_token(token: str, rules: NoiseRuleSet, variants, rng) -> str:
    if rules.word_replace_prob and variants is not None:
        mined = variants.variants_for(token.casefold())
        if mined and rng.random() < rules.word_replace_prob:
            token = mined[rng.randrange(len(mined))]
    swap = rules._confusions.get(token)
    if swap is not None and rng.random() < swap[1]:
        token = swap[0]
    if rules.letter_swap_prob and rng.random() < rules.letter_swap_prob:
        spots = [i for i in range(len(token) - 1)
                 if token[i].isalpha() and token[i + 1].isalpha()]
        if spots:
            i = spots[rng.randrange(len(spots))]
            token = token[:i] + token[i + 1] + token[i] + token[i + 2:]
    if rules.punct_subst_prob and rules.punct_table and rng.random() < rules.punct_subst_prob:
        spots = [i for i, c in enumerate(token) if c in rules.punct_table]
        if spots:
            i = spots[rng.randrange(len(spots))]
            token = token[:i] + rules.punct_table[token[i]] + token[i + 1:]
    if rules.space_around_punct_prob and rng.random() < rules.space_around_punct_prob:
        spots = [i for i, c in enumerate(token)
                 if not c.isalnum() and not c.isspace()]
        if spots:
            i = spots[rng.randrange(len(spots))]
            token = (token[:i] + ' ' + token[i] + ' ' + token[i + 1:]).strip()
    if rules.accent_removal_prob and rng.random() < rules.accent_removal_prob:
        token = _strip_accents(token)
    return token


def apply_noise(line: str, rules: NoiseRuleSet, variants: VariantMap,
                seed: int) -> str:
    """Noise one line deterministically under ``seed``.

    With all probabilities zero the output equals the input for every
    line.
    """
    rng = random.Random(seed)
    return ' '.join(_noise_token(t, rules, variants, rng) for t in line.split(' '))


def augment_corpus(pairs, rules: NoiseRuleSet, variants: VariantMap, seed: int):
    """Yield the clean corpus, then a copy with noised, noise-tagged sources.

    ``pairs`` must be re-iterable (a list or a file-backed reader); target
    sides are never modified.  Each line's randomness is derived from
    (seed, line_no), so the output is independent of scheduling.
    """
    for pair in pairs:
        yield pair
    for pair in pairs:
        noised = apply_noise(pair.source, rules, variants,
                             derive_seed(seed, 'noise', pair.line_no))
        yield SentencePair(source=tag_line(noised, None, NOISE_TAG),
                           target=pair.target, origin=pair.origin,
                           line_no=pair.line_no)
