"""Reversible subword segmentation with inline casing.

Text is coarse-tokenized on whitespace and category/script changes, with
whitespace escaped by a meta symbol so that detokenization is exact.  A
BPE model learned on case-folded text splits each word unit into pieces,
and the original casing is re-attached as separate marker tokens:
``<T>`` for title case and ``<U>`` for uppercase, inserted right after
the piece they apply to.  Mixed-case words are split into
case-homogeneous segments first, so every piece is classifiable.
"""

import bisect
import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

from .errors import DanglingMarker, EmptyCorpus, UnclassifiablePiece, VocabTooSmall, DataError

logger = logging.getLogger('subword')

META_SYMBOL = '▁'
TITLE_MARKER = '<T>'
UPPER_MARKER = '<U>'
CASE_MARKERS = (TITLE_MARKER, UPPER_MARKER)

# Script ranges for letters; anything else falls into one 'other' bucket.
# Splitting letters of different scripts keeps code-switched text (very
# common in Japanese Reddit data) from fusing into one unit.
_SCRIPT_RANGES = [
    (0x0041, 0x024F, 'latin'), (0x0370, 0x03FF, 'greek'),
    (0x0400, 0x052F, 'cyrillic'), (0x0590, 0x05FF, 'hebrew'),
    (0x0600, 0x06FF, 'arabic'), (0x1E00, 0x1EFF, 'latin'),
    (0x3040, 0x309F, 'hiragana'), (0x30A0, 0x30FF, 'katakana'),
    (0x31F0, 0x31FF, 'katakana'), (0x3400, 0x9FFF, 'han'),
    (0xA720, 0xA7FF, 'latin'), (0xAC00, 0xD7AF, 'hangul'),
    (0xF900, 0xFAFF, 'han'), (0xFF66, 0xFF9F, 'katakana'),
    (0x20000, 0x3134F, 'han'),
]
_SCRIPT_STARTS = [r[0] for r in _SCRIPT_RANGES]


def _letter_script(c: str) -> str:
    cp = ord(c)
    i = bisect.bisect_right(_SCRIPT_STARTS, cp) - 1
    if i >= 0:
        start, end, name = _SCRIPT_RANGES[i]
        if cp <= end:
            return name
    return 'other'


def _char_class(c: str):
    if c.isalpha():
        return 'L' + _letter_script(c)
    if c.isdigit():
        return 'N'
    if c.isspace():
        return 'SP'
    # combining marks glue to whatever precedes them
    if unicodedata.category(c).startswith('M'):
        return 'M'
    return 'P'


def coarse_tokenize(text: str, meta_symbol: str = META_SYMBOL, protected=()) -> list[str]:
    """Split ``text`` into word units with escaped whitespace.

    Units break at whitespace and at letter/digit/punctuation and script
    changes.  Each whitespace character (plus one virtual sentence-initial
    one) becomes a meta symbol glued to the front of the following unit,
    so that concatenating the units and mapping the meta symbol back to a
    space reconstructs the input exactly (up to one leading space, which
    :func:`detokenize` strips).

    ``protected`` tokens (placeholders, reserved symbols) are kept atomic.
    """
    if not text:
        return []
    units: list[str] = []
    cur = meta_symbol  # virtual sentence-initial whitespace
    cls = 'SP'
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        hit = None
        for p in protected:
            if text.startswith(p, i):
                hit = p
                break
        if hit is not None:
            if cls == 'SP':
                units.append(cur + hit)
            else:
                if cur:
                    units.append(cur)
                units.append(hit)
            cur, cls = '', 'PROT'
            i += len(hit)
            continue
        if c.isspace() or c == meta_symbol:
            # a literal meta symbol in the input is treated as whitespace
            if cls == 'SP':
                cur += meta_symbol
            else:
                if cur:
                    units.append(cur)
                cur, cls = meta_symbol, 'SP'
            i += 1
            continue
        k = _char_class(c)
        if cls == 'SP':
            cur += c
            cls = k
        elif k == 'M' or k == cls:
            cur += c
            if k != 'M':
                cls = k
        else:
            if cur:
                units.append(cur)
            cur, cls = c, k
        i += 1
    if cur:
        units.append(cur)
    return units


def detokenize(pieces, meta_symbol: str = META_SYMBOL) -> str:
    """Concatenate pieces, map the meta symbol to space, strip one leading space."""
    s = ''.join(pieces).replace(meta_symbol, ' ')
    return s[1:] if s.startswith(' ') else s


def fold_case(text: str) -> str:
    """Length-preserving lowercase: characters whose lowercase form has a
    different length (e.g. dotted capital I) are kept as is, so that pieces
    of the folded word align one-to-one with the original characters."""
    out = []
    for c in text:
        low = c.lower()
        out.append(low if len(low) == 1 else c)
    return ''.join(out)


def _to_title(piece: str) -> str:
    """Uppercase the first letter of ``piece``, length-preserving."""
    for i, c in enumerate(piece):
        if c.isalpha():
            up = c.upper()
            if len(up) == 1:
                return piece[:i] + up + piece[i + 1:]
            return piece
    return piece


def _to_upper(piece: str) -> str:
    """Uppercase every letter of ``piece``, length-preserving."""
    out = []
    for c in piece:
        up = c.upper()
        out.append(up if len(up) == 1 else c)
    return ''.join(out)


def split_mixed_case(word: str) -> list[str]:
    """Split a word into case-homogeneous segments.

    Breaks before an uppercase letter that follows a lowercase one
    (``MacDonalds`` -> ``Mac Donalds``) and before the last letter of an
    uppercase run that is followed by lowercase (``ABc`` -> ``A Bc``), so
    every segment is lower, Title or UPPER.
    """
    n = len(word)
    if n < 2:
        return [word]
    segs = []
    start = 0
    for j in range(1, n):
        a, b = word[j - 1], word[j]
        split = (a.islower() and b.isupper()) or (
            a.isupper() and b.isupper() and j + 1 < n and word[j + 1].islower())
        if split:
            segs.append(word[start:j])
            start = j
    segs.append(word[start:])
    return segs


def case_encode(pieces, spans, strict: bool = True, counter=None) -> list[str]:
    """Attach case markers to lowercase pieces.

    ``spans`` holds the original-cased text of each piece.  Pieces whose
    span is all lowercase (or has no letters) get no marker; an uppercase
    span gets ``<U>`` and a title-case span ``<T>``, inserted right after
    the piece.  A single uppercase letter counts as title case.

    The marker is only emitted when re-applying it to the piece reproduces
    the span exactly, which makes :func:`case_decode` an exact inverse.
    Raises :class:`UnclassifiablePiece` for mixed-case spans unless
    ``strict`` is off, in which case the piece is emitted unmarked and the
    anomaly counted.
    """
    if len(pieces) != len(spans):
        raise DataError('case_encode: pieces and spans differ in length')
    out = []
    for piece, span in zip(pieces, spans):
        out.append(piece)
        if span == piece:
            continue
        if _to_title(piece) == span:
            out.append(TITLE_MARKER)
        elif _to_upper(piece) == span:
            out.append(UPPER_MARKER)
        elif strict:
            raise UnclassifiablePiece(
                f'cannot encode {span!r} as cased variant of {piece!r}; '
                f'split mixed-case words first')
        else:
            if counter is not None:
                counter['unclassifiable_piece'] = counter.get('unclassifiable_piece', 0) + 1
    return out


def case_decode(tokens, lenient: bool = False, counter=None) -> list[str]:
    """Consume case markers, restoring cased pieces.

    ``<T>`` uppercases the first letter of the preceding piece and ``<U>``
    all of them.  A marker with no preceding piece raises
    :class:`DanglingMarker`, or is dropped and counted in lenient mode.
    """
    out: list[str] = []
    prev_marker = False
    for tok in tokens:
        if tok in CASE_MARKERS:
            if not out:
                if not lenient:
                    raise DanglingMarker(f'{tok} has no preceding piece')
                if counter is not None:
                    counter['dangling_marker'] = counter.get('dangling_marker', 0) + 1
                continue
            if prev_marker and counter is not None:
                counter['consecutive_marker'] = counter.get('consecutive_marker', 0) + 1
            out[-1] = _to_title(out[-1]) if tok == TITLE_MARKER else _to_upper(out[-1])
            prev_marker = True
        else:
            out.append(tok)
            prev_marker = False
    return out


def validate_cased_seq(tokens) -> bool:
    """Check the marker grammar: no marker first, none after another marker."""
    prev_marker = True  # sentence start counts as "no piece yet"
    for tok in tokens:
        if tok in CASE_MARKERS:
            if prev_marker:
                return False
            prev_marker = True
        else:
            prev_marker = False
    return True


@dataclass
class SubwordModel:
    """An ordered BPE merge list plus a piece vocabulary.

    ``merges`` are applied in list order (earlier merges have priority).
    Pieces whose training frequency is below ``vocab_threshold`` are
    re-split into characters at application time.
    """

    merges: list
    vocab: dict
    meta_symbol: str = META_SYMBOL
    vocab_threshold: int = 0
    _ranks: dict = field(default=None, repr=False, compare=False)
    _cache: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self._ranks = {tuple(m): i for i, m in enumerate(self.merges)}
        self._cache = {}

    def encode_word(self, word: str) -> list[str]:
        """Apply the merge list to one (folded) word unit."""
        cached = self._cache.get(word)
        if cached is not None:
            return list(cached)
        ranks = self._ranks
        sym = list(word)
        while len(sym) > 1:
            best = None
            best_rank = len(self.merges)
            for pair in zip(sym, sym[1:]):
                r = ranks.get(pair, -1)
                if 0 <= r < best_rank:
                    best, best_rank = pair, r
            if best is None:
                break
            sym = _merge_symbols(sym, best)
        out = []
        for p in sym:
            if len(p) > 1 and self.vocab.get(p, 0) < self.vocab_threshold:
                out.extend(p)
            else:
                out.append(p)
        if len(self._cache) > 2 ** 18:
            self._cache.clear()
        self._cache[word] = tuple(out)
        return out

    def save(self, path):
        """Write the model: a header line, the merges, a blank line, the vocab."""
        with open(path, 'w', encoding='utf-8') as f:
            f.write(f'meta_symbol={self.meta_symbol} threshold={self.vocab_threshold}\n')
            for left, right in self.merges:
                f.write(f'{left}\t{right}\n')
            f.write('\n')
            for piece, freq in self.vocab.items():
                f.write(f'{piece}\t{freq}\n')

    @classmethod
    def load(cls, path):
        with open(path, encoding='utf-8') as f:
            header = f.readline().rstrip('\n')
            fields = dict(item.split('=', 1) for item in header.split())
            merges = []
            for line in f:
                line = line.rstrip('\n')
                if not line:
                    break
                left, _, right = line.partition('\t')
                merges.append((left, right))
            vocab = {}
            for line in f:
                line = line.rstrip('\n')
                if not line:
                    continue
                piece, _, freq = line.rpartition('\t')
                vocab[piece] = int(freq)
        return cls(merges=merges, vocab=vocab,
                   meta_symbol=fields.get('meta_symbol', META_SYMBOL),
                   vocab_threshold=int(fields.get('threshold', 0)))


def _merge_symbols(sym, pair):
    """Merge non-overlapping occurrences of ``pair`` left to right."""
    left, right = pair
    out = []
    i = 0
    n = len(sym)
    while i < n:
        if i + 1 < n and sym[i] == left and sym[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(sym[i])
            i += 1
    return out


def _word_pairs(sym):
    return Counter(zip(sym, sym[1:]))


def train_bpe(corpus, target_vocab_size: int, vocab_threshold: int = 0,
              meta_symbol: str = META_SYMBOL, protected=()) -> SubwordModel:
    """Learn a BPE model from an iterable of lines.

    Lines are coarse-tokenized, mixed-case words split and case-folded, so
    the learned pieces are all lowercase (casing is carried by markers).
    The most frequent adjacent pair is merged repeatedly until the
    vocabulary (characters plus merges) reaches ``target_vocab_size``.
    Ties break deterministically: higher pair frequency, then smaller left
    piece, then smaller right piece.  Case markers and ``protected``
    tokens never take part in merges.
    """
    skip = set(protected) | set(CASE_MARKERS)
    word_counts = Counter()
    for line in corpus:
        for unit in coarse_tokenize(line, meta_symbol, protected):
            core = unit.lstrip(meta_symbol)
            if core in skip:
                continue
            for seg in split_mixed_case(unit):
                word_counts[fold_case(seg)] += 1
    if not word_counts:
        raise EmptyCorpus('no word units in training corpus')

    chars = {c for w in word_counts for c in w}
    if target_vocab_size < len(chars):
        raise VocabTooSmall(
            f'target vocabulary {target_vocab_size} is below the '
            f'character inventory ({len(chars)})')
    budget = target_vocab_size - len(chars)

    words = [list(w) for w in word_counts]
    freqs = list(word_counts.values())
    pair_counts = Counter()
    where = {}
    for idx, (sym, freq) in enumerate(zip(words, freqs)):
        for pair, k in _word_pairs(sym).items():
            pair_counts[pair] += k * freq
            where.setdefault(pair, set()).add(idx)

    merges = []
    while len(merges) < budget and pair_counts:
        best_count = max(pair_counts.values())
        best = min(p for p, c in pair_counts.items() if c == best_count)
        merges.append(best)
        for idx in sorted(where[best]):
            freq = freqs[idx]
            old = words[idx]
            for pair, k in _word_pairs(old).items():
                pair_counts[pair] -= k * freq
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                    where.pop(pair, None)
                else:
                    s = where.get(pair)
                    if s is not None:
                        s.discard(idx)
            new = _merge_symbols(old, best)
            words[idx] = new
            for pair, k in _word_pairs(new).items():
                pair_counts[pair] += k * freq
                where.setdefault(pair, set()).add(idx)

    model = SubwordModel(merges=merges, vocab={}, meta_symbol=meta_symbol,
                         vocab_threshold=vocab_threshold)
    vocab = Counter()
    for word, freq in word_counts.items():
        for piece in _apply_merges_only(word, model):
            vocab[piece] += freq
    for left, right in merges:
        vocab.setdefault(left + right, 0)
    model.vocab = dict(vocab)
    model._cache.clear()
    logger.debug('trained BPE model: %d chars, %d merges, %d vocab entries',
                 len(chars), len(merges), len(vocab))
    return model


def _apply_merges_only(word, model):
    """Apply merges without the threshold re-split (used to count the vocab)."""
    sym = list(word)
    ranks = model._ranks
    while len(sym) > 1:
        best, best_rank = None, len(model.merges)
        for pair in zip(sym, sym[1:]):
            r = ranks.get(pair, -1)
            if 0 <= r < best_rank:
                best, best_rank = pair, r
        if best is None:
            break
        sym = _merge_symbols(sym, best)
    return sym


def apply_bpe(units, model: SubwordModel) -> list[str]:
    """Segment lowercase word units into pieces.

    Pieces always concatenate back to the unit; unknown characters pass
    through as single-character pieces.
    """
    pieces = []
    for unit in units:
        pieces.extend(model.encode_word(unit))
    return pieces


def segment(text: str, model: SubwordModel, protected=(), strict: bool = True,
            counter=None) -> list[str]:
    """Tokenize a cased line into lowercase pieces plus case markers.

    This composes coarse tokenization, mixed-case splitting, case folding,
    BPE and marker insertion.  ``protected`` tokens stay atomic and
    unmarked.
    """
    prot = set(protected)
    tokens: list[str] = []
    for unit in coarse_tokenize(text, model.meta_symbol, protected):
        core = unit.lstrip(model.meta_symbol)
        if core in prot:
            tokens.append(unit)
            continue
        for seg in split_mixed_case(unit):
            folded = fold_case(seg)
            pieces = model.encode_word(folded)
            spans = []
            pos = 0
            for p in pieces:
                spans.append(seg[pos:pos + len(p)])
                pos += len(p)
            tokens.extend(case_encode(pieces, spans, strict=strict, counter=counter))
    return tokens


def unsegment(tokens, meta_symbol: str = META_SYMBOL, lenient: bool = True,
              counter=None) -> str:
    """Inverse of :func:`segment`: restore casing, join pieces, unescape."""
    return detokenize(case_decode(tokens, lenient=lenient, counter=counter), meta_symbol)
