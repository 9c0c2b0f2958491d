"""Character-level text normalization and French punctuation fixes.

Provides ordered replacement tables (applied longest-match-first), a
shipped approximation of compatibility normalization for the character
classes that matter in noisy social-media text (fullwidth ASCII forms,
vulgar fractions, ideographic space), Moses-style punctuation
normalization for MT outputs, and the French quote fix (ASCII apostrophes
and double quotes to typographic apostrophes and guillemets).
"""

import functools
import re

from .errors import ValidationError
from .util import data_path

NBSP = ' '

_MULTISPACE = re.compile(r'  +')
# an ASCII apostrophe with a letter on both sides
_APOSTROPHE = re.compile(r"(?<=[^\W\d_])'(?=[^\W\d_])")


class NormTable:
    """An ordered mapping of strings to replacement strings.

    Replacement is left-to-right, longest-match-first.  The table must be
    closed under its own application (no replacement value contains a key),
    which makes :func:`normalize_chars` idempotent.
    """

    def __init__(self, entries, name='custom'):
        self.entries = dict(entries)
        self.name = name
        self._validate()
        keys = sorted(self.entries, key=len, reverse=True)
        self._pattern = re.compile('|'.join(re.escape(k) for k in keys)) if keys else None

    def _validate(self):
        for key, value in self.entries.items():
            if not key:
                raise ValidationError(f'{self.name}: empty key')
            if key == value:
                raise ValidationError(f'{self.name}: {key!r} maps to itself')
        for value in self.entries.values():
            again = self._apply_once(value)
            if again != value:
                raise ValidationError(
                    f'{self.name}: replacement {value!r} is itself rewritten to {again!r}')

    def _apply_once(self, text):
        out = []
        i = 0
        keys = sorted(self.entries, key=len, reverse=True)
        while i < len(text):
            for k in keys:
                if text.startswith(k, i):
                    out.append(self.entries[k])
                    i += len(k)
                    break
            else:
                out.append(text[i])
                i += 1
        return ''.join(out)

    def __len__(self):
        return len(self.entries)

    def key_codepoints(self):
        return {c for k in self.entries for c in k}

    @classmethod
    def from_file(cls, path, name=None):
        """Load a table from a UTF-8 file of ``key<TAB>replacement`` lines.

        Lines starting with ``#`` are comments.  Keys may span several
        codepoints.
        """
        entries = {}
        with open(path, encoding='utf-8') as f:
            for raw in f:
                line = raw.rstrip('\n')
                if not line or line.startswith('#'):
                    continue
                key, sep, value = line.partition('\t')
                if not sep:
                    raise ValidationError(f'{path}: missing TAB in rule {line!r}')
                entries[key] = value
        return cls(entries, name=name or str(path))

    def save(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            for key, value in self.entries.items():
                f.write(f'{key}\t{value}\n')


@functools.lru_cache(maxsize=None)
def builtin_table(name: str) -> NormTable:
    """Load one of the shipped tables: ``nfkc-approx`` or ``moses-punct``."""
    files = {'nfkc-approx': 'nfkc_approx.tsv', 'moses-punct': 'moses_punct.tsv'}
    if name not in files:
        raise ValidationError(f'unknown builtin table {name!r}')
    return NormTable.from_file(data_path(files[name]), name=name)


def normalize_chars(text: str, table: NormTable) -> str:
    """Replace every key occurrence in ``text`` via ``table``.

    Matching is left-to-right and longest-match-first; because tables are
    closed, the result is stable under re-application.
    """
    if table._pattern is None:
        return text
    return table._pattern.sub(lambda m: table.entries[m.group()], text)


def fix_quotes_fr(text: str) -> str:
    """Fix quotes in detokenized French MT output.

    ASCII apostrophes between letters become U+2019, and paired ASCII
    double quotes become guillemets with a no-break space inside.  Quotes
    are paired greedily left to right; an unpaired trailing quote is left
    untouched.
    """
    text = _APOSTROPHE.sub('’', text)
    positions = [i for i, c in enumerate(text) if c == '"']
    if len(positions) % 2:
        positions = positions[:-1]
    if not positions:
        return text
    chars = list(text)
    for n, i in enumerate(positions):
        chars[i] = '«' + NBSP if n % 2 == 0 else NBSP + '»'
    return ''.join(chars)


def normalize_punct(text: str, table: NormTable | None = None) -> str:
    """Moses-style punctuation normalization for detokenized text.

    Applies the ``moses-punct`` table (curly quotes to ASCII, dashes to
    hyphen, ellipsis to ``...``, exotic spaces to plain space), then
    collapses repeated spaces and strips the ends.
    """
    if table is None:
        table = builtin_table('moses-punct')
    text = normalize_chars(text, table)
    return _MULTISPACE.sub(' ', text).strip()
