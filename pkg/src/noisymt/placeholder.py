"""Placeholder handling for emojis and Reddit user/subreddit names.

Emojis and Reddit names are replaced with reserved tokens (``<emoji>``,
``<user>``, ``<reddit>``) before segmentation, with the original surface
strings recorded per sentence so the source-side originals can be copied
back into the translation in order.  Decoding is lenient: MT output is
untrusted, so surplus placeholders are deleted and unused originals
ignored, both counted.
"""

import base64
import functools
import re
from dataclasses import dataclass, field

from .errors import ValidationError
from .util import data_path

EMOJI_TOKEN = '<emoji>'
USER_TOKEN = '<user>'
REDDIT_TOKEN = '<reddit>'
PLACEHOLDER_TOKENS = (EMOJI_TOKEN, USER_TOKEN, REDDIT_TOKEN)
KINDS = ('emoji', 'user', 'reddit')
_TOKEN_OF = {'emoji': EMOJI_TOKEN, 'user': USER_TOKEN, 'reddit': REDDIT_TOKEN}

# internal sentinel used while deleting surplus placeholders
_GAP = ''

_NAME = r'[A-Za-z0-9_-]{1,30}'


def _load_ranges(path):
    ranges = []
    with open(path, encoding='utf-8') as f:
        for raw in f:
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            start, sep, end = line.partition('..')
            if not sep:
                raise ValidationError(f'{path}: bad range line {raw!r}')
            ranges.append((int(start, 16), int(end, 16)))
    return sorted(ranges)


@functools.lru_cache(maxsize=None)
def _patterns():
    ranges = _load_ranges(data_path('emoji_ranges.txt'))
    cls = '[' + ''.join(
        re.escape(chr(a)) if a == b else re.escape(chr(a)) + '-' + re.escape(chr(b))
        for a, b in ranges) + ']'
    mods = '[️\U0001F3FB-\U0001F3FF]'
    ri = '[\U0001F1E6-\U0001F1FF]'
    # a flag (two regional indicators) or a base pictograph with optional
    # modifiers, possibly chained with zero-width joiners
    emoji = (f'(?:{ri}{ri}'
             f'|{cls}(?:{mods})*(?:‍{cls}(?:{mods})*)*)')
    user = rf'(?<![A-Za-z0-9_/])(?:/ ?)?u ?/ ?{_NAME}(?![A-Za-z0-9_-])'
    reddit = rf'(?<![A-Za-z0-9_/])(?:/ ?)?r ?/ ?{_NAME}(?![A-Za-z0-9_-])'
    master = re.compile(f'(?P<emoji>{emoji})|(?P<user>{user})|(?P<reddit>{reddit})')
    token = re.compile('|'.join(re.escape(t) for t in PLACEHOLDER_TOKENS))
    return master, token


@dataclass
class PlaceholderMap:
    """Original surface strings per kind, in left-to-right sentence order."""

    emoji: list = field(default_factory=list)
    user: list = field(default_factory=list)
    reddit: list = field(default_factory=list)

    def originals(self, kind: str) -> list:
        return getattr(self, kind)

    def counts(self) -> dict:
        return {kind: len(getattr(self, kind)) for kind in KINDS}

    def is_empty(self) -> bool:
        return not (self.emoji or self.user or self.reddit)

    def to_sidecar_line(self) -> str:
        fields = []
        for kind in KINDS:
            for i, orig in enumerate(getattr(self, kind)):
                payload = base64.b64encode(orig.encode('utf-8')).decode('ascii')
                fields.append(f'{kind}:{i}:{payload}')
        return '\t'.join(fields)

    @classmethod
    def from_sidecar_line(cls, line: str):
        m = cls()
        line = line.rstrip('\n')
        if not line:
            return m
        for item in line.split('\t'):
            kind, index, payload = item.split(':', 2)
            if kind not in KINDS:
                raise ValidationError(f'unknown placeholder kind {kind!r}')
            originals = getattr(m, kind)
            if int(index) != len(originals):
                raise ValidationError(f'out-of-order sidecar entry {item!r}')
            originals.append(base64.b64decode(payload).decode('utf-8'))
        return m


def encode_placeholders(text: str) -> tuple[str, PlaceholderMap]:
    """Replace emojis and Reddit names with placeholder tokens.

    Returns the encoded text and the map of originals;
    ``decode_placeholders(encoded, map)`` restores the input exactly.
    Text that already consists of placeholder tokens is left unchanged.
    """
    master, _ = _patterns()
    pmap = PlaceholderMap()

    def repl(m):
        kind = m.lastgroup
        pmap.originals(kind).append(m.group())
        return _TOKEN_OF[kind]

    return master.sub(repl, text), pmap


def decode_placeholders(target: str, source_map: PlaceholderMap, counter=None) -> str:
    """Replace placeholder tokens in MT output with source-side originals.

    The i-th token of each kind gets the i-th original.  Surplus tokens
    are deleted (placeholders must never leak to users) and unused
    originals ignored; both are counted in ``counter`` when given.
    """
    _, token_re = _patterns()
    target = target.replace(_GAP, '')
    used = {kind: 0 for kind in KINDS}

    def repl(m):
        kind = {v: k for k, v in _TOKEN_OF.items()}[m.group()]
        originals = source_map.originals(kind)
        i = used[kind]
        used[kind] += 1
        if i < len(originals):
            return originals[i]
        if counter is not None:
            counter['placeholder_extra'] = counter.get('placeholder_extra', 0) + 1
        return _GAP

    out = token_re.sub(repl, target)
    out = re.sub(f' {_GAP}', '', out)
    out = re.sub(f'{_GAP} ?', '', out)
    unused = sum(max(0, len(source_map.originals(k)) - used[k]) for k in KINDS)
    if unused and counter is not None:
        counter['placeholder_unused'] = counter.get('placeholder_unused', 0) + unused
    return out


def placeholder_parity(source_map: PlaceholderMap, target_map: PlaceholderMap) -> bool:
    """True when both sides carry the same number of placeholders per kind.

    Training pairs that fail this are dropped so the model always sees
    balanced placeholder counts.
    """
    return source_map.counts() == target_map.counts()


def write_sidecar(path, maps) -> None:
    """Write one sidecar line per sentence (empty line for an empty map)."""
    with open(path, 'w', encoding='utf-8') as f:
        for m in maps:
            f.write(m.to_sidecar_line() + '\n')


def read_sidecar(path):
    with open(path, encoding='utf-8') as f:
        for line in f:
            yield PlaceholderMap.from_sidecar_line(line)
