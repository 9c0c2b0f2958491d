"""Source-side tagging and per-epoch training-set assembly.

Every training source line is prefixed with a type tag (``<real>``,
``<BT>``, ``<noise>``, ``<rev>``) and optionally a corpus tag
(``<MTNT>``, ``<europarl>``, ...), corpus tag first.  Epochs are built
from a declarative plan: parallel pools are emitted tagged, monolingual
pools are back-translated through an external hook, either in full with a
fresh per-epoch sampling seed or as a rotating 1/k slice.
"""

import configparser
import logging
import re
import subprocess
from dataclasses import dataclass, field

from .errors import AlreadyTagged, EmptyPool, HookFailure, ValidationError
from .filtering import SentencePair
from .util import derive_seed

logger = logging.getLogger('corpusbuild')

REAL_TAG = '<real>'
BT_TAG = '<BT>'
NOISE_TAG = '<noise>'
REV_TAG = '<rev>'
TYPE_TAGS = (REAL_TAG, BT_TAG, NOISE_TAG, REV_TAG)

_TYPE_OF = {'real': REAL_TAG, 'BT': BT_TAG, 'noise': NOISE_TAG, 'rev': REV_TAG}
_TAG_SHAPE = re.compile(r'<[A-Za-z][A-Za-z0-9_-]*>')
_DEFAULT_TEMPERATURE = 1 / 0.9


def tag_line(line: str, corpus_tag, type_tag: str) -> str:
    """Prefix a source line with its tags, corpus tag before type tag.

    ``corpus_tag`` is a bare name (``MTNT``) or None; ``type_tag`` is one
    of the four type tokens.  Raises :class:`AlreadyTagged` when the line
    already starts with a known tag token.
    """
    if type_tag not in TYPE_TAGS:
        raise ValidationError(f'unknown type tag {type_tag!r}')
    known = set(TYPE_TAGS)
    if corpus_tag:
        known.add(f'<{corpus_tag}>')
    head = line.split(' ', 1)[0]
    if head in known:
        raise AlreadyTagged(f'line already starts with {head}')
    prefix = f'<{corpus_tag}> {type_tag} ' if corpus_tag else f'{type_tag} '
    return prefix + line


def test_time_prefix(in_domain: bool, corpus_tag: str = 'MTNT') -> str:
    """The prefix to prepend to input at translation time: the corpus tag
    only for in-domain text, and always the real-data type tag."""
    return f'<{corpus_tag}> {REAL_TAG} ' if in_domain else f'{REAL_TAG} '


def validate_tagged_corpus(lines, corpus_tags=()) -> int:
    """Check the tag grammar ``(<corpus>)? <type> text`` on every line;
    returns the line count, raising on the first violation."""
    allowed_corpus = {f'<{t}>' for t in corpus_tags}
    n = 0
    for n, line in enumerate(lines, 1):
        tokens = line.split(' ')
        i = 0
        if tokens and (tokens[0] in allowed_corpus or
                       (not corpus_tags and _TAG_SHAPE.fullmatch(tokens[0])
                        and tokens[0] not in TYPE_TAGS)):
            i = 1
        if i >= len(tokens) or tokens[i] not in TYPE_TAGS:
            raise ValidationError(f'line {n}: missing type tag: {line[:60]!r}')
    return n


def reverse_pair(pair: SentencePair) -> SentencePair:
    """Swap source and target (for reverse-direction in-domain data)."""
    return SentencePair(source=pair.target, target=pair.source,
                        origin=pair.origin, line_no=pair.line_no)


def rotation_slice(pool_size: int, k: int, epoch: int) -> tuple:
    """Half-open index range of the 1/k slice used at a 1-based epoch.

    The slices of epochs 1..k partition the pool exactly; epoch k+1 wraps
    around to the first slice.
    """
    if k < 1 or epoch < 1:
        raise ValidationError(f'k and epoch must be >= 1, got k={k}, epoch={epoch}')
    if pool_size == 0:
        raise EmptyPool('cannot slice an empty pool')
    j = (epoch - 1) % k
    return (j * pool_size // k, (j + 1) * pool_size // k)


# --- pools -----------------------------------------------------------------

class MemoryPool:
    """An in-memory pool of parallel pairs or monolingual lines."""

    def __init__(self, pairs=None, mono=None):
        if (pairs is None) == (mono is None):
            raise ValidationError('pool needs either pairs or mono lines')
        self._pairs = list(pairs) if pairs is not None else None
        self._mono = list(mono) if mono is not None else None

    def size(self) -> int:
        return len(self._mono if self._mono is not None else self._pairs)

    def mono_lines(self, start=0, stop=None):
        if self._mono is None:
            raise ValidationError('pool holds pairs, not monolingual lines')
        return iter(self._mono[start:stop])

    def pairs(self):
        if self._pairs is None:
            raise ValidationError('pool holds monolingual lines, not pairs')
        return iter(self._pairs)


class FilePool:
    """A line-oriented pool backed by files, read lazily."""

    def __init__(self, mono=None, src=None, tgt=None, origin='default'):
        if (mono is None) == (src is None):
            raise ValidationError('pool needs either a mono path or src/tgt paths')
        if src is not None and tgt is None:
            raise ValidationError('parallel pool needs both src and tgt')
        self.mono_path, self.src_path, self.tgt_path = mono, src, tgt
        self.origin = origin
        self._size = None

    def size(self) -> int:
        if self._size is None:
            path = self.mono_path or self.src_path
            with open(path, encoding='utf-8') as f:
                self._size = sum(1 for _ in f)
        return self._size

    def mono_lines(self, start=0, stop=None):
        if self.mono_path is None:
            raise ValidationError('pool holds pairs, not monolingual lines')
        with open(self.mono_path, encoding='utf-8') as f:
            for i, line in enumerate(f):
                if stop is not None and i >= stop:
                    break
                if i >= start:
                    yield line.rstrip('\n')

    def pairs(self):
        if self.src_path is None:
            raise ValidationError('pool holds monolingual lines, not pairs')
        with open(self.src_path, encoding='utf-8') as fs, \
                open(self.tgt_path, encoding='utf-8') as ft:
            for i, (s, t) in enumerate(zip(fs, ft)):
                yield SentencePair(s.rstrip('\n'), t.rstrip('\n'),
                                   origin=self.origin, line_no=i)


# --- epoch plans -----------------------------------------------------------

@dataclass(frozen=True)
class PlanComponent:
    """One entry of an epoch plan.

    ``kind`` is ``parallel`` or ``bt``; ``mode`` applies to bt components:
    ``full`` resamples the whole pool every epoch, ``rotate`` sends the
    epoch's 1/k slice.  ``type_tag`` is real/BT/noise/rev, or
    ``pretagged`` for pools whose source lines already carry their tags.
    """

    name: str
    pool: str
    kind: str = 'parallel'
    mode: str = 'full'
    k: int = 1
    corpus_tag: str = None
    type_tag: str = 'real'


@dataclass
class EpochPlan:
    components: list = field(default_factory=list)
    bt_temperature: float = _DEFAULT_TEMPERATURE

    def __post_init__(self):
        if self.bt_temperature <= 0:
            raise ValidationError('bt_temperature must be positive')
        for comp in self.components:
            if comp.kind not in ('parallel', 'bt'):
                raise ValidationError(f'{comp.name}: unknown kind {comp.kind!r}')
            if comp.mode not in ('full', 'rotate'):
                raise ValidationError(f'{comp.name}: unknown mode {comp.mode!r}')
            if comp.mode == 'rotate' and comp.k < 1:
                raise ValidationError(f'{comp.name}: rotate fraction must be 1/k, k >= 1')
            if comp.type_tag not in (*(_TYPE_OF), 'pretagged'):
                raise ValidationError(f'{comp.name}: unknown type {comp.type_tag!r}')
            if comp.kind == 'bt' and comp.type_tag != 'BT':
                raise ValidationError(f'{comp.name}: bt components must use the BT type')

    @classmethod
    def load(cls, path):
        """Read a plan file: a ``[plan]`` section plus one
        ``[component <name>]`` section per entry."""
        parser = configparser.ConfigParser()
        parser.optionxform = str
        with open(path, encoding='utf-8') as f:
            parser.read_file(f)
        temperature = _DEFAULT_TEMPERATURE
        if parser.has_section('plan'):
            temperature = parser.getfloat('plan', 'bt_temperature',
                                          fallback=_DEFAULT_TEMPERATURE)
        components = []
        for section in parser.sections():
            if not section.startswith('component '):
                if section != 'plan':
                    raise ValidationError(f'{path}: unexpected section [{section}]')
                continue
            name = section.split(' ', 1)[1]
            opts = dict(parser.items(section))
            mode, k = 'full', 1
            raw_mode = opts.get('mode', 'full').strip()
            if raw_mode.startswith('rotate'):
                mode = 'rotate'
                frac = raw_mode.split(None, 1)[1]
                num, _, den = frac.partition('/')
                if num.strip() != '1' or not den.strip().isdigit():
                    raise ValidationError(
                        f'{path}: {name}: rotate fraction must be 1/k, got {frac!r}')
                k = int(den)
            elif raw_mode not in ('full', 'full_resample'):
                raise ValidationError(f'{path}: {name}: unknown mode {raw_mode!r}')
            components.append(PlanComponent(
                name=name,
                pool=opts['pool'],
                kind=opts.get('kind', 'parallel'),
                mode=mode,
                k=k,
                corpus_tag=opts.get('corpus_tag') or None,
                type_tag=opts.get('type', 'real'),
            ))
        if not components:
            raise ValidationError(f'{path}: plan has no components')
        return cls(components=components, bt_temperature=temperature)


def build_epoch(epoch: int, plan: EpochPlan, pools, bt_hook, seed: int,
                manifest: dict = None):
    """Yield one epoch's tagged training pairs, component by component.

    ``pools`` maps pool ids to pool objects; ``bt_hook`` is a callable
    ``(lines, temperature, seed) -> lines`` wrapping the external
    back-translator.  The manifest records per-component line counts and
    the exact slice indices.
    """
    if epoch < 1:
        raise ValidationError('epoch index is 1-based')
    for comp in plan.components:
        if comp.pool not in pools:
            raise ValidationError(f'{comp.name}: unknown pool {comp.pool!r}')
        pool = pools[comp.pool]
        count = 0
        start, stop = 0, pool.size()
        if comp.kind == 'bt':
            if comp.mode == 'rotate':
                start, stop = rotation_slice(pool.size(), comp.k, epoch)
            targets = list(pool.mono_lines(start, stop))
            hook_seed = derive_seed(seed, comp.name, epoch)
            try:
                sources = bt_hook(targets, plan.bt_temperature, hook_seed)
            except HookFailure:
                raise
            except Exception as exc:
                raise HookFailure(f'{comp.name}: back-translation hook failed: {exc}')
            if len(sources) != len(targets):
                raise HookFailure(
                    f'{comp.name}: hook returned {len(sources)} lines '
                    f'for {len(targets)} inputs')
            for i, (src, tgt) in enumerate(zip(sources, targets)):
                yield SentencePair(tag_line(src, comp.corpus_tag, BT_TAG),
                                   tgt, origin=comp.pool, line_no=start + i)
                count += 1
        else:
            for pair in pool.pairs():
                if comp.type_tag == 'pretagged':
                    source = pair.source
                else:
                    source = tag_line(pair.source, comp.corpus_tag,
                                      _TYPE_OF[comp.type_tag])
                yield SentencePair(source, pair.target,
                                   origin=pair.origin, line_no=pair.line_no)
                count += 1
        if manifest is not None:
            manifest[comp.name] = {
                'pool': comp.pool, 'kind': comp.kind, 'mode': comp.mode,
                'slice_start': start, 'slice_stop': stop, 'lines': count,
            }
        logger.debug('component %s: %d lines (slice [%d, %d))',
                     comp.name, count, start, stop)


def executable_hook(argv):
    """Wrap an external executable into the bt-hook callable contract.

    The executable gets the temperature and seed as its last two
    arguments, the batch on standard input (one line per sentence) and
    must write exactly one output line per input line; a nonzero exit is a
    failure.
    """
    def hook(lines, temperature, seed):
        cmd = [*argv, repr(float(temperature)), str(seed)]
        proc = subprocess.run(cmd, input='\n'.join(lines) + ('\n' if lines else ''),
                              capture_output=True, text=True)
        if proc.returncode != 0:
            raise HookFailure(
                f'hook {argv[0]} exited with {proc.returncode}: '
                f'{proc.stderr.strip()[:200]}')
        out = proc.stdout.splitlines()
        if len(out) != len(lines):
            raise HookFailure(
                f'hook {argv[0]} returned {len(out)} lines for {len(lines)} inputs')
        return out
    return hook


def identity_hook(lines, temperature, seed):
    """A stub back-translator for tests and dry runs."""
    return list(lines)


def write_manifest(path, manifest: dict) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        total = 0
        for name, info in manifest.items():
            for key, value in info.items():
                f.write(f'component.{name}.{key}={value}\n')
            total += info['lines']
        f.write(f'total_lines={total}\n')
