"""Parallel-corpus cleaning: copy, language-ID, length-ratio and
attention-based hallucination filtering.

Rules run in a fixed order (copy, LID, length, attention, plus optional
origin exclusion up front) and the first failing rule claims the drop, so
the report decomposes exactly.  Attention matrices come from a forced
decoding pass of an external NMT model; this module only consumes them
(and can generate synthetic ones for testing).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AlignmentError, MalformedMatrix
from .subword import coarse_tokenize

MASS_THRESHOLDS = (0.2, 0.3, 0.4, 0.5)
_ROW_SUM_TOL = 1e-6

_RULES = ('origin', 'copy', 'lid', 'length', 'attention')


@dataclass(frozen=True)
class SentencePair:
    """One source/target line pair with provenance metadata."""

    source: str
    target: str
    origin: str = 'default'
    line_no: int = 0


class AttentionMatrix:
    """A row-stochastic target-by-source attention matrix (EOS included).

    By convention the EOS column is the last one.
    """

    def __init__(self, values):
        m = np.asarray(values, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise MalformedMatrix(f'expected a 2-d matrix, got shape {m.shape}')
        if np.any(m < 0):
            raise MalformedMatrix('negative attention value')
        sums = m.sum(axis=1)
        bad = np.where(np.abs(sums - 1.0) > _ROW_SUM_TOL)[0]
        if bad.size:
            raise MalformedMatrix(
                f'row {bad[0]} sums to {sums[bad[0]]:.8f}, not 1')
        self.values = m

    @property
    def target_len(self):
        return self.values.shape[0]

    @property
    def source_len(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class AttentionStats:
    """Mean per-row entropy (nats) and, per mass threshold, the fraction of
    non-EOS source columns whose total attention mass falls below it."""

    mean_row_entropy: float
    frac_below: dict


@dataclass(frozen=True)
class AttentionThresholds:
    """Toolkit defaults for hallucination detection, not published values:
    drop when entropy is strictly below ``min_entropy`` or when the
    fraction of starved columns strictly exceeds ``max_frac_below`` at the
    corresponding mass threshold."""

    min_entropy: float = 0.05
    max_frac_below: dict = field(default_factory=lambda: {0.5: 0.9})


def attention_stats(matrix: AttentionMatrix) -> AttentionStats:
    """Entropy and starved-column statistics of one attention matrix.

    Row entropy uses the 0*log(0) = 0 convention; the fraction of columns
    with mass below each threshold excludes the source EOS column.
    """
    m = matrix.values
    with np.errstate(divide='ignore', invalid='ignore'):
        logs = np.where(m > 0, np.log(m), 0.0)
    entropy = float(-(m * logs).sum(axis=1).mean())
    if entropy == 0:
        entropy = 0.0
    col_mass = m.sum(axis=0)[:-1]  # EOS column excluded
    frac = {}
    for theta in MASS_THRESHOLDS:
        frac[theta] = float((col_mass < theta).mean()) if col_mass.size else 0.0
    return AttentionStats(mean_row_entropy=entropy, frac_below=frac)


def attention_filter(stats: AttentionStats, thresholds: AttentionThresholds) -> bool:
    """True to keep.  Values exactly at a threshold are kept."""
    if stats.mean_row_entropy < thresholds.min_entropy:
        return False
    for theta, max_frac in thresholds.max_frac_below.items():
        if stats.frac_below.get(theta, 0.0) > max_frac:
            return False
    return True


def _copy_key(line: str) -> str:
    return ''.join(c for c in line.lower() if c.isalnum())


def copy_filter(pair: SentencePair) -> bool:
    """True to keep: drop pairs whose sides are equal after lowercasing and
    stripping punctuation and whitespace (near-copies included)."""
    return _copy_key(pair.source) != _copy_key(pair.target)


def lid_filter(pair: SentencePair, classifier, expected: tuple) -> bool:
    """True to keep: both sides must classify as the expected languages.

    A classifier failure (None or an exception) counts as a drop.
    """
    src_lang, tgt_lang = expected
    try:
        got_src = classifier(pair.source)
        got_tgt = classifier(pair.target)
    except Exception:
        return False
    return got_src == src_lang and got_tgt == tgt_lang


def length_ratio_filter(pair: SentencePair, max_ratio: float) -> bool:
    """True to keep: drop when the word-unit count ratio strictly exceeds
    ``max_ratio``, or when either side is empty."""
    ls = len(coarse_tokenize(pair.source))
    lt = len(coarse_tokenize(pair.target))
    if ls == 0 or lt == 0:
        return False
    return max(ls, lt) / min(ls, lt) <= max_ratio


@dataclass
class FilterReport:
    """Per-rule drop counts with a per-origin breakdown.

    ``input == kept + sum of dropped counts`` holds on every run; merging
    reports is associative and commutative, so chunked runs compose.
    """

    input: int = 0
    dropped_origin: int = 0
    dropped_copy: int = 0
    dropped_lid: int = 0
    dropped_length: int = 0
    dropped_attention: int = 0
    kept: int = 0
    lid_failures: int = 0
    per_origin: dict = field(default_factory=dict)

    def _bump(self, origin: str, key: str):
        bucket = self.per_origin.setdefault(origin, {})
        bucket[key] = bucket.get(key, 0) + 1

    def record(self, pair: SentencePair, dropped_by, lid_failure=False):
        self.input += 1
        self._bump(pair.origin, 'input')
        if dropped_by is None:
            self.kept += 1
            self._bump(pair.origin, 'kept')
        else:
            key = f'dropped_{dropped_by}'
            setattr(self, key, getattr(self, key) + 1)
            self._bump(pair.origin, key)
            if lid_failure:
                self.lid_failures += 1

    def merge(self, other: 'FilterReport') -> 'FilterReport':
        out = replace(self)
        out.per_origin = {k: dict(v) for k, v in self.per_origin.items()}
        for key in ('input', 'kept', 'lid_failures',
                    *(f'dropped_{r}' for r in _RULES)):
            setattr(out, key, getattr(out, key) + getattr(other, key))
        for origin, bucket in other.per_origin.items():
            mine = out.per_origin.setdefault(origin, {})
            for k, v in bucket.items():
                mine[k] = mine.get(k, 0) + v
        return out

    def dropped_total(self) -> int:
        return sum(getattr(self, f'dropped_{r}') for r in _RULES)

    def is_conserved(self) -> bool:
        return self.input == self.kept + self.dropped_total()

    def to_keyvalues(self) -> dict:
        out = {'entropy_definition': 'mean-per-row-nats', 'input': self.input}
        for r in _RULES:
            out[f'dropped_{r}'] = getattr(self, f'dropped_{r}')
        out['lid_failures'] = self.lid_failures
        out['kept'] = self.kept
        for origin in sorted(self.per_origin):
            for k, v in sorted(self.per_origin[origin].items()):
                out[f'origin.{origin}.{k}'] = v
        return out

    def format_table(self) -> str:
        rows = [('input', self.input)]
        rows += [(f'dropped_{r}', getattr(self, f'dropped_{r}')) for r in _RULES]
        rows.append(('kept', self.kept))
        width = max(len(k) for k, _ in rows)
        lines = [f'{k:<{width}}  {v:>10}' for k, v in rows]
        return '\n'.join(lines)


@dataclass
class FilterConfig:
    """Knobs for :func:`filter_corpus`.

    ``classifier`` is any line -> language-code callable (None disables
    LID).  ``max_ratio`` can be overridden per origin; the pair of
    expected languages applies to (source, target).
    """

    expected_langs: tuple = None
    classifier: object = None
    max_ratio: float = 1.8
    per_origin_max_ratio: dict = field(default_factory=dict)
    attention_thresholds: AttentionThresholds = field(default_factory=AttentionThresholds)
    exclude_origins: frozenset = frozenset()
    check_copies: bool = True

    def ratio_for(self, origin: str) -> float:
        return self.per_origin_max_ratio.get(origin, self.max_ratio)


def decide(pair: SentencePair, cfg: FilterConfig, matrix=None):
    """Apply the rules in order; return (dropped_by | None, lid_failure)."""
    if pair.origin in cfg.exclude_origins:
        return 'origin', False
    if cfg.check_copies and not copy_filter(pair):
        return 'copy', False
    if cfg.classifier is not None and cfg.expected_langs is not None:
        src_lang, tgt_lang = cfg.expected_langs
        try:
            got_src = cfg.classifier(pair.source)
            got_tgt = cfg.classifier(pair.target)
        except Exception:
            return 'lid', True
        if got_src is None or got_tgt is None:
            return 'lid', True
        if got_src != src_lang or got_tgt != tgt_lang:
            return 'lid', False
    if cfg.max_ratio is not None:
        if not length_ratio_filter(pair, cfg.ratio_for(pair.origin)):
            return 'length', False
    if matrix is not None:
        if not attention_filter(attention_stats(matrix), cfg.attention_thresholds):
            return 'attention', False
    return None, False


def filter_corpus(pairs, cfg: FilterConfig, attention=None, report: FilterReport = None):
    """Yield the pairs that survive all rules, recording drops in ``report``.

    ``attention``, when given, must yield one matrix (or None) per pair;
    a length mismatch raises :class:`AlignmentError`.  Decisions are
    per-pair and order-independent; output order follows input order.
    """
    if report is None:
        report = FilterReport()
    att_iter = iter(attention) if attention is not None else None
    for pair in pairs:
        matrix = None
        if att_iter is not None:
            try:
                matrix = next(att_iter)
            except StopIteration:
                raise AlignmentError(
                    f'attention stream ended before pair {pair.line_no}') from None
        dropped_by, lid_failure = decide(pair, cfg, matrix)
        report.record(pair, dropped_by, lid_failure)
        if dropped_by is None:
            yield pair
    if att_iter is not None:
        try:
            next(att_iter)
        except StopIteration:
            pass
        else:
            raise AlignmentError('attention stream longer than corpus')


def filter_pairs(pairs, cfg: FilterConfig, attention=None):
    """Eager convenience wrapper: returns (kept list, report)."""
    report = FilterReport()
    kept = list(filter_corpus(pairs, cfg, attention, report))
    return kept, report


# --- attention matrix file I/O and synthetic generation -------------------

def write_matrices(path, matrices) -> None:
    """Write matrices as blank-line-separated blocks: a ``T S`` header line
    then T rows of S space-separated floats."""
    with open(path, 'w', encoding='utf-8') as f:
        for m in matrices:
            v = m.values if isinstance(m, AttentionMatrix) else np.asarray(m)
            f.write(f'{v.shape[0]} {v.shape[1]}\n')
            for row in v:
                f.write(' '.join(repr(float(x)) for x in row) + '\n')
            f.write('\n')


def read_matrices(path):
    """Yield :class:`AttentionMatrix` objects from a matrix file."""
    with open(path, encoding='utf-8') as f:
        while True:
            header = f.readline()
            if not header:
                return
            header = header.strip()
            if not header:
                continue
            try:
                t, s = map(int, header.split())
            except ValueError:
                raise MalformedMatrix(f'bad matrix header {header!r}') from None
            rows = []
            for _ in range(t):
                line = f.readline()
                if not line:
                    raise MalformedMatrix('unexpected end of matrix file')
                rows.append([float(x) for x in line.split()])
                if len(rows[-1]) != s:
                    raise MalformedMatrix(
                        f'expected {s} columns, got {len(rows[-1])}')
            yield AttentionMatrix(rows)


def uniform_matrix(t: int, s: int) -> AttentionMatrix:
    return AttentionMatrix(np.full((t, s), 1.0 / s))


def eos_matrix(t: int, s: int) -> AttentionMatrix:
    """Every target row attends only to the source EOS column: the
    signature pattern of a hallucinating model."""
    m = np.zeros((t, s))
    m[:, -1] = 1.0
    return AttentionMatrix(m)


def random_matrix(t: int, s: int, rng) -> AttentionMatrix:
    """A random row-stochastic matrix (rows drawn from a flat Dirichlet)."""
    raw = -np.log(rng.random((t, s)))
    return AttentionMatrix(raw / raw.sum(axis=1, keepdims=True))
