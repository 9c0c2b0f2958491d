"""Line-level composition of the preprocessing stages.

The stage order is fixed and not configurable, because reordering would
silently break the round trip: character normalization, then placeholder
encoding, then mixed-case splitting / case folding / BPE with inline case
markers, then source-side tags.  Postprocessing runs the exact inverse
(markers, detokenization, placeholder restoration) followed by the
target-language punctuation fixes.

Corpus-level helpers stream in bounded chunks and can fan work out to a
small process pool; results are merged in input order, so the output is
identical for any worker count.
"""

import itertools
import multiprocessing

from . import corpusbuild
from .placeholder import (PLACEHOLDER_TOKENS, PlaceholderMap,
                          decode_placeholders, encode_placeholders,
                          placeholder_parity)
from .subword import SubwordModel, segment, unsegment
from .textnorm import fix_quotes_fr, normalize_chars, normalize_punct

CHUNK_LINES = 2000


class Preprocessor:
    """normalize -> placeholders -> case-split/encode -> BPE -> tags."""

    def __init__(self, model: SubwordModel, norm_table=None, placeholders=True,
                 corpus_tag=None, type_tag=None, strict=True):
        self.model = model
        self.norm_table = norm_table
        self.placeholders = placeholders
        self.corpus_tag = corpus_tag
        self.type_tag = corpusbuild._TYPE_OF[type_tag] if type_tag else None
        self.strict = strict
        self.protected = PLACEHOLDER_TOKENS if placeholders else ()

    def encode_line(self, line: str, tagged: bool = False):
        """Return (token list, placeholder map) for one line."""
        if self.norm_table is not None:
            line = normalize_chars(line, self.norm_table)
        if self.placeholders:
            line, pmap = encode_placeholders(line)
        else:
            pmap = PlaceholderMap()
        tokens = segment(line, self.model, protected=self.protected,
                         strict=self.strict)
        if tagged and self.type_tag:
            prefix = [self.type_tag]
            if self.corpus_tag:
                prefix.insert(0, f'<{self.corpus_tag}>')
            tokens = prefix + tokens
        return tokens, pmap


class Postprocessor:
    """de-BPE -> case decode -> placeholder decode -> punctuation fixes."""

    def __init__(self, fix_quotes: bool = False, norm_punct: bool = False,
                 meta_symbol: str = None):
        self.fix_quotes = fix_quotes
        self.norm_punct = norm_punct
        self.meta_symbol = meta_symbol

    def decode_line(self, tokens, pmap: PlaceholderMap, counter=None) -> str:
        if isinstance(tokens, str):
            tokens = tokens.split()
        kwargs = {'meta_symbol': self.meta_symbol} if self.meta_symbol else {}
        text = unsegment(tokens, lenient=True, counter=counter, **kwargs)
        text = decode_placeholders(text, pmap, counter=counter)
        if self.fix_quotes:
            text = fix_quotes_fr(text)
        if self.norm_punct:
            text = normalize_punct(text)
        return text


# --- chunked, order-preserving parallel map --------------------------------

_WORKER_STATE = {}


def _init_worker(factory, args):
    _WORKER_STATE['fn'] = factory(*args)


def _run_chunk(chunk):
    fn = _WORKER_STATE['fn']
    return [fn(item) for item in chunk]


def chunked(iterable, size=CHUNK_LINES):
    it = iter(iterable)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def parallel_map(factory, args, items, workers: int = 1, chunk_size=CHUNK_LINES):
    """Apply ``factory(*args)`` to every item, chunked, in input order.

    ``factory`` builds the per-process closure once (models and tables are
    loaded in the worker, not pickled per item).  With ``workers <= 1``
    everything runs inline.
    """
    if workers <= 1:
        _init_worker(factory, args)
        try:
            for chunk in chunked(items, chunk_size):
                yield from _run_chunk(chunk)
        finally:
            _WORKER_STATE.clear()
        return
    with multiprocessing.Pool(workers, initializer=_init_worker,
                              initargs=(factory, args)) as pool:
        for result in pool.imap(_run_chunk, chunked(items, chunk_size)):
            yield from result


def _preprocess_factory(model_path, norm, placeholders, corpus_tag, type_tag, strict):
    model = SubwordModel.load(model_path)
    table = None
    if norm == 'builtin':
        from .textnorm import builtin_table
        table = builtin_table('nfkc-approx')
    elif norm:
        from .textnorm import NormTable
        table = NormTable.from_file(norm)
    pre = Preprocessor(model, norm_table=table, placeholders=placeholders,
                       corpus_tag=corpus_tag, type_tag=type_tag, strict=strict)

    def encode_pair(item):
        src, tgt = item
        src_tokens, src_map = pre.encode_line(src, tagged=True)
        if tgt is None:
            return src_tokens, src_map, None, None
        tgt_tokens, tgt_map = pre.encode_line(tgt, tagged=False)
        return src_tokens, src_map, tgt_tokens, tgt_map

    return encode_pair


def preprocess_stream(src_lines, tgt_lines=None, *, model_path, norm=None,
                      placeholders=True, corpus_tag=None, type_tag=None,
                      strict=True, workers=1, parity=True, stats=None):
    """Yield encoded (src_tokens, src_map, tgt_tokens, tgt_map) tuples.

    In parallel mode (``tgt_lines`` given) pairs with mismatched
    placeholder counts are dropped, keeping the training corpus balanced;
    drops are counted in ``stats``.
    """
    if tgt_lines is None:
        items = ((line, None) for line in src_lines)
    else:
        items = zip(src_lines, tgt_lines)
    args = (model_path, norm, placeholders, corpus_tag, type_tag, strict)
    for out in parallel_map(_preprocess_factory, args, items, workers):
        src_tokens, src_map, tgt_tokens, tgt_map = out
        if tgt_tokens is not None and parity and placeholders:
            if not placeholder_parity(src_map, tgt_map):
                if stats is not None:
                    stats['parity_dropped'] = stats.get('parity_dropped', 0) + 1
                continue
        if stats is not None:
            stats['lines'] = stats.get('lines', 0) + 1
        yield out


def _filter_factory(cfg):
    from .filtering import decide

    def run(item):
        pair, matrix = item
        return pair, decide(pair, cfg, matrix)

    return run


def filter_stream(pairs, cfg, attention=None, report=None, workers=1):
    """Order-preserving, optionally parallel corpus filtering."""
    from .errors import AlignmentError
    from .filtering import FilterReport

    if report is None:
        report = FilterReport()

    if attention is None:
        items = ((pair, None) for pair in pairs)
    else:
        def zipped():
            att = iter(attention)
            for pair in pairs:
                try:
                    matrix = next(att)
                except StopIteration:
                    raise AlignmentError(
                        f'attention stream ended before pair {pair.line_no}') from None
                yield pair, matrix
            if next(att, None) is not None:
                raise AlignmentError('attention stream longer than corpus')
        items = zipped()

    for pair, (dropped_by, lid_failure) in parallel_map(
            _filter_factory, (cfg,), items, workers):
        report.record(pair, dropped_by, lid_failure)
        if dropped_by is None:
            yield pair
