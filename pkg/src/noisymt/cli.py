"""Command-line front end.

Subcommands compose the library modules into the standard pipelines:

  preprocess    normalize + placeholders + subword/case encode + tags
  postprocess   invert preprocessing on MT output, fix punctuation
  filter        clean parallel corpora, emit a drop report
  bpe-train     learn a subword model
  noise         mine noisy variants / build a noise-augmented corpus
  build-epochs  assemble one training epoch from an epoch plan
  score         corpus BLEU with the task's metric settings

Every command takes ``--config`` (one INI file drives everything),
``--seed`` (overrides the config seed) and ``--report`` (where to write
machine-readable ``key=value`` lines).  Exit codes: 0 success, 1
validation error, 2 data error, 3 hook failure.
"""

import argparse
import logging
import sys

from . import bleu as bleu_mod
from . import corpusbuild, noise as noise_mod
from .config import load_config
from .errors import NoisyMTError, ValidationError
from .filtering import FilterReport, SentencePair, read_matrices
from .pipeline import Postprocessor, filter_stream, preprocess_stream
from .placeholder import read_sidecar, write_sidecar
from .subword import train_bpe
from .util import format_report, write_report

logger = logging.getLogger('noisymt')


def _emit_report(args, values):
    text = format_report(values)
    if getattr(args, 'report', None):
        with open(args.report, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _config(args, required=True):
    if args.config is None:
        if required:
            raise ValidationError('this command needs --config')
        return None
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _read_pairs(src_path, tgt_path, origin='default'):
    with open(src_path, encoding='utf-8') as fs, open(tgt_path, encoding='utf-8') as ft:
        for i, (s, t) in enumerate(zip(fs, ft)):
            yield SentencePair(s.rstrip('\n'), t.rstrip('\n'), origin=origin, line_no=i)


def _count_lines(path):
    with open(path, encoding='utf-8') as f:
        return sum(1 for _ in f)


def _check_parallel(src, tgt, where):
    ns, nt = _count_lines(src), _count_lines(tgt)
    if ns != nt:
        raise ValidationError(f'{where}: {src} has {ns} lines but {tgt} has {nt}')


def cmd_preprocess(args):
    cfg = _config(args)
    model_path = cfg.subword_model_path(must_exist=True)
    norm = cfg.norm_spec()
    corpus_tag, type_tag = cfg.tags()
    if args.no_tags:
        corpus_tag = type_tag = None
    stats = {}
    workers = args.workers or cfg.workers()

    def lines(path):
        with open(path, encoding='utf-8') as f:
            for line in f:
                yield line.rstrip('\n')

    if args.tgt:
        _check_parallel(args.src, args.tgt, 'preprocess')
    out_src = open(args.out + '.src', 'w', encoding='utf-8')
    out_tgt = open(args.out + '.tgt', 'w', encoding='utf-8') if args.tgt else None
    maps = []
    try:
        stream = preprocess_stream(
            lines(args.src), lines(args.tgt) if args.tgt else None,
            model_path=model_path, norm=norm,
            placeholders=cfg.placeholders_enabled(),
            corpus_tag=corpus_tag, type_tag=type_tag,
            workers=workers, stats=stats)
        for src_tokens, src_map, tgt_tokens, _tgt_map in stream:
            out_src.write(' '.join(src_tokens) + '\n')
            maps.append(src_map)
            if out_tgt is not None:
                out_tgt.write(' '.join(tgt_tokens) + '\n')
    finally:
        out_src.close()
        if out_tgt is not None:
            out_tgt.close()
    write_sidecar(args.out + '.phmap', maps)
    manifest = {'lines_out': stats.get('lines', 0),
                'parity_dropped': stats.get('parity_dropped', 0),
                'sidecar': args.out + '.phmap'}
    write_report(args.out + '.manifest', manifest)
    _emit_report(args, manifest)
    return 0


def cmd_postprocess(args):
    cfg = _config(args)
    fix_quotes = args.fix_quotes or (cfg.target_lang == 'fr' and not args.no_fix_quotes)
    post = Postprocessor(fix_quotes=fix_quotes, norm_punct=args.normalize_punct)
    counter = {}
    maps = read_sidecar(args.sidecar) if args.sidecar else None
    out = open(args.out, 'w', encoding='utf-8') if args.out else sys.stdout
    n = 0
    try:
        with open(args.hyp, encoding='utf-8') as f:
            for line in f:
                tokens = line.rstrip('\n').split()
                if maps is not None:
                    try:
                        pmap = next(maps)
                    except StopIteration:
                        raise ValidationError(
                            f'sidecar {args.sidecar} has fewer lines than {args.hyp}')
                else:
                    from .placeholder import PlaceholderMap
                    pmap = PlaceholderMap()
                out.write(post.decode_line(tokens, pmap, counter=counter) + '\n')
                n += 1
    finally:
        if args.out:
            out.close()
    report = {'lines': n, **{f'anomaly.{k}': v for k, v in sorted(counter.items())}}
    _emit_report(args, report)
    return 0


def cmd_filter(args):
    cfg = _config(args)
    fcfg = cfg.filter_config()
    corpora = cfg.corpora()
    if not corpora:
        raise ValidationError('no [corpus <name>] sections in config')
    report = FilterReport()
    workers = args.workers or cfg.workers()
    with open(args.out + '.src', 'w', encoding='utf-8') as out_src, \
            open(args.out + '.tgt', 'w', encoding='utf-8') as out_tgt:
        for spec in corpora:
            _check_parallel(spec.src, spec.tgt, f'corpus {spec.name}')
            pairs = _read_pairs(spec.src, spec.tgt, origin=spec.origin)
            attention = read_matrices(spec.attention) if spec.attention else None
            for pair in filter_stream(pairs, fcfg, attention=attention,
                                      report=report, workers=workers):
                out_src.write(pair.source + '\n')
                out_tgt.write(pair.target + '\n')
    if not report.is_conserved():
        raise NoisyMTError('filter report does not conserve counts')
    sys.stderr.write(report.format_table() + '\n')
    _emit_report(args, report.to_keyvalues())
    return 0


def cmd_bpe_train(args):
    cfg = _config(args)
    inputs = args.inputs
    if not inputs:
        inputs = [spec.src for spec in cfg.corpora()] + \
                 [spec.tgt for spec in cfg.corpora()]
    if not inputs:
        raise ValidationError('no input files given and no [corpus] sections')

    def lines():
        for path in inputs:
            with open(path, encoding='utf-8') as f:
                for line in f:
                    yield line.rstrip('\n')

    from .placeholder import PLACEHOLDER_TOKENS
    protected = PLACEHOLDER_TOKENS if cfg.placeholders_enabled() else ()
    model = train_bpe(lines(), cfg.subword_vocab_size(),
                      vocab_threshold=cfg.subword_threshold(),
                      protected=protected)
    out = args.out or cfg.subword_model_path()
    model.save(out)
    _emit_report(args, {'model': out, 'merges': len(model.merges),
                        'vocab_entries': len(model.vocab)})
    return 0


def cmd_noise(args):
    cfg = _config(args)
    if args.mine:
        if not (args.mono and args.lexicon):
            raise ValidationError('noise --mine needs --mono and --lexicon')
        with open(args.lexicon, encoding='utf-8') as f:
            lexicon = {w.strip() for w in f if w.strip()}

        def mono_lines():
            with open(args.mono, encoding='utf-8') as f:
                for line in f:
                    yield line.rstrip('\n')

        variants = noise_mod.mine_variants(mono_lines(), lexicon,
                                           min_count=args.min_count)
        variants.save(args.out)
        _emit_report(args, {'variants': len(variants),
                            'canonicals': len(variants.entries)})
        return 0

    if not (args.src and args.tgt):
        raise ValidationError('noise needs --src and --tgt (or --mine)')
    _check_parallel(args.src, args.tgt, 'noise')
    rules = cfg.noise_rules()
    vpath = args.variants or cfg.variants_path()
    variants = noise_mod.VariantMap.load(vpath) if vpath else noise_mod.VariantMap()

    class Reader:
        def __iter__(self):
            return _read_pairs(args.src, args.tgt)

    n = 0
    with open(args.out + '.src', 'w', encoding='utf-8') as out_src, \
            open(args.out + '.tgt', 'w', encoding='utf-8') as out_tgt:
        for pair in noise_mod.augment_corpus(Reader(), rules, variants, cfg.seed):
            out_src.write(pair.source + '\n')
            out_tgt.write(pair.target + '\n')
            n += 1
    _emit_report(args, {'lines_out': n})
    return 0


def cmd_build_epochs(args):
    cfg = _config(args)
    plan = corpusbuild.EpochPlan.load(cfg.epoch_plan_path())
    pool_specs = cfg.pools()
    pools = {}
    for name, spec in pool_specs.items():
        if spec.mono:
            pools[name] = corpusbuild.FilePool(mono=spec.mono, origin=name)
        else:
            pools[name] = corpusbuild.FilePool(src=spec.src, tgt=spec.tgt, origin=name)
    hook = corpusbuild.executable_hook(cfg.bt_hook_argv())
    manifest = {}
    n = 0
    with open(args.out + '.src', 'w', encoding='utf-8') as out_src, \
            open(args.out + '.tgt', 'w', encoding='utf-8') as out_tgt:
        for pair in corpusbuild.build_epoch(args.epoch, plan, pools, hook,
                                            cfg.seed, manifest):
            out_src.write(pair.source + '\n')
            out_tgt.write(pair.target + '\n')
            n += 1
    corpusbuild.write_manifest(args.out + '.manifest', manifest)
    flat = {'epoch': args.epoch, 'total_lines': n}
    for name, info in manifest.items():
        for k, v in info.items():
            flat[f'component.{name}.{k}'] = v
    _emit_report(args, flat)
    return 0


def cmd_score(args):
    _config(args, required=False)
    with open(args.hyp, encoding='utf-8') as f:
        hyps = [line.rstrip('\n') for line in f]
    with open(args.ref, encoding='utf-8') as f:
        refs = [line.rstrip('\n') for line in f]
    if args.pretokenized:
        result = bleu_mod.pretokenized_bleu(hyps, refs)
    else:
        result = bleu_mod.corpus_bleu(hyps, refs)
    if args.signature:
        print(result.signature(tokenized=args.pretokenized))
    print(result)
    _emit_report(args, {
        'bleu': f'{result.score:.4f}',
        'brevity_penalty': f'{result.brevity_penalty:.6f}',
        'hyp_len': result.hyp_len, 'ref_len': result.ref_len,
        'signature': result.signature(tokenized=args.pretokenized),
    })
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='noisymt',
        description='Corpus preprocessing and robustness toolkit for MT of noisy text')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p):
        p.add_argument('--config', help='pipeline config file (INI)')
        p.add_argument('--seed', type=int, help='override the config seed')
        p.add_argument('--report', help='write key=value report here')

    p = sub.add_parser('preprocess', help='encode a corpus for training/translation')
    common(p)
    p.add_argument('src', help='source text, one sentence per line')
    p.add_argument('tgt', nargs='?', help='target text (parallel mode)')
    p.add_argument('--out', required=True, help='output prefix')
    p.add_argument('--no-tags', action='store_true', help='skip source-side tags')
    p.add_argument('--workers', type=int)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser('postprocess', help='turn MT output pieces back into text')
    common(p)
    p.add_argument('hyp', help='MT output in piece+marker form')
    p.add_argument('--sidecar', help='placeholder sidecar from preprocess')
    p.add_argument('--out', help='output file (default stdout)')
    p.add_argument('--fix-quotes', action='store_true',
                   help='force the French quote fix')
    p.add_argument('--no-fix-quotes', action='store_true',
                   help='disable the French quote fix even for fr targets')
    p.add_argument('--normalize-punct', action='store_true',
                   help='apply Moses-style punctuation normalization')
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser('filter', help='clean the configured parallel corpora')
    common(p)
    p.add_argument('--out', required=True, help='output prefix for kept pairs')
    p.add_argument('--workers', type=int)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser('bpe-train', help='learn a subword model')
    common(p)
    p.add_argument('inputs', nargs='*', help='training text files')
    p.add_argument('--out', help='model file (default: subword.model from config)')
    p.set_defaults(func=cmd_bpe_train)

    p = sub.add_parser('noise', help='mine variants or noise-augment a corpus')
    common(p)
    p.add_argument('--mine', action='store_true', help='mine variants instead')
    p.add_argument('--mono', help='monolingual text (with --mine)')
    p.add_argument('--lexicon', help='word-per-line lexicon (with --mine)')
    p.add_argument('--min-count', type=int, default=1,
                   help='minimum variant frequency to keep (with --mine)')
    p.add_argument('--src')
    p.add_argument('--tgt')
    p.add_argument('--variants', help='variants file from a mining run')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser('build-epochs', help="assemble one epoch's training set")
    common(p)
    p.add_argument('--epoch', type=int, required=True, help='1-based epoch index')
    p.add_argument('--out', required=True, help='output prefix')
    p.set_defaults(func=cmd_build_epochs)

    p = sub.add_parser('score', help='corpus BLEU (case-sensitive, 13a, exp smoothing)')
    common(p)
    p.add_argument('hyp', help='hypothesis file (detokenized)')
    p.add_argument('ref', help='reference file (untokenized)')
    p.add_argument('--pretokenized', action='store_true',
                   help='inputs are already tokenized (e.g. Japanese)')
    p.add_argument('--signature', action='store_true',
                   help='print the metric signature')
    p.set_defaults(func=cmd_score)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(name)s: %(message)s')
    try:
        return args.func(args)
    except NoisyMTError as exc:
        sys.stderr.write(f'noisymt: error: {exc}\n')
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f'noisymt: error: {exc}\n')
        return 2


if __name__ == '__main__':
    sys.exit(main())
