"""Declarative pipeline configuration.

One UTF-8 INI-style file drives every command: ``[section]`` headers and
``key = value`` lines, with paths resolved relative to the config file.
Each command validates only the sections it needs; errors carry the
offending ``section.key`` path.  The random seed must be explicit (no
wall-clock defaults), so reruns are bit-reproducible.
"""

import configparser
import os
from dataclasses import dataclass, field

from .errors import ValidationError
from .filtering import AttentionThresholds, FilterConfig
from .lid import builtin_classifier
from .noise import NoiseRuleSet, load_confusion_pairs
from .util import data_path

LANGUAGE_PAIRS = ('fr-en', 'en-fr', 'ja-en', 'en-ja')


@dataclass
class CorpusSpec:
    name: str
    src: str
    tgt: str
    origin: str
    attention: str = None


@dataclass
class PoolSpec:
    name: str
    mono: str = None
    src: str = None
    tgt: str = None


class PipelineConfig:
    """Typed access to a parsed config file."""

    def __init__(self, parser: configparser.ConfigParser, base_dir: str, path: str):
        self._p = parser
        self._base = base_dir
        self.path = path
        self.language_pair = self._get('main', 'language_pair', required=True)
        if self.language_pair not in LANGUAGE_PAIRS:
            raise ValidationError(
                f'main.language_pair: {self.language_pair!r} is not one of '
                f'{", ".join(LANGUAGE_PAIRS)}')
        seed = self._get('main', 'seed', required=True)
        try:
            self.seed = int(seed)
        except ValueError:
            raise ValidationError(f'main.seed: {seed!r} is not an integer') from None

    @property
    def source_lang(self):
        return self.language_pair.split('-')[0]

    @property
    def target_lang(self):
        return self.language_pair.split('-')[1]

    # -- low-level accessors --------------------------------------------

    def _get(self, section, key, required=False, default=None):
        if self._p.has_option(section, key):
            value = self._p.get(section, key).strip()
            if value:
                return value
        if required:
            raise ValidationError(f'{section}.{key}: required setting is missing')
        return default

    def _resolve(self, path):
        return os.path.normpath(os.path.join(self._base, path))

    def _path(self, section, key, required=False, must_exist=False, default=None):
        value = self._get(section, key, required=required)
        if value is None:
            return default
        resolved = self._resolve(value)
        if must_exist and not os.path.exists(resolved):
            raise ValidationError(f'{section}.{key}: file not found: {resolved}')
        return resolved

    def _float(self, section, key, default):
        value = self._get(section, key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ValidationError(f'{section}.{key}: {value!r} is not a number') from None

    def _int(self, section, key, default=None, required=False):
        value = self._get(section, key, required=required)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ValidationError(f'{section}.{key}: {value!r} is not an integer') from None

    def _bool(self, section, key, default):
        value = self._get(section, key)
        if value is None:
            return default
        if value.lower() in ('true', 'yes', '1', 'on'):
            return True
        if value.lower() in ('false', 'no', '0', 'off'):
            return False
        raise ValidationError(f'{section}.{key}: {value!r} is not a boolean')

    # -- sections ---------------------------------------------------------

    def corpora(self) -> list:
        out = []
        for section in self._p.sections():
            if not section.startswith('corpus '):
                continue
            name = section.split(' ', 1)[1]
            out.append(CorpusSpec(
                name=name,
                src=self._path(section, 'src', required=True, must_exist=True),
                tgt=self._path(section, 'tgt', required=True, must_exist=True),
                origin=self._get(section, 'origin', default=name),
                attention=self._path(section, 'attention', must_exist=True),
            ))
        return out

    def pools(self) -> dict:
        out = {}
        for section in self._p.sections():
            if not section.startswith('pool '):
                continue
            name = section.split(' ', 1)[1]
            mono = self._path(section, 'mono', must_exist=True)
            src = self._path(section, 'src', must_exist=True)
            tgt = self._path(section, 'tgt', must_exist=True)
            if mono is None and src is None:
                raise ValidationError(f'pool {name}: needs mono or src/tgt paths')
            out[name] = PoolSpec(name=name, mono=mono, src=src, tgt=tgt)
        return out

    def filter_config(self) -> FilterConfig:
        section = 'filter'
        per_origin = {}
        if self._p.has_section(section):
            for key, value in self._p.items(section):
                if key.startswith('max_ratio.'):
                    per_origin[key.split('.', 1)[1]] = float(value)
        lid = self._get(section, 'lid', default='builtin')
        classifier = None
        if lid == 'builtin':
            classifier = builtin_classifier()
        elif lid not in ('off', 'none'):
            from .hooks import classifier_hook
            classifier = classifier_hook([self._resolve(lid)])
        frac = {}
        if self._p.has_section(section):
            for key, value in self._p.items(section):
                if key.startswith('max_frac_below.'):
                    frac[float(key.split('.', 1)[1])] = float(value)
        thresholds = AttentionThresholds(
            min_entropy=self._float(section, 'min_entropy', 0.05),
            max_frac_below=frac or {0.5: 0.9})
        exclude = self._get(section, 'exclude_origins', default='')
        return FilterConfig(
            expected_langs=(self.source_lang, self.target_lang),
            classifier=classifier,
            max_ratio=self._float(section, 'max_ratio', 1.8),
            per_origin_max_ratio=per_origin,
            attention_thresholds=thresholds,
            exclude_origins=frozenset(
                o.strip() for o in exclude.split(',') if o.strip()),
            check_copies=self._bool(section, 'check_copies', True),
        )

    def subword_model_path(self, must_exist=False):
        return self._path('subword', 'model', required=True, must_exist=must_exist)

    def subword_vocab_size(self):
        return self._int('subword', 'vocab_size', required=True)

    def subword_threshold(self):
        return self._int('subword', 'vocab_threshold', default=0)

    def placeholders_enabled(self):
        return self._bool('placeholder', 'enabled', True)

    def norm_spec(self):
        """'builtin', a resolved table path, or None when disabled."""
        value = self._get('normalize', 'chars', default='builtin')
        if value in ('off', 'none'):
            return None
        if value == 'builtin':
            return 'builtin'
        return self._path('normalize', 'chars', must_exist=True)

    def norm_table(self):
        spec = self.norm_spec()
        if spec is None:
            return None
        from .textnorm import NormTable, builtin_table
        if spec == 'builtin':
            return builtin_table('nfkc-approx')
        return NormTable.from_file(spec)

    def tags(self):
        corpus = self._get('tags', 'corpus')
        type_name = self._get('tags', 'type')
        return corpus, type_name

    def noise_rules(self) -> NoiseRuleSet:
        section = 'noise'
        confusion = self._get(section, 'confusion', default=f'builtin:{self.source_lang}')
        prob = self._float(section, 'confusion_prob', 0.1)
        if confusion.startswith('builtin:'):
            lang = confusion.split(':', 1)[1]
            fname = f'confusion_{lang}.tsv' if lang in ('en', 'fr') else 'confusion_en.tsv'
            pairs = load_confusion_pairs(data_path(fname), default_prob=prob)
        elif confusion in ('off', 'none'):
            pairs = []
        else:
            pairs = load_confusion_pairs(self._resolve(confusion), default_prob=prob)
        table = {}
        punct = self._get(section, 'punct_table', default='builtin')
        if punct not in ('off', 'none'):
            source = data_path('punct_subst.tsv') if punct == 'builtin' \
                else self._resolve(punct)
            with open(source, encoding='utf-8') as f:
                for line in f:
                    line = line.rstrip('\n')
                    if not line or line.startswith('#'):
                        continue
                    k, _, v = line.partition('\t')
                    table[k] = v
        return NoiseRuleSet(
            confusion_pairs=pairs,
            word_replace_prob=self._float(section, 'word_replace_prob', 0.1),
            letter_swap_prob=self._float(section, 'letter_swap_prob', 0.05),
            punct_subst_prob=self._float(section, 'punct_subst_prob', 0.05),
            punct_table=table,
            space_around_punct_prob=self._float(section, 'space_around_punct_prob', 0.05),
            accent_removal_prob=self._float(section, 'accent_removal_prob', 0.05),
        )

    def variants_path(self):
        return self._path('noise', 'variants', must_exist=True)

    def epoch_plan_path(self):
        return self._path('epochs', 'plan', required=True, must_exist=True)

    def bt_hook_argv(self):
        value = self._get('epochs', 'bt_hook', required=True)
        argv = value.split()
        argv[0] = self._resolve(argv[0])
        if not os.path.exists(argv[0]):
            raise ValidationError(f'epochs.bt_hook: executable not found: {argv[0]}')
        return argv

    def workers(self):
        return self._int('main', 'workers', default=1)


def load_config(path: str) -> PipelineConfig:
    if not os.path.exists(path):
        raise ValidationError(f'config file not found: {path}')
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding='utf-8') as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ValidationError(f'{path}: {exc}') from None
    return PipelineConfig(parser, os.path.dirname(os.path.abspath(path)), path)
