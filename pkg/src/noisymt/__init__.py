"""noisymt: corpus preprocessing and robustness toolkit for machine
translation of noisy social-media text.

Modules cover character normalization, reversible subword segmentation
with inline casing, emoji/Reddit-name placeholders, parallel-corpus
filtering (copy, language-ID, length ratio, attention), natural-noise
mining and injection, tagged epoch assembly with back-translation
rotation, and the task's BLEU metric.
"""

from .bleu import BleuScore, corpus_bleu, pretokenized_bleu, tokenize_13a
from .corpusbuild import (BT_TAG, NOISE_TAG, REAL_TAG, REV_TAG, EpochPlan,
                          build_epoch, reverse_pair, rotation_slice, tag_line)
from .errors import (AlignmentError, AlreadyTagged, DanglingMarker, DataError,
                     EmptyCorpus, EmptyPool, HookFailure, LengthMismatch,
                     MalformedMatrix, NoisyMTError, UnclassifiablePiece,
                     ValidationError, VocabTooSmall)
from .filtering import (AttentionMatrix, AttentionStats, AttentionThresholds,
                        FilterConfig, FilterReport, SentencePair,
                        attention_filter, attention_stats, copy_filter,
                        filter_corpus, filter_pairs, length_ratio_filter,
                        lid_filter)
from .noise import (NoiseRuleSet, VariantMap, apply_noise, augment_corpus,
                    collapse_repetitions, extended_edit_distance,
                    mine_variants)
from .placeholder import (PlaceholderMap, decode_placeholders,
                          encode_placeholders, placeholder_parity)
from .subword import (CASE_MARKERS, META_SYMBOL, TITLE_MARKER, UPPER_MARKER,
                      SubwordModel, apply_bpe, case_decode, case_encode,
                      coarse_tokenize, detokenize, fold_case, segment,
                      split_mixed_case, train_bpe, unsegment)
from .textnorm import (NormTable, builtin_table, fix_quotes_fr,
                       normalize_chars, normalize_punct)

__version__ = '0.1.0'
