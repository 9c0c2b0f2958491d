"""Shared fixtures: random noisy-text generation for round-trip tests.

The generator produces whitespace-normalized lines mixing scripts,
casing styles, digits, punctuation, emojis and Reddit names.  It avoids
characters the pipeline reserves or rewrites by design (the meta symbol,
literal placeholder/marker/tag tokens, characters in the shipped
normalization table), because those are documented as non-round-tripping.
"""

import random

import pytest

LATIN = 'abcdefghijklmnopqrstuvwxyz'
ACCENTED = 'éèêàâùûüïîôçñöäß'
KANA = 'あいうえおかきくけこさしすせそカタナハマヤラワんっょ'
HAN = '猫犬水日本語中国字学校'
CYRILLIC = 'абвгдежзиклмнопрстуф'
GREEK = 'αβγδεζηθικλμνξοπρστυ'
DIGITS = '0123456789'
PUNCT = ['.', ',', '!', '?', '!!', '...', ':', ';', '-', '(', ')', '"', "'",
         '*', '~', '^', '#', '&', '%', '+', '=', '<', '>', '/']
EMOJI = ['🙂', '😂', '🎉', '🚀', '❤️', '✨', '🤔', '👍', '🔥', '🇫🇷', '🇯🇵',
         '👨‍👩‍👧', '🧑🏽', '☀️', '⭐']
REDDIT = ['/u/frenchperson', 'u/bob_123', '/r/france', 'r/AskReddit',
          '/ u / carl', 'r / games']


def _word(rng: random.Random) -> str:
    kind = rng.random()
    if kind < 0.45:
        alpha = LATIN
    elif kind < 0.55:
        alpha = ACCENTED
    elif kind < 0.65:
        alpha = KANA
    elif kind < 0.72:
        alpha = HAN
    elif kind < 0.78:
        alpha = CYRILLIC
    elif kind < 0.82:
        alpha = GREEK
    else:
        alpha = DIGITS
    word = ''.join(rng.choice(alpha) for _ in range(rng.randint(1, 10)))
    style = rng.random()
    if style < 0.15:
        word = word.upper()
    elif style < 0.3:
        word = word.capitalize()
    elif style < 0.4:
        # random per-letter casing, the hard case for the case codec
        word = ''.join(c.upper() if rng.random() < 0.5 else c for c in word)
    return word


def random_noisy_line(rng: random.Random) -> str:
    tokens = []
    for _ in range(rng.randint(1, 12)):
        roll = rng.random()
        if roll < 0.72:
            tokens.append(_word(rng))
        elif roll < 0.82:
            tokens.append(rng.choice(PUNCT))
        elif roll < 0.92:
            tokens.append(rng.choice(EMOJI))
        else:
            tokens.append(rng.choice(REDDIT))
        if rng.random() < 0.25 and tokens:
            # glue punctuation or emoji straight onto the previous token
            tokens[-1] += rng.choice(PUNCT + EMOJI)
    return ' '.join(tokens)


@pytest.fixture(scope='session')
def noisy_lines():
    rng = random.Random(20150901)
    return [random_noisy_line(rng) for _ in range(500)]


@pytest.fixture(scope='session')
def small_model(noisy_lines):
    from noisymt.placeholder import PLACEHOLDER_TOKENS
    from noisymt.subword import train_bpe
    return train_bpe(noisy_lines[:300], 400, vocab_threshold=2,
                     protected=PLACEHOLDER_TOKENS)
