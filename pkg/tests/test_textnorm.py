import pytest
from hypothesis import given, strategies as st

from noisymt.errors import ValidationError
from noisymt.textnorm import (NBSP, NormTable, builtin_table, fix_quotes_fr,
                              normalize_chars, normalize_punct)

NFKC = builtin_table('nfkc-approx')
PUNCT = builtin_table('moses-punct')


class TestNormalizeChars:
    def test_vulgar_fraction(self):
        assert normalize_chars('½', NFKC) == '1/2'

    def test_fullwidth_question_mark(self):
        assert normalize_chars('？', NFKC) == '?'

    def test_empty(self):
        assert normalize_chars('', NFKC) == ''

    def test_fullwidth_block(self):
        assert normalize_chars('Ｈｅｌｌｏ！　１２３', NFKC) == 'Hello! 123'

    def test_longest_match_first(self):
        table = NormTable({'ab': 'X', 'a': 'Y'})
        assert normalize_chars('aba', table) == 'XY'

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize_chars(text, NFKC)
        assert normalize_chars(once, NFKC) == once

    def test_self_mapping_rejected(self):
        with pytest.raises(ValidationError):
            NormTable({'x': 'x'})

    def test_open_table_rejected(self):
        # replacement value would itself be rewritten
        with pytest.raises(ValidationError):
            NormTable({'a': 'b', 'b': 'c'})


class TestFixQuotesFr:
    def test_apostrophe(self):
        assert fix_quotes_fr("l'eau") == 'l’eau'

    def test_paired_quotes(self):
        assert fix_quotes_fr('il a dit "oui" hier') == \
            f'il a dit «{NBSP}oui{NBSP}» hier'

    def test_unpaired_quote_untouched(self):
        assert fix_quotes_fr('3" de pluie') == '3" de pluie'

    def test_two_pairs(self):
        out = fix_quotes_fr('"a" et "b"')
        assert out == f'«{NBSP}a{NBSP}» et «{NBSP}b{NBSP}»'

    def test_odd_trailing_quote(self):
        out = fix_quotes_fr('"a" et "b')
        assert out.endswith('"b')

    def test_apostrophe_not_between_letters(self):
        assert fix_quotes_fr("'allo") == "'allo"
        assert fix_quotes_fr("2'30") == "2'30"

    @given(st.text(max_size=80))
    def test_letters_and_digits_preserved(self, text):
        before = [c for c in text if c.isalnum()]
        after = [c for c in fix_quotes_fr(text) if c.isalnum()]
        assert before == after


class TestNormalizePunct:
    def test_quotes_and_dash(self):
        assert normalize_punct('“hello” — ok') == '"hello" - ok'

    def test_ellipsis(self):
        assert normalize_punct('a…b') == 'a...b'

    def test_space_collapse(self):
        assert normalize_punct('a  b') == 'a b'

    def test_nbsp(self):
        assert normalize_punct(f'a{NBSP}b') == 'a b'

    @given(st.text(max_size=80))
    def test_no_key_codepoints_survive(self, text):
        out = normalize_punct(text)
        assert not (set(out) & PUNCT.key_codepoints())


class TestTableFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / 'table.tsv'
        PUNCT.save(path)
        again = NormTable.from_file(path)
        assert again.entries == PUNCT.entries

    def test_comments_and_multichar_keys(self, tmp_path):
        path = tmp_path / 'table.tsv'
        path.write_text('# comment\nabc\tx\n', encoding='utf-8')
        table = NormTable.from_file(path)
        assert normalize_chars('zabcz', table) == 'zxz'
