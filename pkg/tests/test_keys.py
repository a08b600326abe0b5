"""Key number arithmetic: generation, day transform, verification.

Derived expectations are checked against independent oracles written
here in the tests (naive iterated digit sum, per-digit modular
arithmetic) rather than against the implementation under test.
"""

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridauth.keys import (
    KEYSPACE,
    KeyNumber,
    decode_ssr,
    digital_root,
    encode_ssr,
    generate_key,
    repeat_digit,
    verify_key,
)

keys_st = st.integers(min_value=0, max_value=KEYSPACE - 1).map(KeyNumber.from_int)
days_st = st.integers(min_value=1, max_value=31)


def oracle_digit_sum(day: int) -> int:
    """Naive iterated digit sum, independent of the implementation."""
    while day >= 10:
        total = 0
        while day:
            day, digit = divmod(day, 10)
            total += digit
        day = total
    return day


def oracle_add_mod10(a: str, b: str) -> str:
    return "".join(str((int(x) + int(y)) % 10) for x, y in zip(a, b))


def oracle_sub_mod10(a: str, b: str) -> str:
    return "".join(str((int(x) - int(y)) % 10) for x, y in zip(a, b))


class TestKeyNumber:
    def test_parse_render_round_trip(self):
        k = KeyNumber.parse("0042")
        assert k.render() == "0042"
        assert KeyNumber.parse(k.render()) == k

    @pytest.mark.parametrize("bad", ["123", "12345", "12a4", "١٢٣٤", "-123", "", "12.4"])
    def test_parse_rejects_non_4_digit(self, bad):
        with pytest.raises(ValueError):
            KeyNumber.parse(bad)

    def test_digits_validated(self):
        with pytest.raises(ValueError):
            KeyNumber((1, 2, 3))
        with pytest.raises(ValueError):
            KeyNumber((1, 2, 3, 10))

    @given(keys_st)
    def test_round_trip_property(self, k):
        assert KeyNumber.parse(k.render()) == k

    def test_zero_pads(self):
        assert KeyNumber.from_int(7).render() == "0007"
        assert str(KeyNumber.from_int(9999)) == "9999"


class TestGenerateKey:
    def test_two_independent_draws_are_valid(self):
        for _ in range(2):
            k = generate_key()
            assert len(k.render()) == 4 and k.render().isdigit()

    def test_fixed_seed_reproducible(self):
        assert generate_key(random.Random(12345)).render() == "6825"
        assert generate_key(random.Random(12345)) == generate_key(random.Random(12345))

    def test_digit_position_frequencies_uniform(self):
        # 100k samples: every position shows each value at 0.1 +/- 0.01.
        rng = random.Random(99)
        n = 100_000
        counts = [Counter() for _ in range(4)]
        for _ in range(n):
            for pos, d in enumerate(generate_key(rng).digits):
                counts[pos][d] += 1
        for pos in range(4):
            for value in range(10):
                assert abs(counts[pos][value] / n - 0.1) <= 0.01, (pos, value)


class TestDigitalRoot:
    @pytest.mark.parametrize("day,expected", [(5, 5), (27, 9), (29, 2), (1, 1), (31, 4)])
    def test_known_values(self, day, expected):
        assert digital_root(day) == expected

    def test_matches_naive_iterated_sum_for_all_days(self):
        for day in range(1, 32):
            assert digital_root(day) == oracle_digit_sum(day)

    def test_matches_closed_form(self):
        for day in range(1, 32):
            assert digital_root(day) == 1 + (day - 1) % 9

    def test_always_single_nonzero_digit(self):
        assert {digital_root(d) for d in range(1, 32)} <= set(range(1, 10))

    @pytest.mark.parametrize("bad", [0, 32, -1, 100, "7", True])
    def test_rejects_invalid_day(self, bad):
        with pytest.raises(ValueError):
            digital_root(bad)


class TestRepeatDigit:
    @pytest.mark.parametrize("d,expected", [(7, "7777"), (0, "0000"), (1, "1111"), (9, "9999")])
    def test_expansion(self, d, expected):
        assert repeat_digit(d).render() == expected

    @pytest.mark.parametrize("bad", [-1, 10, "7", True])
    def test_rejects_non_digit(self, bad):
        with pytest.raises(ValueError):
            repeat_digit(bad)


class TestEncodeDecode:
    def test_worked_example_encodes(self):
        # 1241 with shift 7 (day 16): 4+7=11 keeps only the last digit.
        assert encode_ssr(KeyNumber.parse("1241"), 16).render() == "8918"

    def test_worked_example_decodes(self):
        # Third digit 1 < 7 borrows 10: 11-7=4.
        assert decode_ssr(KeyNumber.parse("8918"), 16).render() == "1241"

    def test_zero_key_passes_shift_through(self):
        assert encode_ssr(KeyNumber.parse("0000"), 7).render() == "7777"

    def test_nines_wrap_to_zero(self):
        assert encode_ssr(KeyNumber.parse("9999"), 1).render() == "0000"

    def test_decode_of_shift_itself_is_zero(self):
        assert decode_ssr(KeyNumber.parse("7777"), 7).render() == "0000"

    @given(keys_st, days_st)
    def test_encode_matches_per_digit_oracle(self, k, day):
        shift = str(oracle_digit_sum(day)) * 4
        assert encode_ssr(k, day).render() == oracle_add_mod10(k.render(), shift)

    @given(keys_st, days_st)
    def test_decode_matches_per_digit_oracle(self, k, day):
        shift = str(oracle_digit_sum(day)) * 4
        assert decode_ssr(k, day).render() == oracle_sub_mod10(k.render(), shift)

    @given(keys_st, days_st)
    def test_round_trip(self, k, day):
        assert decode_ssr(encode_ssr(k, day), day) == k

    @given(keys_st, days_st)
    def test_encode_never_identity(self, k, day):
        # the shift is 1-9, never 0, so every digit moves
        assert encode_ssr(k, day) != k

    @given(keys_st, days_st, st.integers(0, 3), st.integers(1, 9))
    def test_per_position_independence(self, k, day, pos, delta):
        changed = list(k.digits)
        changed[pos] = (changed[pos] + delta) % 10
        other = encode_ssr(KeyNumber(tuple(changed)), day)
        base = encode_ssr(k, day)
        for i in range(4):
            if i == pos:
                assert other.digits[i] != base.digits[i]
            else:
                assert other.digits[i] == base.digits[i]


class TestVerifyKey:
    def test_identity_path_accepts_any_day(self):
        stored = KeyNumber.parse("1241")
        for day in range(1, 32):
            assert verify_key(stored, stored, day)

    def test_worked_pair_accepts(self):
        assert verify_key(KeyNumber.parse("8918"), KeyNumber.parse("1241"), 16)

    def test_wrong_day_rejects_transformed_key(self):
        # decode with shift 4 gives 4574, not the stored key
        assert not verify_key(KeyNumber.parse("8918"), KeyNumber.parse("1241"), 4)

    def test_plain_wrong_key_rejects(self):
        assert not verify_key(KeyNumber.parse("0000"), KeyNumber.parse("1241"), 16)

    @given(keys_st, days_st)
    def test_ssr_form_always_accepted(self, stored, day):
        assert verify_key(encode_ssr(stored, day), stored, day)


@settings(max_examples=5, deadline=None)
@given(days_st)
def test_exhaustive_round_trip_for_sampled_days(day):
    # The full 310k-case sweep runs in the acceptance suite; here every
    # key is swept for hypothesis-chosen days.
    for value in range(KEYSPACE):
        k = KeyNumber.from_int(value)
        assert decode_ssr(encode_ssr(k, day), day) == k
