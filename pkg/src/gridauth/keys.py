"""Key numbers and the shoulder-surfing resistant (SSR) day transform.

The authentication secret is a 4-decimal-digit key number.  Instead of
entering the stored key, a user may enter its SSR form for the current
calendar day: take the digital root of the day of month (a single digit
1-9), repeat it four times, and add it digit-wise modulo 10 with no
carries.  The server inverts the transform with digit-wise subtraction
(borrowing 10 where needed) and cross-checks against the stored key.

Everything here is pure; the caller supplies the day and the randomness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

KEY_LENGTH = 4
KEYSPACE = 10 ** KEY_LENGTH

_SYSTEM_RNG = random.SystemRandom()


@dataclass(frozen=True, slots=True)
class KeyNumber:
    """A 4-digit decimal key, canonically rendered zero-padded ("0000".."9999")."""

    digits: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.digits) != KEY_LENGTH:
            raise ValueError(f"key must have exactly {KEY_LENGTH} digits")
        if not all(isinstance(d, int) and 0 <= d <= 9 for d in self.digits):
            raise ValueError("key digits must be integers in 0-9")

    @classmethod
    def parse(cls, text: str) -> "KeyNumber":
        if len(text) != KEY_LENGTH or not text.isascii() or not text.isdigit():
            raise ValueError(f"key must be exactly {KEY_LENGTH} decimal digits, got {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_int(cls, value: int) -> "KeyNumber":
        if not 0 <= value < KEYSPACE:
            raise ValueError(f"key value out of range: {value}")
        return cls.parse(format(value, f"0{KEY_LENGTH}d"))

    def render(self) -> str:
        return "".join(str(d) for d in self.digits)

    def __str__(self) -> str:
        return self.render()


def validate_day(day: int) -> int:
    """Day of month used by the SSR transform; must be 1-31."""
    if not isinstance(day, int) or isinstance(day, bool) or not 1 <= day <= 31:
        raise ValueError(f"day of month must be in 1-31, got {day!r}")
    return day


def generate_key(rng: random.Random | None = None) -> KeyNumber:
    """Draw a key uniformly from 0000-9999.

    Uses a CSPRNG by default; pass a seeded ``random.Random`` for
    reproducible test fixtures.  Keys are not deduplicated across users:
    with only 10 000 possible values, enforced uniqueness would both cap
    the user count and leak which keys are taken.
    """
    rng = rng if rng is not None else _SYSTEM_RNG
    return KeyNumber.from_int(rng.randrange(KEYSPACE))


def digital_root(day: int) -> int:
    """Iterated decimal digit sum of the day of month, e.g. 29 -> 11 -> 2.

    Always lands in 1-9 for valid days, so the derived shift is never zero.
    """
    value = validate_day(day)
    while value >= 10:
        value = sum(int(c) for c in str(value))
    return value


def repeat_digit(d: int) -> KeyNumber:
    """Four-fold repetition of one digit, e.g. 7 -> 7777."""
    if not isinstance(d, int) or isinstance(d, bool) or not 0 <= d <= 9:
        raise ValueError(f"digit must be in 0-9, got {d!r}")
    return KeyNumber((d, d, d, d))


def encode_ssr(original: KeyNumber, day: int) -> KeyNumber:
    """Day-shifted form of a key: digit-wise (k + r) mod 10, no carries.

    r is the digital root of the day, repeated across all four positions.
    Keeping only the last digit of each per-position sum means positions
    never interact.
    """
    shift = digital_root(day)
    return KeyNumber(tuple((d + shift) % 10 for d in original.digits))


def decode_ssr(entered: KeyNumber, day: int) -> KeyNumber:
    """Inverse of :func:`encode_ssr` for the same day.

    Digit-wise subtraction of the repeated day digit; a position smaller
    than the subtrahend borrows 10 (equivalently, subtraction mod 10).
    """
    shift = digital_root(day)
    return KeyNumber(tuple((d - shift) % 10 for d in entered.digits))


def verify_key(entered: KeyNumber, stored: KeyNumber, day: int) -> bool:
    """Accept the raw stored key or its SSR form for the given day.

    Both forms are valid on any login; rejection is a value, not an error.
    """
    validate_day(day)
    return entered == stored or decode_ssr(entered, day) == stored
