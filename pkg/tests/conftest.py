import random
from datetime import datetime, timezone

import pytest

from gridauth.clock import MockClock
from gridauth.store import AccountStore, StoreKey

# Day 16 has digital root 7, the same shift as the documented worked example.
FIXED_NOW = datetime(2024, 5, 16, 12, 0, 0, tzinfo=timezone.utc)

STORE_KEY_HEX = "00112233445566778899aabbccddeeff"


@pytest.fixture
def store_key():
    return StoreKey.from_hex(STORE_KEY_HEX)


@pytest.fixture
def mock_clock():
    return MockClock(FIXED_NOW)


@pytest.fixture
def store(tmp_path, store_key, mock_clock):
    s = AccountStore(str(tmp_path / "users.db"), store_key, clock=mock_clock)
    yield s
    s.close()


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
