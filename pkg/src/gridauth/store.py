"""Persistent user accounts: registration, credential encryption, lockout.

Records are kept in a single append-compacted line file.  Both the
username and the key number are stored AES-128 encrypted; the plaintext
of neither ever touches disk.  The key field uses AES-GCM with a random
nonce.  The username field uses the same cipher with a synthetic nonce
derived by HMAC from the store key and the plaintext, making encryption
deterministic so records can be looked up by ciphertext equality.  The
determinism deliberately leaks username equality; with a static store
key that is the accepted tradeoff for lookups without plaintext.

Line format (one record per line, last line per user wins):

    v1|<b64 username_ct>|<b64 key_ct>|<created_at RFC3339>|<failed_attempts>|<locked_until RFC3339 or "-">

All mutations are serialized through one lock; reads go to the in-memory
index built at startup.
"""

from __future__ import annotations

import base64
import hmac
import hashlib
import os
import random
import re
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .clock import Clock, SystemClock
from .keys import KeyNumber, generate_key

STORE_KEY_BITS = 128
DEFAULT_LOCKOUT_THRESHOLD = 5
DEFAULT_LOCKOUT_WINDOW_SECONDS = 30 * 60

_USERNAME_RE = re.compile(r"^[A-Za-z0-9]{3,32}$")
_GCM_NONCE_LEN = 12
_RECORD_VERSION = "v1"


class StoreError(Exception):
    """Persistence-layer failure (I/O, corrupt file, bad configuration)."""


class UsernameValidationError(ValueError):
    """Username violates the 3-32 alphanumeric rule."""


class DuplicateUsernameError(StoreError):
    """Registration attempted for an already-registered username."""


class UnknownUserError(StoreError):
    """Operation on a username with no record."""


class CredentialDecryptError(StoreError):
    """Ciphertext failed authentication (tampered or wrong store key)."""


def validate_username(value: str) -> str:
    """Case-sensitive alphanumeric username, 3-32 characters."""
    if not isinstance(value, str) or not _USERNAME_RE.match(value):
        raise UsernameValidationError(
            "username must be 3-32 characters, letters and digits only"
        )
    return value


@dataclass(frozen=True, slots=True)
class StoreKey:
    """The static 128-bit symmetric key protecting credentials at rest."""

    material: bytes

    def __post_init__(self):
        if len(self.material) != STORE_KEY_BITS // 8:
            raise ValueError("store key must be exactly 128 bits")

    @classmethod
    def from_hex(cls, text: str) -> "StoreKey":
        text = text.strip()
        if len(text) != 32:
            raise ValueError("store key must be 32 hex characters (128 bits)")
        try:
            return cls(bytes.fromhex(text))
        except ValueError as exc:
            raise ValueError("store key must be valid hex") from exc

    @classmethod
    def generate(cls) -> "StoreKey":
        return cls(os.urandom(STORE_KEY_BITS // 8))

    def to_hex(self) -> str:
        return self.material.hex()


def _synthetic_nonce(key: StoreKey, plaintext: bytes) -> bytes:
    return hmac.new(key.material, b"uname-nonce|" + plaintext, hashlib.sha256).digest()[
        :_GCM_NONCE_LEN
    ]


def encrypt_credential(
    plaintext: bytes, key: StoreKey, *, deterministic: bool = False
) -> bytes:
    """AES-128-GCM, returning nonce || ciphertext+tag.

    With ``deterministic=True`` the nonce is a PRF of (store key,
    plaintext), so equal plaintexts encrypt identically; used for the
    username field to support lookup by ciphertext.
    """
    nonce = _synthetic_nonce(key, plaintext) if deterministic else os.urandom(_GCM_NONCE_LEN)
    return nonce + AESGCM(key.material).encrypt(nonce, plaintext, None)


def decrypt_credential(ciphertext: bytes, key: StoreKey) -> bytes:
    """Inverse of :func:`encrypt_credential`; authentication failure raises."""
    if len(ciphertext) <= _GCM_NONCE_LEN:
        raise CredentialDecryptError("ciphertext too short")
    nonce, body = ciphertext[:_GCM_NONCE_LEN], ciphertext[_GCM_NONCE_LEN:]
    try:
        return AESGCM(key.material).decrypt(nonce, body, None)
    except InvalidTag as exc:
        raise CredentialDecryptError("credential failed authentication") from exc


@dataclass(frozen=True, slots=True)
class UserRecord:
    username_ct: bytes
    key_ct: bytes
    created_at: datetime
    failed_attempts: int = 0
    locked_until: datetime | None = None


def _format_rfc3339(dt: datetime) -> str:
    return dt.replace(microsecond=0).isoformat()


def _record_to_line(record: UserRecord) -> str:
    locked = _format_rfc3339(record.locked_until) if record.locked_until else "-"
    return "|".join(
        (
            _RECORD_VERSION,
            base64.b64encode(record.username_ct).decode("ascii"),
            base64.b64encode(record.key_ct).decode("ascii"),
            _format_rfc3339(record.created_at),
            str(record.failed_attempts),
            locked,
        )
    )


def _record_from_line(line: str, lineno: int) -> UserRecord:
    parts = line.split("|")
    if len(parts) != 6 or parts[0] != _RECORD_VERSION:
        raise StoreError(f"corrupt store record at line {lineno}")
    try:
        return UserRecord(
            username_ct=base64.b64decode(parts[1], validate=True),
            key_ct=base64.b64decode(parts[2], validate=True),
            created_at=datetime.fromisoformat(parts[3]),
            failed_attempts=int(parts[4]),
            locked_until=None if parts[5] == "-" else datetime.fromisoformat(parts[5]),
        )
    except (ValueError, TypeError) as exc:
        raise StoreError(f"corrupt store record at line {lineno}") from exc


class AccountStore:
    """Single-writer, multi-reader account storage with lockout counters.

    Mutations append one full updated record line and refresh the
    in-memory index; the file is compacted to one line per user on
    :meth:`close` and whenever a store is opened.
    """

    def __init__(
        self,
        path: str,
        key: StoreKey,
        *,
        clock: Clock | None = None,
        lockout_threshold: int = DEFAULT_LOCKOUT_THRESHOLD,
        lockout_window_seconds: int = DEFAULT_LOCKOUT_WINDOW_SECONDS,
    ):
        if lockout_threshold < 1:
            raise ValueError("lockout threshold must be at least 1")
        self.path = path
        self.key = key
        self.clock = clock if clock is not None else SystemClock()
        self.lockout_threshold = lockout_threshold
        self.lockout_window = timedelta(seconds=lockout_window_seconds)
        self._lock = threading.RLock()
        self._index: dict[bytes, UserRecord] = {}
        self._load()

    # -- persistence ------------------------------------------------------

    def _load(self) -> None:
        self._index.clear()
        compact_needed = False
        try:
            if os.path.exists(self.path):
                with open(self.path, "r", encoding="utf-8") as fh:
                    for lineno, line in enumerate(fh, start=1):
                        line = line.strip()
                        if not line:
                            continue
                        record = _record_from_line(line, lineno)
                        if record.username_ct in self._index:
                            compact_needed = True
                        self._index[record.username_ct] = record
        except OSError as exc:
            raise StoreError(f"cannot read store file {self.path}: {exc}") from exc
        if compact_needed:
            self._rewrite()

    def _append(self, record: UserRecord) -> None:
        line = _record_to_line(record)
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
        except OSError as exc:
            raise StoreError(f"cannot write store file {self.path}: {exc}") from exc
        self._index[record.username_ct] = record

    def _rewrite(self) -> None:
        tmp_path = self.path + ".tmp"
        try:
            with open(tmp_path, "w", encoding="utf-8") as fh:
                for record in self._index.values():
                    fh.write(_record_to_line(record) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_path, self.path)
        except OSError as exc:
            raise StoreError(f"cannot rewrite store file {self.path}: {exc}") from exc

    def compact(self) -> None:
        """Rewrite the file with exactly one line per user."""
        with self._lock:
            self._rewrite()

    def close(self) -> None:
        with self._lock:
            if self._index or os.path.exists(self.path):
                self._rewrite()

    # -- operations -------------------------------------------------------

    def _username_ct(self, username: str) -> bytes:
        return encrypt_credential(
            username.encode("utf-8"), self.key, deterministic=True
        )

    def register(self, username: str, rng: random.Random | None = None) -> KeyNumber:
        """Create an account and return its generated key, exactly once.

        The plaintext key exists only in the return value; the persisted
        record holds ciphertexts.
        """
        validate_username(username)
        with self._lock:
            username_ct = self._username_ct(username)
            if username_ct in self._index:
                raise DuplicateUsernameError(f"username already registered: {username}")
            key_number = generate_key(rng)
            record = UserRecord(
                username_ct=username_ct,
                key_ct=encrypt_credential(key_number.render().encode("ascii"), self.key),
                created_at=self.clock.now(),
            )
            self._append(record)
            return key_number

    def lookup(self, username: str) -> UserRecord | None:
        """Record for a username, or None; equality is case-sensitive."""
        validate_username(username)
        with self._lock:
            return self._index.get(self._username_ct(username))

    def stored_key(self, record: UserRecord) -> KeyNumber:
        """Decrypt the key field of a record."""
        return KeyNumber.parse(decrypt_credential(record.key_ct, self.key).decode("ascii"))

    def record_failure(self, username: str, now: datetime | None = None) -> UserRecord:
        """Count one failed verification; lock when the threshold is hit.

        Reaching the threshold sets ``locked_until`` one lockout window
        from now and resets the counter, so attempts per window can never
        exceed the threshold.
        """
        with self._lock:
            record = self.lookup(username)
            if record is None:
                raise UnknownUserError(f"no record for username: {username}")
            now = now if now is not None else self.clock.now()
            attempts = record.failed_attempts + 1
            if attempts >= self.lockout_threshold:
                updated = replace(
                    record,
                    failed_attempts=0,
                    locked_until=now + self.lockout_window,
                )
            else:
                updated = replace(record, failed_attempts=attempts)
            self._append(updated)
            return updated

    def record_success(self, username: str) -> UserRecord:
        """Reset the failure counter and clear any lock after a good login."""
        with self._lock:
            record = self.lookup(username)
            if record is None:
                raise UnknownUserError(f"no record for username: {username}")
            if record.failed_attempts == 0 and record.locked_until is None:
                return record
            updated = replace(record, failed_attempts=0, locked_until=None)
            self._append(updated)
            return updated

    def check_lockout(self, username: str, now: datetime | None = None) -> datetime | None:
        """``locked_until`` while a lock is active, else None.

        A lock ends exactly at its expiry instant: at ``locked_until``
        itself the user is unlocked again.
        """
        with self._lock:
            record = self.lookup(username)
            if record is None:
                raise UnknownUserError(f"no record for username: {username}")
            now = now if now is not None else self.clock.now()
            if record.locked_until is not None and now < record.locked_until:
                return record.locked_until
            return None
