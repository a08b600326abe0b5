"""The ``gridauth`` executable.

Subcommands: ``serve`` (run the HTTP service), ``register`` (create an
account against the store directly), ``login`` (headless login against a
running service), ``simulate`` (attack experiments), ``selftest``
(exhaustive in-process checks).

Exit codes are a stable contract:
    0 success, 1 authentication failed, 2 configuration/usage error,
    3 account locked, 4 transport error.
"""

from __future__ import annotations

import random
import sys
import tempfile
from datetime import datetime, timezone
from typing import Callable, IO

import click
import httpx

from . import attacks, grid, keys
from .client import AuthClient, TransportError
from .clock import MockClock, SystemClock, day_of_month
from .service import create_app
from .store import (
    AccountStore,
    DuplicateUsernameError,
    StoreKey,
    StoreError,
    UsernameValidationError,
)

EXIT_OK = 0
EXIT_AUTH_FAILED = 1
EXIT_CONFIG = 2
EXIT_LOCKED = 3
EXIT_TRANSPORT = 4

_SELFTEST_LAYOUT_CHECKS = 1000


def _load_store_key(value: str | None) -> StoreKey:
    if not value:
        raise click.UsageError(
            "store key is required: pass --store-key or set GRIDAUTH_STORE_KEY "
            "(32 hex characters)"
        )
    try:
        return StoreKey.from_hex(value)
    except ValueError as exc:
        raise click.UsageError(str(exc))


@click.group()
@click.version_option(package_name="gridauth")
def main():
    """Image-grid password authentication service and tooling."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option(
    "--store",
    "store_path",
    envvar="GRIDAUTH_STORE_PATH",
    default="./users.db",
    show_default=True,
    help="account store file [env: GRIDAUTH_STORE_PATH]",
)
@click.option(
    "--store-key",
    envvar="GRIDAUTH_STORE_KEY",
    default=None,
    help="128-bit store key, 32 hex chars [env: GRIDAUTH_STORE_KEY]",
)
@click.option("--lockout-threshold", default=5, show_default=True, type=int)
@click.option("--lockout-window", default=1800, show_default=True, type=int, help="seconds")
@click.option("--session-ttl", default=120, show_default=True, type=int, help="seconds")
@click.option("--timezone", "tz", default="UTC", show_default=True)
@click.option("--ui-dir", default=None, help="serve a static web client from this directory")
def serve(host, port, store_path, store_key, lockout_threshold, lockout_window, session_ttl, tz, ui_dir):
    """Run the authentication service until interrupted."""
    import uvicorn

    key = _load_store_key(store_key)
    store = AccountStore(
        store_path,
        key,
        clock=SystemClock(tz),
        lockout_threshold=lockout_threshold,
        lockout_window_seconds=lockout_window,
    )
    app = create_app(store, session_ttl_seconds=session_ttl, ui_dir=ui_dir)
    click.echo(f"gridauth: serving on http://{host}:{port} (store: {store_path})")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except SystemExit:
        raise
    except OSError as exc:
        raise click.UsageError(f"cannot bind {host}:{port}: {exc}")
    finally:
        store.close()


@main.command()
@click.argument("username")
@click.option(
    "--store",
    "store_path",
    envvar="GRIDAUTH_STORE_PATH",
    default="./users.db",
    show_default=True,
)
@click.option("--store-key", envvar="GRIDAUTH_STORE_KEY", default=None)
def register(username, store_path, store_key):
    """Create an account and print its generated key (shown only once)."""
    key = _load_store_key(store_key)
    try:
        store = AccountStore(store_path, key)
    except StoreError as exc:
        raise click.UsageError(str(exc))
    try:
        key_number = store.register(username)
    except UsernameValidationError as exc:
        raise click.UsageError(str(exc))
    except DuplicateUsernameError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_AUTH_FAILED)
    finally:
        store.close()
    click.echo(key_number.render())


@main.command()
@click.argument("username")
@click.option("--key", "key_text", required=True, help="the 4-digit key")
@click.option("--ssr", is_flag=True, help="enter the day-shifted form of the key")
@click.option("--base-url", default="http://127.0.0.1:8080", show_default=True)
@click.option("--timezone", "tz", default="UTC", show_default=True, help="must match the server")
def login(username, key_text, ssr, base_url, tz):
    """Headless login: clicks through the grid challenge for USERNAME."""
    try:
        key = keys.KeyNumber.parse(key_text)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    entered = keys.encode_ssr(key, day_of_month(SystemClock(tz))) if ssr else key
    try:
        with httpx.Client(base_url=base_url, timeout=10.0) as http:
            outcome = AuthClient(http).login(username, entered)
    except TransportError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT)
    if outcome.status == "succeeded":
        click.echo("login succeeded")
        sys.exit(EXIT_OK)
    if outcome.status == "locked":
        click.echo(f"account locked, retry after {outcome.retry_after_seconds} s", err=True)
        sys.exit(EXIT_LOCKED)
    click.echo("login failed", err=True)
    sys.exit(EXIT_AUTH_FAILED)


def run_selftest(
    out: IO[str],
    decode: Callable[[keys.KeyNumber, int], keys.KeyNumber] = keys.decode_ssr,
    layout_checks: int = _SELFTEST_LAYOUT_CHECKS,
) -> int:
    """Exhaustive key round-trip plus layout composition checks.

    Returns 0 when clean; on the first counterexample prints it and
    returns 1.  ``decode`` is injectable so the detector itself can be
    tested against a corrupted implementation.
    """
    cases = 0
    for day in range(1, 32):
        for value in range(keys.KEYSPACE):
            key = keys.KeyNumber.from_int(value)
            if decode(keys.encode_ssr(key, day), day) != key:
                out.write(f"FAIL round-trip: key={key} day={day}\n")
                return 1
            cases += 1
    out.write(f"round-trip cases: {cases} ok\n")
    for i in range(layout_checks):
        layout = grid.generate_layout()
        try:
            layout.validate()
            for digit in range(10):
                copies = sum(
                    1
                    for row in range(1, grid.GRID_SIZE)
                    for col in range(grid.GRID_SIZE)
                    if layout.cells[row][col] == layout.header[digit]
                )
                if copies != grid.COPIES_PER_IMAGE - 1:
                    raise ValueError(f"digit {digit} has {copies} clickable copies")
        except ValueError as exc:
            out.write(f"FAIL layout check {i}: {exc}\n")
            return 1
    out.write(f"layout checks: {layout_checks} ok\n")
    return 0


@main.command()
def selftest():
    """Run the exhaustive in-process consistency checks."""
    sys.exit(run_selftest(sys.stdout))


@main.group()
def simulate():
    """Attack simulations."""


_MODEL_CHOICES = {
    "click-only": attacks.ObserverMode.CLICK_ONLY,
    "full-snapshot": attacks.ObserverMode.FULL_SNAPSHOT,
    "k-cell": attacks.ObserverMode.K_CELL_RECALL,
}


@simulate.command("observer")
@click.option("--model", required=True, type=click.Choice(sorted(_MODEL_CHOICES)))
@click.option("--k", default=0, show_default=True, type=int, help="cells memorized (k-cell)")
@click.option("--trials", default=100_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="write CSV here")
def simulate_observer(model, k, trials, seed, output):
    """Shoulder-surfing observer trials; CSV to stdout or --output."""
    if trials < 1:
        raise click.UsageError("--trials must be positive")
    if k < 0:
        raise click.UsageError("--k must be non-negative")
    observer = attacks.ObserverModel(_MODEL_CHOICES[model], k=k)
    result = attacks.run_observer_trials(observer, trials, seed)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            attacks.write_csv([result], fh)
        click.echo(attacks.render_table([result]))
    else:
        attacks.write_csv([result], sys.stdout)


@simulate.command("bruteforce")
@click.option("--guesses", default=12, show_default=True, type=int, help="wrong guesses to try")
@click.option("--include-key", is_flag=True, help="append the true key so the run ends in success")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--lockout-threshold", default=5, show_default=True, type=int)
@click.option("--lockout-window", default=1800, show_default=True, type=int, help="seconds")
def simulate_bruteforce(guesses, include_key, seed, lockout_threshold, lockout_window):
    """Brute-force pacing under lockout, on an in-process service with a
    mock clock (model time, not wall time)."""
    from fastapi.testclient import TestClient

    if guesses < 1:
        raise click.UsageError("--guesses must be positive")
    clock = MockClock(datetime(2024, 5, 16, 12, 0, tzinfo=timezone.utc))
    with tempfile.NamedTemporaryFile(suffix=".db") as tmp:
        store = AccountStore(
            tmp.name,
            StoreKey.generate(),
            clock=clock,
            lockout_threshold=lockout_threshold,
            lockout_window_seconds=lockout_window,
        )
        true_key = store.register("victim", random.Random(seed))
        plan = [keys.KeyNumber.from_int(v) for v in range(guesses)]
        if include_key and true_key not in plan:
            plan.append(true_key)
        with TestClient(create_app(store)) as http:
            report = attacks.bruteforce_attack(AuthClient(http), "victim", plan, clock)
    click.echo(attacks.render_bruteforce(report, lockout_threshold, lockout_window))


if __name__ == "__main__":
    main()
