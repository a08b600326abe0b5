"""Monte-Carlo evaluation of the scheme's resistance claims.

Shoulder-surfing is modeled as an observer with bounded memory watching a
legitimate login:

* ``full_snapshot``  — perfect recall of every layout and click; decodes
  the key exactly.  This is the honest ceiling: the scheme hides nothing
  from unbounded memory, its resistance comes from recall limits.
* ``click_only``     — retains click coordinates only.  The reshuffle
  destroys the coordinate-to-digit mapping, so this floor equals blind
  guessing, (1/10)^4.
* ``k_cell_recall``  — per click, remembers the clicked cell's image and
  k uniformly chosen header cells; decodes a digit only when the matching
  header cell was memorized, guesses otherwise.

Brute-force against the live click API is measured in model time under
the lockout policy via an injectable mock clock.

Trials are seeded per-trial, so results are reproducible regardless of
scheduling, and legitimate-user clicks are uniform among the 3 candidate
copies (a human may well bias toward nearer cells; reports should read
these numbers as the unbiased baseline).
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Sequence

from .client import AuthClient
from .grid import GRID_SIZE, HEADER_SIZE, GridLayout, generate_layout, resolve_click
from .keys import KEY_LENGTH, KeyNumber, generate_key

Z_95 = 1.959963984540054


class ObserverMode(Enum):
    FULL_SNAPSHOT = "full_snapshot"
    CLICK_ONLY = "click_only"
    K_CELL_RECALL = "k_cell_recall"


@dataclass(frozen=True, slots=True)
class ObserverModel:
    mode: ObserverMode
    k: int = 0  # header cells memorized per step, k_cell_recall only

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")


@dataclass(frozen=True, slots=True)
class TraceStep:
    layout: GridLayout
    click: tuple[int, int]


@dataclass(frozen=True, slots=True)
class LoginTrace:
    steps: tuple[TraceStep, ...]


def simulate_login_trace(key: KeyNumber, rng: random.Random) -> LoginTrace:
    """One legitimate login: for each key digit, a fresh layout and a
    uniform choice among the 3 cells that resolve to that digit."""
    steps = []
    for digit in key.digits:
        layout = generate_layout(rng)
        wanted = layout.header[digit]
        candidates = [
            (row, col)
            for row in range(1, GRID_SIZE)
            for col in range(GRID_SIZE)
            if layout.cells[row][col] == wanted
        ]
        steps.append(TraceStep(layout=layout, click=rng.choice(candidates)))
    return LoginTrace(steps=tuple(steps))


def replay_trace(trace: LoginTrace) -> KeyNumber:
    """Digits the service would resolve from the trace (sanity check)."""
    digits = []
    for step in trace.steps:
        result = resolve_click(step.layout, *step.click)
        if result.value is None:
            raise ValueError("trace click does not resolve to a digit")
        digits.append(result.value)
    return KeyNumber(tuple(digits))


def observer_attack(
    trace: LoginTrace, model: ObserverModel, rng: random.Random
) -> KeyNumber:
    """The observer's best guess at the key after watching one login."""
    guessed = []
    for step in trace.steps:
        row, col = step.click
        clicked_image = step.layout.cells[row][col]
        if model.mode is ObserverMode.FULL_SNAPSHOT:
            guessed.append(step.layout.header.index(clicked_image))
        elif model.mode is ObserverMode.CLICK_ONLY:
            # Coordinates carry no digit information once the grid reshuffles.
            guessed.append(rng.randrange(10))
        else:
            memorized = rng.sample(range(HEADER_SIZE), min(model.k, HEADER_SIZE))
            digit = next(
                (pos for pos in memorized if step.layout.header[pos] == clicked_image),
                None,
            )
            guessed.append(digit if digit is not None else rng.randrange(10))
    return KeyNumber(tuple(guessed))


def analytic_success_rate(model: ObserverModel) -> float:
    """Closed-form success probability for one observed login."""
    if model.mode is ObserverMode.FULL_SNAPSHOT:
        return 1.0
    if model.mode is ObserverMode.CLICK_ONLY:
        return 0.1**KEY_LENGTH
    recall = min(model.k, HEADER_SIZE) / HEADER_SIZE
    per_digit = recall + (1.0 - recall) * 0.1
    return per_digit**KEY_LENGTH


@dataclass(frozen=True, slots=True)
class ObserverResult:
    model: ObserverModel
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def confidence_interval(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)


def run_observer_trials(model: ObserverModel, trials: int, seed: int) -> ObserverResult:
    """Independent observed logins with a random key per trial.

    Each trial owns its own generator derived from (seed, index).
    """
    successes = 0
    for index in range(trials):
        rng = random.Random(f"{seed}:{index}")
        key = generate_key(rng)
        trace = simulate_login_trace(key, rng)
        if observer_attack(trace, model, rng) == key:
            successes += 1
    return ObserverResult(model=model, trials=trials, successes=successes)


def wilson_interval(successes: int, trials: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval; gives a nonzero upper bound at 0 successes."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return (max(0.0, centre - half), min(1.0, centre + half))


# -- brute force against the click API -------------------------------------


@dataclass(frozen=True, slots=True)
class BruteforceReport:
    attempts: int
    lockouts_hit: int
    success: bool
    elapsed_model_seconds: float


def bruteforce_attack(
    client: AuthClient,
    username: str,
    guesses: Iterable[KeyNumber],
    clock,
) -> BruteforceReport:
    """Drive sequential guesses through the click API under lockout.

    On a locked response the model clock advances past the lockout window
    and the same guess is retried.  With threshold t and window w, at
    most t verification attempts fit per window, so covering the whole
    keyspace costs (10000/t) * w of model time.
    """
    attempts = 0
    lockouts = 0
    success = False
    started = clock.now()
    for guess in guesses:
        outcome = client.login(username, guess)
        while outcome.status == "locked":
            lockouts += 1
            clock.advance(outcome.retry_after_seconds or 1)
            outcome = client.login(username, guess)
        attempts += 1
        if outcome.status == "succeeded":
            success = True
            break
    elapsed = (clock.now() - started).total_seconds()
    return BruteforceReport(
        attempts=attempts,
        lockouts_hit=lockouts,
        success=success,
        elapsed_model_seconds=elapsed,
    )


def exhaustive_guesses(start: int = 0) -> Iterable[KeyNumber]:
    """Every key from ``start`` upward, in numeric order."""
    for value in range(start, 10**KEY_LENGTH):
        yield KeyNumber.from_int(value)


# -- reporting --------------------------------------------------------------

CSV_FIELDS = ("model", "k", "trials", "successes", "rate", "ci_low", "ci_high")


def _result_row(result: ObserverResult) -> dict:
    low, high = result.confidence_interval
    uses_k = result.model.mode is ObserverMode.K_CELL_RECALL
    return {
        "model": result.model.mode.value,
        "k": result.model.k if uses_k else "",
        "trials": result.trials,
        "successes": result.successes,
        "rate": f"{result.rate:.8f}",
        "ci_low": f"{low:.8f}",
        "ci_high": f"{high:.8f}",
    }


def write_csv(results: Sequence[ObserverResult], out: IO[str]) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerow(_result_row(result))


def render_table(results: Sequence[ObserverResult]) -> str:
    """Fixed-width text summary of observer runs."""
    lines = [
        f"{'model':<16} {'k':>3} {'trials':>8} {'successes':>9} "
        f"{'rate':>10} {'ci_low':>10} {'ci_high':>10}"
    ]
    for result in results:
        row = _result_row(result)
        lines.append(
            f"{row['model']:<16} {str(row['k']):>3} {row['trials']:>8} "
            f"{row['successes']:>9} {row['rate']:>10} {row['ci_low']:>10} {row['ci_high']:>10}"
        )
    return "\n".join(lines)


def render_bruteforce(report: BruteforceReport, threshold: int, window_seconds: int) -> str:
    keyspace = 10**KEY_LENGTH
    expected = keyspace / threshold * window_seconds
    return "\n".join(
        (
            f"attempts             {report.attempts}",
            f"lockouts_hit         {report.lockouts_hit}",
            f"success              {str(report.success).lower()}",
            f"elapsed_model_hours  {report.elapsed_model_seconds / 3600:.2f}",
            f"keyspace_cover_hours {expected / 3600:.2f} "
            f"(= {keyspace}/{threshold} windows of {window_seconds} s)",
        )
    )
