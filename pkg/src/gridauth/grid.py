"""The 10x10 image-grid challenge.

A layout is built from 25 distinct images, 4 copies each (100 cells).
Row 0 is the header: 10 distinct images whose left-to-right positions
define the digit values 0-9.  Rows 1-9 hold the remaining copies; a click
on a copy of header image i enters digit i, a click on any of the 15
non-header images (or their copies) is a garbage value, and row 0 itself
is not clickable.  The whole layout, header included, is regenerated
after every accepted click, so a layout is only ever interpreted once.

Layouts are immutable values; all functions are pure given their rng.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

IMAGE_COUNT = 25
COPIES_PER_IMAGE = 4
GRID_SIZE = 10
HEADER_SIZE = 10

_ALL_IMAGE_IDS = range(IMAGE_COUNT)


class ClickKind(Enum):
    DIGIT = "digit"
    GARBAGE = "garbage"
    HEADER_CELL = "header_cell"


@dataclass(frozen=True, slots=True)
class ClickResult:
    kind: ClickKind
    value: int | None = None

    def __post_init__(self):
        if (self.kind is ClickKind.DIGIT) != (self.value is not None):
            raise ValueError("value is present iff the click resolves to a digit")


@dataclass(frozen=True, slots=True)
class GridLayout:
    """One challenge instance: header row plus the full cell matrix.

    ``header`` is row 0 left to right; ``cells`` is the 10x10 matrix in
    row-major order with ``cells[0] == header``.
    """

    header: tuple[int, ...]
    cells: tuple[tuple[int, ...], ...]

    def validate(self) -> None:
        """Check all composition invariants; raises ValueError on violation."""
        if len(self.header) != HEADER_SIZE or len(set(self.header)) != HEADER_SIZE:
            raise ValueError("header must hold 10 distinct image ids")
        if len(self.cells) != GRID_SIZE or any(len(row) != GRID_SIZE for row in self.cells):
            raise ValueError("cells must be a 10x10 matrix")
        if self.cells[0] != self.header:
            raise ValueError("row 0 must equal the header")
        counts = [0] * IMAGE_COUNT
        for row in self.cells:
            for image_id in row:
                if not 0 <= image_id < IMAGE_COUNT:
                    raise ValueError(f"image id out of range: {image_id}")
                counts[image_id] += 1
        if any(c != COPIES_PER_IMAGE for c in counts):
            raise ValueError("every image id must appear exactly 4 times")

    def to_wire(self) -> dict:
        """JSON-ready form: header as 10 ints, cells as 10 rows of 10 ints."""
        return {"header": list(self.header), "cells": [list(row) for row in self.cells]}

    @classmethod
    def from_wire(cls, payload: dict) -> "GridLayout":
        layout = cls(
            header=tuple(payload["header"]),
            cells=tuple(tuple(row) for row in payload["cells"]),
        )
        layout.validate()
        return layout


def generate_layout(rng: random.Random | None = None) -> GridLayout:
    """Draw a fresh layout uniformly over valid arrangements.

    Header: 10 of the 25 ids, sampled without replacement.  Rows 1-9: the
    90-cell multiset (3 remaining copies of each header id, 4 copies of
    each other id) under an unbiased shuffle.
    """
    rng = rng if rng is not None else random.SystemRandom()
    header = tuple(rng.sample(_ALL_IMAGE_IDS, HEADER_SIZE))
    in_header = set(header)
    pool = list(header) * (COPIES_PER_IMAGE - 1)
    pool += [i for i in _ALL_IMAGE_IDS if i not in in_header] * COPIES_PER_IMAGE
    rng.shuffle(pool)
    cells = (header,) + tuple(
        tuple(pool[i : i + GRID_SIZE]) for i in range(0, len(pool), GRID_SIZE)
    )
    return GridLayout(header=header, cells=cells)


def reshuffle_after_click(rng: random.Random | None = None) -> GridLayout:
    """Replacement layout issued after every accepted click.

    An independent draw with the same distribution as
    :func:`generate_layout`; no digit-to-image association survives.
    """
    return generate_layout(rng)


def resolve_click(layout: GridLayout, row: int, col: int) -> ClickResult:
    """Interpret a click against the layout that was on screen.

    Row 0 is inert; elsewhere, a copy of header image i resolves to
    digit i and any non-header image is garbage.
    """
    if not (isinstance(row, int) and isinstance(col, int)) or isinstance(row, bool) or isinstance(col, bool):
        raise ValueError("row and col must be integers")
    if not (0 <= row < GRID_SIZE and 0 <= col < GRID_SIZE):
        raise ValueError(f"click out of range: ({row}, {col})")
    if row == 0:
        return ClickResult(ClickKind.HEADER_CELL)
    image_id = layout.cells[row][col]
    try:
        return ClickResult(ClickKind.DIGIT, layout.header.index(image_id))
    except ValueError:
        return ClickResult(ClickKind.GARBAGE)
