"""Layout composition, click resolution, and reshuffle behavior."""

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridauth.grid import (
    COPIES_PER_IMAGE,
    GRID_SIZE,
    HEADER_SIZE,
    IMAGE_COUNT,
    ClickKind,
    GridLayout,
    generate_layout,
    reshuffle_after_click,
    resolve_click,
)


def assert_composition(layout):
    """Counting oracle for the layout invariants."""
    assert len(layout.header) == HEADER_SIZE
    assert len(set(layout.header)) == HEADER_SIZE
    assert layout.cells[0] == layout.header
    flat = [image_id for row in layout.cells for image_id in row]
    assert Counter(flat) == {i: COPIES_PER_IMAGE for i in range(IMAGE_COUNT)}
    below = Counter(
        layout.cells[row][col] for row in range(1, GRID_SIZE) for col in range(GRID_SIZE)
    )
    for image_id in range(IMAGE_COUNT):
        expected = COPIES_PER_IMAGE - 1 if image_id in layout.header else COPIES_PER_IMAGE
        assert below[image_id] == expected, image_id


class TestGenerateLayout:
    def test_composition_invariants_hold(self, rng):
        for _ in range(200):
            assert_composition(generate_layout(rng))

    def test_validate_agrees_with_oracle(self, rng):
        layout = generate_layout(rng)
        layout.validate()
        assert_composition(layout)

    def test_default_entropy_source_works(self):
        assert_composition(generate_layout())

    def test_header_membership_frequency(self):
        # Each of the 25 ids should head 10/25 = 40% of layouts.
        rng = random.Random(424242)
        n = 10_000
        seen = Counter()
        for _ in range(n):
            seen.update(generate_layout(rng).header)
        for image_id in range(IMAGE_COUNT):
            assert abs(seen[image_id] / n - 0.4) <= 0.02, image_id

    def test_every_digit_has_three_clickable_copies(self, rng):
        layout = generate_layout(rng)
        for digit in range(HEADER_SIZE):
            copies = [
                (row, col)
                for row in range(1, GRID_SIZE)
                for col in range(GRID_SIZE)
                if layout.cells[row][col] == layout.header[digit]
            ]
            assert len(copies) == COPIES_PER_IMAGE - 1


class TestResolveClick:
    def test_header_row_is_inert(self, rng):
        layout = generate_layout(rng)
        for col in range(GRID_SIZE):
            assert resolve_click(layout, 0, col).kind is ClickKind.HEADER_CELL

    def test_pass_copy_resolves_to_header_index(self, rng):
        layout = generate_layout(rng)
        wanted = layout.header[6]
        row, col = next(
            (r, c)
            for r in range(1, GRID_SIZE)
            for c in range(GRID_SIZE)
            if layout.cells[r][c] == wanted
        )
        result = resolve_click(layout, row, col)
        assert result.kind is ClickKind.DIGIT
        assert result.value == 6

    def test_non_header_image_is_garbage(self, rng):
        layout = generate_layout(rng)
        in_header = set(layout.header)
        row, col = next(
            (r, c)
            for r in range(1, GRID_SIZE)
            for c in range(GRID_SIZE)
            if layout.cells[r][c] not in in_header
        )
        result = resolve_click(layout, row, col)
        assert result.kind is ClickKind.GARBAGE
        assert result.value is None

    @pytest.mark.parametrize("row,col", [(-1, 0), (0, -1), (10, 0), (0, 10), (100, 100)])
    def test_out_of_range_raises(self, rng, row, col):
        with pytest.raises(ValueError):
            resolve_click(generate_layout(rng), row, col)

    def test_non_integer_coordinates_raise(self, rng):
        layout = generate_layout(rng)
        with pytest.raises(ValueError):
            resolve_click(layout, "1", 1)
        with pytest.raises(ValueError):
            resolve_click(layout, True, 1)

    def test_pure_function(self, rng):
        layout = generate_layout(rng)
        assert resolve_click(layout, 5, 5) == resolve_click(layout, 5, 5)

    @settings(max_examples=20)
    @given(seed=st.integers(0, 2**32), row=st.integers(1, 9), col=st.integers(0, 9))
    def test_every_clickable_cell_resolves(self, seed, row, col):
        layout = generate_layout(random.Random(seed))
        result = resolve_click(layout, row, col)
        assert result.kind in (ClickKind.DIGIT, ClickKind.GARBAGE)
        if result.kind is ClickKind.DIGIT:
            assert layout.header[result.value] == layout.cells[row][col]


class TestReshuffle:
    def test_same_contract_as_generate(self, rng):
        assert_composition(reshuffle_after_click(rng))

    def test_consecutive_layouts_differ(self, rng):
        # Equal draws have probability < 1e-6; over 1000 pairs none may match.
        for _ in range(1000):
            assert generate_layout(rng) != reshuffle_after_click(rng)


class TestWireFormat:
    def test_round_trip(self, rng):
        layout = generate_layout(rng)
        wire = layout.to_wire()
        assert sorted(wire) == ["cells", "header"]
        assert len(wire["header"]) == 10
        assert len(wire["cells"]) == 10 and all(len(r) == 10 for r in wire["cells"])
        assert GridLayout.from_wire(wire) == layout

    def test_from_wire_validates(self):
        with pytest.raises(ValueError):
            GridLayout.from_wire({"header": [0] * 10, "cells": [[0] * 10] * 10})


class TestValidate:
    def test_rejects_duplicate_header(self, rng):
        layout = generate_layout(rng)
        bad = GridLayout(header=(0,) * 10, cells=layout.cells)
        with pytest.raises(ValueError):
            bad.validate()

    def test_rejects_row0_header_mismatch(self, rng):
        layout = generate_layout(rng)
        rotated = tuple(layout.header[1:] + layout.header[:1])
        bad = GridLayout(header=rotated, cells=layout.cells)
        with pytest.raises(ValueError):
            bad.validate()

    def test_rejects_wrong_multiset(self, rng):
        layout = generate_layout(rng)
        cells = [list(row) for row in layout.cells]
        cells[5][5] = (cells[5][5] + 1) % 25  # one id gains a copy, one loses
        bad = GridLayout(header=layout.header, cells=tuple(tuple(r) for r in cells))
        with pytest.raises(ValueError):
            bad.validate()
