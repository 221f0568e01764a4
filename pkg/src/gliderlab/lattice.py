"""Finite windows of infinite 1D lattice configurations.

A Configuration stores a sampled window of cells together with the interval
of coordinates whose values are guaranteed to agree with the corresponding
infinite-lattice evolution (the "exact region").  Stepping a radius-r rule
shrinks the exact region, so statistics read off the exact region are free
of boundary artifacts: no periodic wrap, no padding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import zlib

import numpy as np


@dataclass(frozen=True)
class Alphabet:
    """Finite alphabet; symbols are 0..size-1, with optional display names."""

    size: int
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet must have at least one symbol")
        if self.names is not None and len(self.names) != self.size:
            raise ValueError("names must match alphabet size")

    def name(self, s: int) -> str:
        return self.names[s] if self.names is not None else str(s)

    def word_str(self, word) -> str:
        return ".".join(self.name(int(s)) for s in word)


#: alphabet {-1, 0, +1} used by gliders automata; symbol code = value + 1
GLIDER_ALPHABET = Alphabet(3, ("-1", "0", "+1"))

BINARY = Alphabet(2)


def rng_stream(master_seed: int, *key) -> np.random.Generator:
    """Counter-based generator for stream `key` split off `master_seed`.

    Key parts may be ints or short strings (hashed stably).  Distinct keys
    give independent streams; the split is deterministic and does not
    depend on draw order or thread scheduling.
    """
    parts = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k)
                  for k in key)
    ss = np.random.SeedSequence(master_seed, spawn_key=parts)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Configuration:
    """A finite window of an infinite configuration.

    cells[i] is the symbol at lattice coordinate origin + i.  Coordinates in
    [exact_lo, exact_hi] (inclusive) are exact for the process being tracked.
    """

    alphabet: Alphabet
    cells: np.ndarray
    origin: int
    exact_lo: int
    exact_hi: int

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        if cells.ndim != 1:
            raise ValueError("cells must be 1-dimensional")
        if cells.size and int(cells.max()) >= self.alphabet.size:
            raise ValueError("cell value outside alphabet")
        if not (self.origin <= self.exact_lo <= self.exact_hi <= self.end):
            raise ValueError("exact region must lie inside the window")

    @property
    def end(self) -> int:
        """Coordinate of the last cell in the window."""
        return self.origin + len(self.cells) - 1

    @property
    def exact_width(self) -> int:
        return self.exact_hi - self.exact_lo + 1

    def __getitem__(self, coord: int) -> int:
        return int(self.cells[coord - self.origin])

    def exact_cells(self) -> np.ndarray:
        """Values over the exact region (read-only view)."""
        a = self.exact_lo - self.origin
        return self.cells[a : self.exact_hi - self.origin + 1]

    def shrink_exact(self, left: int, right: int) -> "Configuration":
        """Return the same window with the exact region shrunk by (left, right)."""
        if left < 0 or right < 0:
            raise ValueError("shrink amounts must be nonnegative")
        lo, hi = self.exact_lo + left, self.exact_hi - right
        if lo > hi:
            raise ValueError("exact region exhausted")
        return Configuration(self.alphabet, self.cells, self.origin, lo, hi)


def from_word(alphabet: Alphabet, word, origin: int = 0) -> Configuration:
    """Configuration whose window is `word`, all of it exact."""
    cells = np.asarray(list(word), dtype=np.uint8)
    return Configuration(alphabet, cells, origin, origin, origin + len(cells) - 1)


def window_sample(measure, n_cells: int, margin: int, rng: np.random.Generator,
                  origin: int = 0) -> Configuration:
    """Sample n_cells + 2*margin cells from `measure`.

    The exact region is the central n_cells (coordinates origin..origin+n-1);
    the margins feed the light cone of later steps.
    """
    if n_cells < 1 or margin < 0:
        raise ValueError("need n_cells >= 1 and margin >= 0")
    cells = measure.sample_cells(n_cells + 2 * margin, rng)
    return Configuration(measure.alphabet, cells, origin - margin,
                         origin, origin + n_cells - 1)


def _as_word_array(pattern) -> np.ndarray:
    if isinstance(pattern, str):
        return np.asarray([int(ch) for ch in pattern], dtype=np.uint8)
    return np.asarray(list(pattern), dtype=np.uint8)


def count_occurrences(pattern, c: Configuration) -> tuple[int, int]:
    """(number of occurrences, number of admissible positions) of `pattern`
    with its left end ranging over positions that keep it inside the exact
    region."""
    w = _as_word_array(pattern)
    m = len(w)
    positions = c.exact_width - m + 1
    if positions < 1:
        raise ValueError("pattern does not fit inside the exact region")
    seg = c.exact_cells()
    hits = np.ones(positions, dtype=bool)
    for j in range(m):
        hits &= seg[j : j + positions] == w[j]
    return int(hits.sum()), positions


def freq(pattern, c: Configuration) -> Fraction:
    """Empirical frequency of a pattern (or a set of equal-length patterns)
    over the exact region; exact rational."""
    if isinstance(pattern, (set, frozenset, list)) and not isinstance(pattern, str):
        pats = [_as_word_array(p) for p in pattern]
        if len({len(p) for p in pats}) > 1:
            raise ValueError("patterns in a set must share one length")
        total, positions = 0, None
        for p in pats:
            h, positions = count_occurrences(p, c)
            total += h
        return Fraction(total, positions)
    hits, positions = count_occurrences(pattern, c)
    return Fraction(hits, positions)
