"""Balanced-bracket scans along rays.

All pairing maps in this package are instances of one primitive: walk the
sites ``start * a**(d*m)`` for m = 0, 1, 2, ..., counting "opening" and
"closing" sites over the closed interval scanned so far, and stop at the
first step m >= 1 that is a closing site with equal counts.  The walk is
a first-return problem, almost surely finite but heavy-tailed, so every
scan carries an explicit site budget and processes sites in vectorised
chunks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ScanBudgetExceeded

CHUNK = 512

# fetch(lo, hi) -> (closing_mask, opening_mask, tracked_mask) for steps
# [lo, hi); tracked_mask feeds the run-start bookkeeping some callers need
MaskFetch = Callable[[int, int], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ScanHit:
    """Outcome of a balanced scan.

    steps: displacement m of the matching site (always >= 1).
    tracked_count: tracked sites in the closed interval [0, m].
    tracked_last: largest step <= m whose site is tracked, or None.
    """

    steps: int
    tracked_count: int
    tracked_last: int | None


def balanced_match(fetch: MaskFetch, budget: int, origin, direction: int) -> ScanHit:
    """First step m >= 1 that closes with balanced counts over [0, m]."""
    carry = 0
    tracked = 0
    tracked_last: int | None = None
    lo = 0
    while lo <= budget:
        hi = min(lo + CHUNK, budget + 1)
        closing, opening, track = fetch(lo, hi)
        balance = carry + np.cumsum(
            opening.astype(np.int64) - closing.astype(np.int64)
        )
        candidates = closing & (balance == 0)
        if lo == 0:
            candidates[0] = False  # the start site never matches itself
        hits = np.flatnonzero(candidates)
        if hits.size:
            idx = int(hits[0])
            prefix = track[: idx + 1]
            tracked += int(prefix.sum())
            nz = np.flatnonzero(prefix)
            if nz.size:
                tracked_last = lo + int(nz[-1])
            return ScanHit(lo + idx, tracked, tracked_last)
        tracked += int(track.sum())
        nz = np.flatnonzero(track)
        if nz.size:
            tracked_last = lo + int(nz[-1])
        carry = int(balance[-1])
        lo = hi
    raise ScanBudgetExceeded(origin, direction, budget)


def first_hit(fetch: Callable[[int, int], np.ndarray], budget: int, origin, direction: int) -> int:
    """First step m >= 1 whose mask entry is true."""
    lo = 0
    while lo <= budget:
        hi = min(lo + CHUNK, budget + 1)
        mask = fetch(lo, hi)
        if lo == 0:
            mask = mask.copy()
            mask[0] = False
        hits = np.flatnonzero(mask)
        if hits.size:
            return lo + int(hits[0])
        lo = hi
    raise ScanBudgetExceeded(origin, direction, budget)


def directed_range(lo: int, hi: int, direction: int) -> tuple[int, int]:
    """Map step range [lo, hi) to the ray-offset range it covers.

    For direction -1 the returned range is ascending; callers reverse the
    fetched arrays so index 0 corresponds to step ``lo``.
    """
    if direction == 1:
        return lo, hi
    return 1 - hi, 1 - lo
