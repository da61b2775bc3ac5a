"""Exception types shared across the package."""

from __future__ import annotations


class ScanBudgetExceeded(RuntimeError):
    """A pairing scan ran past its site budget before finding a partner.

    This signals either an astronomically unlikely sample or a budget that
    is too small for the requested statistics; it never means the scan was
    silently truncated.  Harnesses count these as aborted trials.
    """

    def __init__(self, origin, direction: int, budget: int):
        self.origin = origin
        self.direction = direction
        self.budget = budget
        word = str(origin)
        if len(word) > 60:
            word = word[:57] + "..."
        arrow = {1: "+", -1: "-", 0: "?"}.get(direction, "?")
        super().__init__(
            f"scan budget {budget} exhausted at {word!r} (direction {arrow})"
        )


class ActionabilityError(RuntimeError):
    """A traversal step found zero or several edges with the required label."""

    def __init__(self, vertex, letter: str, found: int):
        self.vertex = vertex
        self.letter = letter
        self.found = found
        super().__init__(
            f"vertex {vertex!r} has {found} edges labelled {letter!r}; expected exactly 1"
        )


class DegreeCapExceeded(RuntimeError):
    """Ball materialisation met a vertex with more neighbours than allowed."""


class InvalidSiteError(ValueError):
    """A list-valued configuration was indexed outside its recorded entries,
    or violated the structural invariants the inverse construction needs."""


class WitnessSearchError(RuntimeError):
    """No (or no unique) group element reproduced the shifted image on the
    comparison window; the cap is too small or the construction is broken."""
