"""The tree-contraction stable orbit equivalence.

Start from a pair configuration y whose first coordinate is uniform and
equals the marked symbol 1 at the root.  The 1-sites cut each a-ray into
runs; contracting every run to a single vertex and re-aiming the b-edges
through the per-symbol pairings yields an actionable tree whose edge
labels are the symbols 0..|K|, i.e. a free group of rank |K|+1 acts.  The
vertex labels are the finite runs themselves ("run labels"), and reading
them along tree traversals defines the equivalence.  The inverse steps
through list positions of the run labels and undoes the pairings.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .configs import MeasureSpec, shifted
from .errors import InvalidSiteError, ScanBudgetExceeded, WitnessSearchError
from .network import RootedNetwork
from .rewiring import DEFAULT_BUDGET
from .scanning import balanced_match, directed_range, first_hit
from .words import GeneratorSet, Word, enumerate_ball, tree_generators

RunLabel = tuple[tuple[int, int], ...]


def _require_uniform_pair(y) -> None:
    if y.measure.kind != "pair":
        raise ValueError("this construction needs a pair-kind configuration")
    if not y.measure.is_uniform():
        raise ValueError("this construction is only valid for a uniform base law")


def symbol_partner(y, g: Word, k: int, budget: int = DEFAULT_BUDGET) -> Word:
    """Partner of g under the pairing for symbol k.

    Sites whose first coordinate is 1 open, sites equal to k close; the
    partner is the nearest site in the scan direction with the opposite
    role and balanced counts of 1s and ks over the closed interval.  For
    k = 1 or when g plays neither role the site is its own partner.  An
    involution for every k.
    """
    if y.measure.kind != "pair":
        raise ValueError("the symbol pairing needs a pair-kind configuration")
    if not 1 <= k <= y.alphabet.size:
        raise ValueError(f"symbol {k} outside the alphabet")
    if k == 1:
        return g
    v1 = y.value_at(g)[0]
    if v1 not in (1, k):
        return g
    direction = 1 if v1 == 1 else -1
    target = k if v1 == 1 else 1
    ray = y.ray(g)

    def fetch(lo: int, hi: int):
        o_lo, o_hi = directed_range(lo, hi, direction)
        f = ray.firsts(o_lo, o_hi)
        if direction < 0:
            f = f[::-1]
        return f == target, f == v1, f == 1

    hit = balanced_match(fetch, budget, g, direction)
    return g * g.gens.generator_power(0, direction * hit.steps)


def run_label(y, g: Word, budget: int = DEFAULT_BUDGET) -> RunLabel:
    """The run starting at the 1-site g: the pair values along g, g*a, ...
    up to (excluding) the next 1-site on the ray."""
    ray = y.ray(g)
    if int(ray.firsts(0, 1)[0]) != 1:
        raise ValueError("run labels are only defined at sites marked 1")
    length = first_hit(lambda lo, hi: ray.firsts(lo, hi) == 1, budget, g, 1)
    firsts = ray.firsts(0, length)
    seconds = ray.seconds(0, length)
    return tuple(zip(firsts.tolist(), seconds.tolist()))


def _next_start_offset(y, g: Word, budget: int) -> int:
    ray = y.ray(g)
    return first_hit(lambda lo, hi: ray.firsts(lo, hi) == 1, budget, g, 1)


def _prev_start_offset(y, g: Word, budget: int) -> int:
    ray = y.ray(g)

    def fetch(lo: int, hi: int):
        o_lo, o_hi = directed_range(lo, hi, -1)
        return ray.firsts(o_lo, o_hi)[::-1] == 1

    return first_hit(fetch, budget, g, -1)


class TreeContraction:
    """The contraction map for one marked configuration.

    ``vertex(f)`` resolves a tree word f (over symbols s0..s|K|) to the
    1-site of the source it lands on; ``value_at(f)`` is the run label
    there.  The object doubles as the list-valued configuration consumed
    by the inverse machinery.
    """

    def __init__(self, y, budget: int = DEFAULT_BUDGET):
        _require_uniform_pair(y)
        root = y.gens.identity()
        if y.value_at(root)[0] != y.alphabet.distinguished:
            raise ValueError("the contraction domain needs the root marked 1")
        self.source = y
        self.budget = budget
        self.size = y.alphabet.size
        self.gens = tree_generators(self.size)  # output-side generators
        self._b = y.gens.generator("b")
        self._vertices: dict[tuple[int, ...], Word] = {(): root}
        self._partners: dict[tuple[int, tuple[int, ...]], Word] = {}
        self._labels: dict[tuple[int, ...], RunLabel] = {}

    @property
    def alphabet_size(self) -> int:
        return self.size

    def partner(self, g: Word, k: int) -> Word:
        key = (k, g.letters)
        cached = self._partners.get(key)
        if cached is None:
            cached = symbol_partner(self.source, g, k, self.budget)
            self._partners[key] = cached
            self._partners[(k, cached.letters)] = g
        return cached

    def _next(self, v: Word) -> Word:
        return v * v.gens.generator_power(0, _next_start_offset(self.source, v, self.budget))

    def _prev(self, v: Word) -> Word:
        return v * v.gens.generator_power(0, -_prev_start_offset(self.source, v, self.budget))

    def _edge_head(self, v: Word, k: int) -> Word:
        # unique out-edge labelled k: through the k-partner of v, across
        # its b-edge, back to the 1-site pairing with the far endpoint
        return self.partner(self.partner(v, k) * self._b, k)

    def _edge_tail(self, v: Word, k: int) -> Word:
        return self.partner(self.partner(v, k) * self._b.inverse(), k)

    def vertex(self, f: Word) -> Word:
        """Landing 1-site of the traversal along f, cached along prefixes."""
        if f.gens != self.gens:
            raise ValueError("traversal words live over the tree generators")
        letters = f.letters
        n = len(letters)
        while n > 0 and letters[:n] not in self._vertices:
            n -= 1
        cur = self._vertices[letters[:n]]
        for pos in range(n, len(letters)):
            letter = letters[pos]
            idx = abs(letter) - 1
            if idx == 0:
                cur = self._next(cur) if letter > 0 else self._prev(cur)
            else:
                cur = self._edge_head(cur, idx) if letter > 0 else self._edge_tail(cur, idx)
            self._vertices[letters[: pos + 1]] = cur
        return cur

    def value_at(self, f: Word) -> RunLabel:
        v = self.vertex(f)
        label = self._labels.get(v.letters)
        if label is None:
            label = run_label(self.source, v, self.budget)
            self._labels[v.letters] = label
        return label

    def run_len(self, f: Word) -> int:
        """Largest valid list index at f (entry count minus one)."""
        return len(self.value_at(f)) - 1

    def window(self, sites) -> dict[Word, RunLabel]:
        return {f: self.value_at(f) for f in sites}

    def network(self) -> RootedNetwork:
        """The contracted network itself: vertices are the source 1-sites,
        edge labels s0..s|K|, vertex labels the run labels."""
        names = self.gens.names

        def out_edges(v: Word):
            edges = [(self._next(v), names[0])]
            edges += [(self._edge_head(v, k), names[k]) for k in range(1, self.size + 1)]
            return edges

        def in_edges(v: Word):
            edges = [(self._prev(v), names[0])]
            edges += [(self._edge_tail(v, k), names[k]) for k in range(1, self.size + 1)]
            return edges

        def label(v: Word) -> RunLabel:
            cached = self._labels.get(v.letters)
            if cached is None:
                cached = run_label(self.source, v, self.budget)
                self._labels[v.letters] = cached
            return cached

        return RootedNetwork(self.source.gens.identity(), out_edges, in_edges, label)


def contracted_network(y, budget: int = DEFAULT_BUDGET) -> RootedNetwork:
    """Convenience wrapper: the contracted network of a marked configuration."""
    return TreeContraction(y, budget).network()


class TableZ:
    """List-valued configuration backed by a finite table (e.g. a file).

    Sites outside the table raise :class:`InvalidSiteError`; scans over
    table-backed data are only as long as the materialised window allows.
    """

    def __init__(self, values: dict[Word, RunLabel], gens: GeneratorSet, alphabet_size: int):
        if alphabet_size < 2:
            raise ValueError("alphabet size must be at least 2")
        self.gens = gens
        self.alphabet_size = alphabet_size
        self._values = dict(values)

    def value_at(self, f: Word) -> RunLabel:
        label = self._values.get(f)
        if label is None:
            raise InvalidSiteError(f"no data at {f!r}: window exhausted")
        return label

    def run_len(self, f: Word) -> int:
        return len(self.value_at(f)) - 1

    def window(self, sites) -> dict[Word, RunLabel]:
        return {f: self.value_at(f) for f in sites}


class IndexedSite(NamedTuple):
    """A list position (base, index) of a list-valued configuration."""

    base: Word
    index: int


def _entry(z, site: IndexedSite) -> tuple[int, int]:
    label = z.value_at(site.base)
    if not 0 <= site.index < len(label):
        raise InvalidSiteError(f"index {site.index} out of range at {site.base!r}")
    return label[site.index]


def _z1(z, site: IndexedSite) -> int:
    return _entry(z, site)[0]


def compare_sites(p: IndexedSite, q: IndexedSite) -> int | None:
    """-1/0/+1 when comparable in the site order, None otherwise.

    (g, i) precedes (h, j) when h lies strictly ahead of g on g's s0-ray,
    or when g = h and i < j.
    """
    if p.base.gens != q.base.gens:
        raise ValueError("sites over different generator sets")
    if p.base == q.base:
        return (p.index > q.index) - (p.index < q.index)
    d = (p.base.inverse() * q.base).letters
    if d and all(l == 1 for l in d):
        return -1
    if d and all(l == -1 for l in d):
        return 1
    return None


def order_le(p: IndexedSite, q: IndexedSite) -> bool | None:
    """p <= q in the site order; None when incomparable."""
    c = compare_sites(p, q)
    return None if c is None else c <= 0


def next_site(z, s: IndexedSite) -> IndexedSite:
    if s.index < z.run_len(s.base):
        return IndexedSite(s.base, s.index + 1)
    return IndexedSite(s.base * z.gens.generator_power(0, 1), 0)


def prev_site(z, s: IndexedSite) -> IndexedSite:
    if s.index > 0:
        return IndexedSite(s.base, s.index - 1)
    base = s.base * z.gens.generator_power(0, -1)
    return IndexedSite(base, z.run_len(base))


def site_partner(z, f: Word, k: int, budget: int = DEFAULT_BUDGET) -> IndexedSite:
    """Partner site for symbol k starting from (f, 0): the order-smallest
    later site with first component k and balanced counts of 1s and ks
    over the closed order interval.  For k = 1 it is (f, 0) itself."""
    if not 1 <= k <= z.alphabet_size:
        raise ValueError(f"symbol {k} outside the alphabet")
    if k == 1:
        return IndexedSite(f, 0)
    if isinstance(z, TreeContraction):
        return _site_partner_fast(z, f, k, budget)
    return _site_partner_walk(z, f, k, budget)


def _site_partner_fast(z: TreeContraction, f: Word, k: int, budget: int) -> IndexedSite:
    # sites along the s0-ray through f tile the source a-ray through the
    # landing 1-site, so the scan runs vectorised on the source
    x0 = z.vertex(f)
    ray = z.source.ray(x0)

    def fetch(lo: int, hi: int):
        firsts = ray.firsts(lo, hi)
        return firsts == k, firsts == 1, firsts == 1

    hit = balanced_match(fetch, budget, f, 1)
    base = f * z.gens.generator_power(0, hit.tracked_count - 1)
    return IndexedSite(base, hit.steps - hit.tracked_last)


def _site_partner_walk(z, f: Word, k: int, budget: int) -> IndexedSite:
    start = IndexedSite(f, 0)
    s = start
    ones = 0
    ks = 0
    for _ in range(budget + 1):
        v1 = _z1(z, s)
        if v1 == 1:
            ones += 1
        elif v1 == k:
            ks += 1
        if s != start and v1 == k and ones == ks:
            return s
        s = next_site(z, s)
    raise ScanBudgetExceeded(f, 1, budget)


def site_partner_inverse(z, site: IndexedSite, budget: int = DEFAULT_BUDGET) -> Word:
    """The unique f with ``site_partner(z, f, k) == site`` where k is the
    site's first component; found by the mirrored backward scan and then
    verified by re-running the forward scan."""
    k = _z1(z, site)
    if k == 1:
        if site.index != 0:
            raise InvalidSiteError("a site marked 1 with nonzero index has no preimage")
        return site.base
    if isinstance(z, TreeContraction):
        p = z.vertex(site.base) * z.source.gens.generator_power(0, site.index)
        ray = z.source.ray(p)

        def fetch(lo: int, hi: int):
            o_lo, o_hi = directed_range(lo, hi, -1)
            firsts = ray.firsts(o_lo, o_hi)[::-1]
            return firsts == 1, firsts == k, firsts == 1

        hit = balanced_match(fetch, budget, site.base, -1)
        f = site.base * z.gens.generator_power(0, -(hit.tracked_count - 1))
    else:
        s = site
        ones = 0
        ks = 0
        f = None
        for _ in range(budget + 1):
            v1 = _z1(z, s)
            if v1 == 1:
                ones += 1
            elif v1 == k:
                ks += 1
            if s != site and v1 == 1 and ones == ks:
                if s.index != 0:
                    raise InvalidSiteError(
                        "matched a 1-site at nonzero index: not in the image"
                    )
                f = s.base
                break
            s = prev_site(z, s)
        if f is None:
            raise ScanBudgetExceeded(site.base, -1, budget)
    if site_partner(z, f, k, budget) != site:
        raise InvalidSiteError(f"site {site} has no consistent preimage")
    return f


class ContractionInverse:
    """Exact inverse of the contraction: traverses the list-site network
    of a list-valued configuration z and reads pair entries.

    Applied to the contraction of y it reproduces y pointwise; applying
    the contraction to this view reproduces z.
    """

    def __init__(self, z, budget: int = DEFAULT_BUDGET):
        from .words import F2

        self.z = z
        self.budget = budget
        self.gens = F2
        self.measure = MeasureSpec.uniform(z.alphabet_size, "pair")
        self._sites: dict[tuple[int, ...], IndexedSite] = {
            (): IndexedSite(z.gens.identity(), 0)
        }

    @property
    def alphabet(self):
        return self.measure.alphabet

    def _b_step(self, cur: IndexedSite, forward: bool) -> IndexedSite:
        k = _z1(self.z, cur)
        f0 = site_partner_inverse(self.z, cur, self.budget)
        hop = self.z.gens.generator_power(k, 1 if forward else -1)
        return site_partner(self.z, f0 * hop, k, self.budget)

    def site(self, g: Word) -> IndexedSite:
        """List site reached from the root site by the word g, stepping
        through list positions on 'a' letters and across the symbol
        pairings on 'b' letters."""
        if g.gens != self.gens:
            raise ValueError("inverse traversals are words over {a, b}")
        letters = g.letters
        n = len(letters)
        while n > 0 and letters[:n] not in self._sites:
            n -= 1
        cur = self._sites[letters[:n]]
        for pos in range(n, len(letters)):
            letter = letters[pos]
            if letter == 1:
                cur = next_site(self.z, cur)
            elif letter == -1:
                cur = prev_site(self.z, cur)
            else:
                cur = self._b_step(cur, letter > 0)
            self._sites[letters[: pos + 1]] = cur
        return cur

    def value_at(self, g: Word) -> tuple[int, int]:
        return _entry(self.z, self.site(g))

    def ray(self, g: Word) -> "_SequentialRay":
        return _SequentialRay(self, g)

    def window(self, sites) -> dict[Word, tuple[int, int]]:
        return {w: self.value_at(w) for w in sites}


class _SequentialRay:
    """Ray adapter for views without vectorised sampling: grows value
    arrays site by site on demand."""

    def __init__(self, view: ContractionInverse, anchor: Word):
        self._z = view.z
        start = view.site(anchor)
        e0 = _entry(self._z, start)
        self._fwd_sites = [start]
        self._fwd = [e0]
        self._bwd_sites: list[IndexedSite] = []
        self._bwd: list[tuple[int, int]] = []

    def _ensure(self, lo: int, hi: int) -> None:
        while len(self._fwd) < hi:
            s = next_site(self._z, self._fwd_sites[-1])
            self._fwd_sites.append(s)
            self._fwd.append(_entry(self._z, s))
        while len(self._bwd) < -lo:
            s = prev_site(self._z, self._bwd_sites[-1] if self._bwd_sites else self._fwd_sites[0])
            self._bwd_sites.append(s)
            self._bwd.append(_entry(self._z, s))

    def _component(self, lo: int, hi: int, idx: int) -> np.ndarray:
        self._ensure(lo, hi)
        vals = [
            (self._fwd[t] if t >= 0 else self._bwd[-t - 1])[idx] for t in range(lo, hi)
        ]
        return np.asarray(vals, dtype=np.int64)

    def firsts(self, lo: int, hi: int) -> np.ndarray:
        return self._component(lo, hi, 0)

    def seconds(self, lo: int, hi: int) -> np.ndarray:
        return self._component(lo, hi, 1)

    def pair_at(self, t: int) -> tuple[int, int]:
        return (int(self.firsts(t, t + 1)[0]), int(self.seconds(t, t + 1)[0]))


def marked_moves(y, budget: int = DEFAULT_BUDGET) -> list[Word]:
    """Generator moves h with h.y still marked at the root: both b-moves
    always qualify (the first coordinate is b-coset constant), and the
    a-moves to the adjacent run starts."""
    gens = y.gens
    b = gens.generator("b")
    fwd = _next_start_offset(y, gens.identity(), budget)
    bwd = _prev_start_offset(y, gens.identity(), budget)
    return [
        b,
        b.inverse(),
        gens.generator_power(0, -fwd),
        gens.generator_power(0, bwd),
    ]


def orbit_move_witness_tree(
    y,
    move: Word,
    window_radius: int = 1,
    f_cap: int = 2,
    budget: int = DEFAULT_BUDGET,
) -> Word:
    """Tree word f with ``contraction(move . y) = f . contraction(y)`` on
    the comparison window; exists and is unique because the contracted
    network is a tree.  Searched exhaustively inside the f_cap ball."""
    base = TreeContraction(y, budget)
    moved = TreeContraction(shifted(y, move), budget)
    window = enumerate_ball(base.gens, window_radius)
    target = {w: moved.value_at(w) for w in window}
    matches = []
    for cand in enumerate_ball(base.gens, f_cap):
        c_inv = cand.inverse()
        if all(base.value_at(c_inv * w) == target[w] for w in window):
            matches.append(cand)
    if len(matches) != 1:
        raise WitnessSearchError(
            f"{len(matches)} witnesses within cap {f_cap} for move {move}"
        )
    return matches[0]


def run_label_pmf(alphabet_size: int, label: RunLabel) -> float:
    """Probability of one run label under the image law for a uniform base:
    |K|^-(2m) for a label with m entries satisfying the image invariants,
    0 otherwise."""
    if alphabet_size < 2:
        raise ValueError("alphabet size must be at least 2")
    if not label:
        return 0.0
    for pos, entry in enumerate(label):
        if len(entry) != 2:
            return 0.0
        i, j = entry
        if not (1 <= i <= alphabet_size and 1 <= j <= alphabet_size):
            return 0.0
        if pos == 0 and i != 1:
            return 0.0
        if pos > 0 and i == 1:
            return 0.0
    return float(alphabet_size) ** (-2 * len(label))
