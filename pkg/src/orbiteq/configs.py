"""Lazily sampled infinite configurations on free groups.

A configuration assigns an alphabet value (or a pair of values) to every
group element.  Values are derived from a keyed hash of the site, so the
assignment is a pure function of ``(seed, site)``: query order, platform
and process never change a value, and scans of a-priori unbounded length
are reproducible.

Sites are addressed in two levels.  A word ``w`` splits uniquely as
``rep * a**t`` where ``rep`` does not end in the first generator; ``rep``
is hashed once into a per-ray subkey and ``t`` selects into SHAKE-256
output blocks keyed by that subkey.  This makes sampling along a-rays
O(1) amortised per site, which the bracket-matching scans rely on.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .words import F2, GeneratorSet, Word, coset_rep_b, split_a_tail

BLOCK = 512  # sites per hash block along a ray

_TAG_COSET = b"coset"
_TAG_SITE2 = b"site2"
_TAG_SITE = b"site"

_MAX_CACHED_BLOCKS = 32768  # flush threshold; recomputation is pure


@dataclass(frozen=True)
class Alphabet:
    """Finite alphabet {1, .., size} with 1 as the distinguished element.

    The symbol 0 is never a member; it is reserved for the extra edge label
    of the contracted tree network.
    """

    size: int
    distinguished: int = 1

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("alphabet needs at least two symbols")
        if not 1 <= self.distinguished <= self.size:
            raise ValueError("distinguished symbol must be an alphabet member")

    @property
    def values(self) -> range:
        return range(1, self.size + 1)


@dataclass(frozen=True)
class MeasureSpec:
    """Base law of a product measure.

    kind 'pair' is the coset-constrained pair measure (first coordinate
    constant along right b-cosets); kind 'plain' is the ordinary product
    over single values.
    """

    kind: str
    law: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("pair", "plain"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if len(self.law) < 2:
            raise ValueError("base law needs at least two symbols")
        if any(p < 0 for p in self.law):
            raise ValueError("law entries must be nonnegative")
        if abs(sum(self.law) - 1.0) > 1e-12:
            raise ValueError("law must sum to 1 within 1e-12")
        if max(self.law) > 1.0 - 1e-12:
            raise ValueError("law must not concentrate on a single point")

    @classmethod
    def uniform(cls, size: int, kind: str = "pair") -> "MeasureSpec":
        return cls(kind, (1.0 / size,) * size)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.law))

    def is_uniform(self) -> bool:
        return all(math.isclose(p, self.law[0], abs_tol=1e-12) for p in self.law)

    def to_json(self) -> dict:
        return {"kind": self.kind, "law": list(self.law)}

    @classmethod
    def from_json(cls, data: dict) -> "MeasureSpec":
        return cls(data["kind"], tuple(data["law"]))


def _letters_bytes(w: Word) -> bytes:
    return np.asarray(w.letters, dtype="<i2").tobytes()


class LazyConfig:
    """Seed-derived configuration on the free group ``gens``.

    Pair kind: ``value_at`` returns ``(x1, x2)`` with ``x1`` keyed by the
    b-coset of the site (hence constant along right b-cosets) and ``x2``
    keyed by the site itself.  Plain kind: a single site-keyed value.
    """

    def __init__(self, seed: int, measure: MeasureSpec, gens: GeneratorSet = F2):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if measure.kind == "pair" and gens.rank != 2:
            raise ValueError("pair-kind configurations live on a rank-2 group")
        self.seed = seed
        self.measure = measure
        self.gens = gens
        self._seed_bytes = struct.pack("<Q", seed)
        cdf = np.cumsum(np.asarray(measure.law, dtype=np.float64))
        cdf[-1] = 1.0
        self._cdf = cdf
        self._subkeys: dict[tuple[bytes, tuple[int, ...]], bytes] = {}
        self._blocks: dict[tuple[bytes, tuple[int, ...], int], np.ndarray] = {}

    @property
    def alphabet(self) -> Alphabet:
        return self.measure.alphabet

    # -- keyed sampling ----------------------------------------------------

    def _subkey(self, tag: bytes, rep: Word) -> bytes:
        key = (tag, rep.letters)
        sub = self._subkeys.get(key)
        if sub is None:
            h = hashlib.blake2b(key=self._seed_bytes, digest_size=32)
            h.update(bytes([len(tag)]))
            h.update(tag)
            h.update(_letters_bytes(rep))
            sub = h.digest()
            self._subkeys[key] = sub
        return sub

    def _block(self, tag: bytes, rep: Word, bidx: int) -> np.ndarray:
        key = (tag, rep.letters, bidx)
        vals = self._blocks.get(key)
        if vals is None:
            raw = hashlib.shake_256(
                self._subkey(tag, rep) + struct.pack("<q", bidx)
            ).digest(8 * BLOCK)
            u = np.frombuffer(raw, dtype="<u8")
            # inverse CDF; the final clamp folds the <=2**-53 top sliver
            # into the last symbol
            idx = np.searchsorted(self._cdf, u * 2.0**-64, side="right")
            vals = np.minimum(idx, len(self._cdf) - 1).astype(np.int64) + 1
            if len(self._blocks) >= _MAX_CACHED_BLOCKS:
                self._blocks.clear()
            self._blocks[key] = vals
        return vals

    def _gather(self, tag: bytes, rep: Word, lo: int, hi: int) -> np.ndarray:
        out = np.empty(hi - lo, dtype=np.int64)
        t = lo
        while t < hi:
            bidx, off = divmod(t, BLOCK)
            take = min(BLOCK - off, hi - t)
            out[t - lo : t - lo + take] = self._block(tag, rep, bidx)[off : off + take]
            t += take
        return out

    def _site_value(self, tag: bytes, w: Word) -> int:
        rep, t = split_a_tail(w)
        bidx, off = divmod(t, BLOCK)
        return int(self._block(tag, rep, bidx)[off])

    # -- public interface --------------------------------------------------

    def value_at(self, w: Word):
        """Value of the configuration at a site; pure in (seed, site)."""
        if w.gens != self.gens:
            raise ValueError("site is over a different generator set")
        if self.measure.kind == "pair":
            first = self._site_value(_TAG_COSET, coset_rep_b(w))
            second = self._site_value(_TAG_SITE2, w)
            return (first, second)
        return self._site_value(_TAG_SITE, w)

    def ray(self, w: Word) -> "Ray":
        """Sampler for the sites ``w * a**t``, vectorised over t."""
        return _HashRay(self, w)


class Ray:
    """Values of a configuration along ``anchor * a**t``.

    ``firsts``/``seconds`` return first/second pair coordinates for the
    half-open offset range [lo, hi); ``singles`` is the plain-kind analog.
    """

    def firsts(self, lo: int, hi: int) -> np.ndarray:
        raise NotImplementedError

    def seconds(self, lo: int, hi: int) -> np.ndarray:
        raise NotImplementedError

    def singles(self, lo: int, hi: int) -> np.ndarray:
        raise NotImplementedError

    def pair_at(self, t: int) -> tuple[int, int]:
        return (int(self.firsts(t, t + 1)[0]), int(self.seconds(t, t + 1)[0]))


class _HashRay(Ray):
    def __init__(self, cfg: LazyConfig, anchor: Word):
        self._cfg = cfg
        rep, base = split_a_tail(anchor)
        self._rep = rep
        self._base = base
        # at offset t = -base the site is `rep` itself, whose b-coset rep
        # can differ from rep; that single first-coordinate is patched in
        self._patch: int | None = None
        if cfg.measure.kind == "pair":
            stripped = coset_rep_b(rep)
            if stripped != rep:
                self._patch = cfg._site_value(_TAG_COSET, stripped)

    def _span(self, lo: int, hi: int) -> tuple[int, int]:
        return self._base + lo, self._base + hi

    def firsts(self, lo: int, hi: int) -> np.ndarray:
        u_lo, u_hi = self._span(lo, hi)
        out = self._cfg._gather(_TAG_COSET, self._rep, u_lo, u_hi)
        if self._patch is not None and u_lo <= 0 < u_hi:
            out[-u_lo] = self._patch
        return out

    def seconds(self, lo: int, hi: int) -> np.ndarray:
        u_lo, u_hi = self._span(lo, hi)
        return self._cfg._gather(_TAG_SITE2, self._rep, u_lo, u_hi)

    def singles(self, lo: int, hi: int) -> np.ndarray:
        u_lo, u_hi = self._span(lo, hi)
        return self._cfg._gather(_TAG_SITE, self._rep, u_lo, u_hi)


class ShiftedConfig:
    """The shift g.x, i.e. (g.x)(w) = x(g^-1 w); shares the base sampler."""

    def __init__(self, base, g: Word):
        self.base = base
        self.shift = g
        self._ginv = g.inverse()

    @property
    def measure(self) -> MeasureSpec:
        return self.base.measure

    @property
    def alphabet(self) -> Alphabet:
        return self.base.alphabet

    @property
    def gens(self) -> GeneratorSet:
        return self.base.gens

    def value_at(self, w: Word):
        return self.base.value_at(self._ginv * w)

    def ray(self, w: Word) -> Ray:
        return self.base.ray(self._ginv * w)


def shifted(x, g: Word) -> ShiftedConfig:
    """The configuration g.x under the shift action."""
    return ShiftedConfig(x, g)


def derive_value(seed: int, tag: bytes, w: Word, law: tuple[float, ...]) -> int:
    """One keyed-hash draw: uniform 64-bit from (seed, tag, site), then
    inverse CDF into ``law``.  Stable across runs, platforms and orders."""
    spec = MeasureSpec("plain", tuple(law))
    cfg = LazyConfig(seed, spec, w.gens)
    rep, t = split_a_tail(w)
    bidx, off = divmod(t, BLOCK)
    return int(cfg._block(bytes(tag), rep, bidx)[off])


def condition_marked_root(x):
    """Accept x iff its first coordinate at the identity is the marked
    symbol 1; rejection (None) is a normal outcome with rate ~ 1/|K|."""
    if x.measure.kind != "pair":
        raise ValueError("conditioning applies to pair-kind configurations")
    root = x.value_at(x.gens.identity())
    return x if root[0] == x.alphabet.distinguished else None
