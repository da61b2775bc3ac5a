"""Rooted networks: labelled directed graphs with a distinguished root.

Networks here are usually infinite, so they are exposed as neighbour
oracles; only finite balls around the root are ever materialised.  An
*actionable* network (exactly one outgoing and one incoming edge per
label at every vertex) turns its edge labels into a free-group right
action on the vertices, recovered by :func:`traverse`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

from .errors import ActionabilityError, DegreeCapExceeded
from .words import GeneratorSet, Word

Vertex = Hashable
Edge = tuple[Vertex, Vertex, str]
# neighbour oracles return (other endpoint, edge label) pairs
NeighborFn = Callable[[Vertex], Sequence[tuple[Vertex, str]]]


@dataclass
class RootedNetwork:
    """Neighbour-oracle view of a vertex- and edge-labelled rooted graph."""

    root: Vertex
    out_edges: NeighborFn
    in_edges: NeighborFn
    vertex_label: Callable[[Vertex], Hashable]

    def rerooted(self, v: Vertex) -> "RootedNetwork":
        return RootedNetwork(v, self.out_edges, self.in_edges, self.vertex_label)


def rerooted(net: RootedNetwork, v: Vertex) -> RootedNetwork:
    """The same network with the root moved to v."""
    return net.rerooted(v)


def explicit_network(
    root: Vertex,
    edges: Iterable[Edge],
    labels: dict,
) -> RootedNetwork:
    """Network from explicit finite data; handy for tests and golden files."""
    out: dict[Vertex, list[tuple[Vertex, str]]] = {v: [] for v in labels}
    into: dict[Vertex, list[tuple[Vertex, str]]] = {v: [] for v in labels}
    for src, dst, lab in edges:
        out.setdefault(src, []).append((dst, lab))
        into.setdefault(dst, []).append((src, lab))
    return RootedNetwork(
        root,
        lambda v: out.get(v, []),
        lambda v: into.get(v, []),
        lambda v: labels[v],
    )


def cayley_network(x, gens: GeneratorSet | None = None) -> RootedNetwork:
    """The network induced by a configuration on its group: vertices are
    group elements, edges (g, g*s) labelled s, labels x(g), root identity."""
    gens = gens if gens is not None else x.gens
    singles = [gens.generator(name) for name in gens.names]

    def out_edges(v: Word):
        return [(v * s, name) for s, name in zip(singles, gens.names)]

    def in_edges(v: Word):
        return [(v * s.inverse(), name) for s, name in zip(singles, gens.names)]

    return RootedNetwork(gens.identity(), out_edges, in_edges, x.value_at)


@dataclass(frozen=True)
class FiniteBall:
    """Materialised ball around the root: the induced subnetwork on all
    vertices within the given undirected graph distance."""

    radius: int
    root: Vertex
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    labels: dict
    distances: dict = field(compare=False)

    def interior(self, margin: int = 1) -> list[Vertex]:
        return [v for v in self.vertices if self.distances[v] <= self.radius - margin]


def materialize_ball(net: RootedNetwork, radius: int, degree_cap: int = 256) -> FiniteBall:
    """BFS materialisation (edge directions ignored for distance)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    dist = {net.root: 0}
    order = [net.root]
    frontier = [net.root]
    for d in range(1, radius + 1):
        new = []
        for v in frontier:
            neighbors = list(net.out_edges(v)) + list(net.in_edges(v))
            if len(neighbors) > degree_cap:
                raise DegreeCapExceeded(
                    f"vertex {v!r} has {len(neighbors)} incident edges (cap {degree_cap})"
                )
            for w, _ in neighbors:
                if w not in dist:
                    dist[w] = d
                    order.append(w)
                    new.append(w)
        frontier = new
    edges = []
    for v in order:
        for w, lab in net.out_edges(v):
            if w in dist:
                edges.append((v, w, lab))
    labels = {v: net.vertex_label(v) for v in order}
    return FiniteBall(radius, net.root, tuple(order), tuple(edges), labels, dist)


def ball(net: RootedNetwork, radius: int, degree_cap: int = 256) -> FiniteBall:
    return materialize_ball(net, radius, degree_cap)


def _adjacency(b: FiniteBall):
    out: dict[Vertex, list[tuple[str, Vertex]]] = {v: [] for v in b.vertices}
    into: dict[Vertex, list[tuple[str, Vertex]]] = {v: [] for v in b.vertices}
    for src, dst, lab in b.edges:
        out[src].append((lab, dst))
        into[dst].append((lab, src))
    return out, into


def balls_isomorphic(b1: FiniteBall, b2: FiniteBall) -> bool:
    """Root-, vertex-label- and edge-label-preserving directed isomorphism,
    by deterministic backtracking with label pruning."""
    if b1.radius != b2.radius:
        raise ValueError("balls must have equal radii")
    if len(b1.vertices) != len(b2.vertices) or len(b1.edges) != len(b2.edges):
        return False
    if sorted(map(repr, b1.labels.values())) != sorted(map(repr, b2.labels.values())):
        return False
    out1, in1 = _adjacency(b1)
    out2, in2 = _adjacency(b2)

    def signature(v, out, into, labels):
        return (
            repr(labels[v]),
            tuple(sorted(lab for lab, _ in out[v])),
            tuple(sorted(lab for lab, _ in into[v])),
        )

    order = list(b1.vertices)  # BFS order from materialisation
    mapping: dict[Vertex, Vertex] = {}
    used: set[Vertex] = set()

    def consistent(v, w) -> bool:
        if signature(v, out1, in1, b1.labels) != signature(w, out2, in2, b2.labels):
            return False
        for lab, u in out1[v]:
            if u in mapping and (lab, mapping[u]) not in out2[w]:
                return False
        for lab, u in in1[v]:
            if u in mapping and (lab, mapping[u]) not in in2[w]:
                return False
        # reverse direction: already-mapped images must not demand edges
        # that v does not have
        inv = {img: src for src, img in mapping.items()}
        for lab, u in out2[w]:
            if u in inv and (lab, inv[u]) not in out1[v]:
                return False
        for lab, u in in2[w]:
            if u in inv and (lab, inv[u]) not in in1[v]:
                return False
        return True

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        # candidates: restrict via any already-mapped neighbour
        candidates = None
        for lab, u in out1[v]:
            if u in mapping:
                candidates = [w for lab2, w in in2[mapping[u]] if lab2 == lab]
                break
        if candidates is None:
            for lab, u in in1[v]:
                if u in mapping:
                    candidates = [w for lab2, w in out2[mapping[u]] if lab2 == lab]
                    break
        if candidates is None:
            candidates = [b2.root] if v == b1.root else list(b2.vertices)
        for w in candidates:
            if w in used:
                continue
            if v == b1.root and w != b2.root:
                continue
            if not consistent(v, w):
                continue
            mapping[v] = w
            used.add(w)
            if extend(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return extend(0)


@dataclass(frozen=True)
class NetworkDistance:
    """Truncated local distance between rooted networks.

    ``value`` is 2 when even the radius-0 balls disagree, else 1/(n+1) for
    the largest agreeing radius n that was tested.  ``upper_bound_only``
    marks the censored case where all tested radii agreed.
    """

    value: Fraction
    upper_bound_only: bool


def network_distance(n1: RootedNetwork, n2: RootedNetwork, max_radius: int) -> NetworkDistance:
    largest = -1
    for r in range(max_radius + 1):
        if balls_isomorphic(materialize_ball(n1, r), materialize_ball(n2, r)):
            largest = r
        else:
            break
    if largest < 0:
        return NetworkDistance(Fraction(2), False)
    return NetworkDistance(Fraction(1, largest + 1), largest == max_radius)


def is_actionable(net: RootedNetwork, labels: Sequence[str], radius: int, degree_cap: int = 256) -> bool:
    """Check the unique-in/out-edge-per-label property on the interior of
    the radius ball.  Boundary vertices are skipped: their edges may leave
    the materialised region."""
    b = materialize_ball(net, radius, degree_cap)
    for v in b.interior():
        outs = [lab for _, lab in net.out_edges(v)]
        ins = [lab for _, lab in net.in_edges(v)]
        for lab in labels:
            if outs.count(lab) != 1 or ins.count(lab) != 1:
                return False
    return True


def traverse(net: RootedNetwork, v: Vertex, g: Word) -> Vertex:
    """Follow the word letter by letter: a positive letter moves along the
    unique out-edge with that label, an inverse letter backwards along the
    unique in-edge.  This is the right action the edge labels generate."""
    names = g.gens.names
    cur = v
    for letter in g.letters:
        name = names[abs(letter) - 1]
        if letter > 0:
            matches = [w for w, lab in net.out_edges(cur) if lab == name]
        else:
            matches = [w for w, lab in net.in_edges(cur) if lab == name]
        if len(matches) != 1:
            raise ActionabilityError(cur, name if letter > 0 else name + "'", len(matches))
        cur = matches[0]
    return cur


def act(net: RootedNetwork, v: Vertex, g: Word) -> Vertex:
    return traverse(net, v, g)


def ball_to_json(b: FiniteBall) -> dict:
    """JSON form used by the CLI and golden tests (vertices must be words)."""
    return {
        "radius": b.radius,
        "root": str(b.root),
        "vertices": [str(v) for v in b.vertices],
        "edges": [[str(src), str(dst), lab] for src, dst, lab in b.edges],
        "labels": {str(v): _label_json(lab) for v, lab in b.labels.items()},
    }


def _label_json(label):
    if isinstance(label, tuple):
        return list(_label_json(x) for x in label)
    return label
