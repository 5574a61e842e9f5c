"""Rooted sensor networks and their diffusion-set partition.

Graph file format (UTF-8, one directive per line, ``#`` starts a comment)::

    sink s
    edge s a
    edge a b
    weight a 3.5

Nodes are opaque string identifiers. Exactly one ``sink`` line is required,
edges are undirected, and ``weight`` lines are optional (missing weights are 0).
"""
from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .exceptions import ParseError, ValidationError

logger = logging.getLogger(__name__)


class EpidemicState(enum.IntEnum):
    """Interference status of a node, ordered Susceptible < Attacked < Removed."""

    SUSCEPTIBLE = 0
    ATTACKED = 1
    REMOVED = 2

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, value) -> "EpidemicState":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        aliases = {"S": "SUSCEPTIBLE", "A": "ATTACKED", "R": "REMOVED"}
        try:
            return cls[aliases.get(text, text)]
        except KeyError:
            raise ValueError(f"unknown epidemic state {value!r}") from None


@dataclass(frozen=True)
class Network:
    """Undirected graph with a designated sink and per-node interference weights.

    Construct through :func:`load_network` or :meth:`from_edges`; both validate
    that the sink exists, edges are simple, and every node reaches the sink.
    """

    nodes: frozenset
    edges: frozenset
    sink: str
    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weights", MappingProxyType(dict(self.weights)))
        self._validate()

    @classmethod
    def from_edges(cls, sink: str, edges: Iterable[tuple[str, str]], weights=None, nodes=()):
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValidationError(f"self-loop on node {u!r}")
            key = frozenset((u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {u!r}-{v!r}")
            seen.add(key)
        weights = dict(weights or {})
        all_nodes = {sink, *nodes, *weights}
        for e in seen:
            all_nodes.update(e)
        return cls(frozenset(all_nodes), frozenset(seen), sink, weights)

    def _validate(self):
        if self.sink not in self.nodes:
            raise ValidationError(f"sink {self.sink!r} is not a node")
        for e in self.edges:
            if len(e) != 2:
                raise ValidationError(f"self-loop on node {next(iter(e))!r}")
            if not e <= self.nodes:
                raise ValidationError(f"edge {sorted(e)} references an unknown node")
        for n, w in self.weights.items():
            if n not in self.nodes:
                raise ValidationError(f"weight given for unknown node {n!r}")
            if not w >= 0:
                raise ValidationError(f"weight of {n!r} must be non-negative, got {w}")
        unreachable = self.nodes - _reachable(self.adjacency, self.sink)
        if unreachable:
            raise ValidationError(f"nodes unreachable from sink: {', '.join(sorted(unreachable))}")

    @cached_property
    def adjacency(self) -> Mapping[str, tuple[str, ...]]:
        adj = {n: [] for n in self.nodes}
        for e in self.edges:
            u, v = sorted(e)
            adj[u].append(v)
            adj[v].append(u)
        return MappingProxyType({n: tuple(sorted(nbrs)) for n, nbrs in adj.items()})

    def weight(self, node: str) -> float:
        return self.weights.get(node, 0.0)

    def __len__(self):
        return len(self.nodes)


def _reachable(adj, start) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _directives(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def load_network(text: str) -> Network:
    """Parse a graph document into a validated :class:`Network`."""
    sink = None
    edges = []
    weights = {}
    seen_edges = {}
    for lineno, tokens in _directives(text):
        kind, args = tokens[0], tokens[1:]
        if kind == "sink":
            if len(args) != 1:
                raise ParseError("expected 'sink <id>'", lineno)
            if sink is not None:
                raise ParseError("more than one sink line", lineno)
            sink = args[0]
        elif kind == "edge":
            if len(args) != 2:
                raise ParseError("expected 'edge <u> <v>'", lineno)
            u, v = args
            if u == v:
                raise ParseError(f"self-loop on node {u!r}", lineno)
            key = frozenset(args)
            if key in seen_edges:
                raise ParseError(f"duplicate edge {u}-{v} (first on line {seen_edges[key]})", lineno)
            seen_edges[key] = lineno
            edges.append((u, v))
        elif kind == "weight":
            if len(args) != 2:
                raise ParseError("expected 'weight <id> <real>'", lineno)
            try:
                w = float(args[1])
            except ValueError:
                raise ParseError(f"weight {args[1]!r} is not a number", lineno) from None
            if not w >= 0 or w == float("inf"):
                raise ParseError(f"weight must be finite and non-negative, got {args[1]}", lineno)
            if args[0] in weights:
                raise ParseError(f"duplicate weight for node {args[0]!r}", lineno)
            weights[args[0]] = w
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)
    if sink is None:
        raise ValidationError("missing 'sink' line")
    return Network.from_edges(sink, edges, weights)


def read_network(path) -> Network:
    return load_network(Path(path).read_text(encoding="utf-8"))


def dump_network(net: Network) -> str:
    lines = [f"sink {net.sink}"]
    lines += [f"edge {u} {v}" for u, v in sorted(tuple(sorted(e)) for e in net.edges)]
    lines += [f"weight {n} {w!r}" for n, w in sorted(net.weights.items())]
    return "\n".join(lines) + "\n"


def compute_depths(net: Network) -> dict[str, int]:
    """Hop distance of every node from the sink (breadth-first search)."""
    depth = {net.sink: 0}
    queue = deque([net.sink])
    while queue:
        u = queue.popleft()
        for v in net.adjacency[u]:
            if v not in depth:
                depth[v] = depth[u] + 1
                queue.append(v)
    return depth


class _DisjointSet:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id wins so the representative is order-independent
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True)
class DiffusionPartition:
    """Ordered diffusion sets; ``index`` maps each node to its set position (0-based)."""

    sets: tuple[frozenset, ...]
    index: Mapping[str, int]

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def as_lists(self) -> list[list[str]]:
        return [sorted(s) for s in self.sets]


def partition_diffusion_sets(net: Network, depths: Mapping[str, int] | None = None) -> DiffusionPartition:
    """Group nodes into diffusion sets.

    Two nodes at the same depth are related when they share a neighbour one hop
    further from the sink. Diffusion sets are the connected components of that
    relation inside each depth level, so a node with no such partner forms a
    singleton. Sets are ordered by depth, then by their smallest member.
    """
    if depths is None:
        depths = compute_depths(net)
    dsu = _DisjointSet(net.nodes)
    for child in net.nodes:
        # every pair of parents at depth(child) - 1 shares ``child`` as next neighbour
        d = depths[child]
        parents = [p for p in net.adjacency[child] if depths[p] == d - 1]
        for p in parents[1:]:
            dsu.union(parents[0], p)
    groups: dict[str, set] = {}
    for n in net.nodes:
        groups.setdefault(dsu.find(n), set()).add(n)
    ordered = sorted(groups.values(), key=lambda s: (depths[next(iter(s))], min(s)))
    sets = tuple(frozenset(s) for s in ordered)
    index = {n: i for i, s in enumerate(sets) for n in s}
    return DiffusionPartition(sets, MappingProxyType(index))


def classify_node(weight: float, t1: float, t2: float) -> EpidemicState:
    """Map an interference level to Susceptible / Attacked / Removed.

    ``weight < t1`` is Susceptible, ``t1 <= weight < t2`` Attacked, and anything
    at or above ``t2`` Removed.
    """
    if t1 < 0 or t2 < 0:
        raise ValidationError(f"thresholds must be non-negative, got t1={t1}, t2={t2}")
    if t1 > t2:
        raise ValidationError(f"threshold t1={t1} exceeds t2={t2}")
    if weight < 0:
        raise ValidationError(f"weight must be non-negative, got {weight}")
    if weight < t1:
        return EpidemicState.SUSCEPTIBLE
    if weight < t2:
        return EpidemicState.ATTACKED
    return EpidemicState.REMOVED


def load_tree(text: str) -> dict[str, str]:
    """Parse ``parent <child> <parent>`` lines into a child -> parent map."""
    parent = {}
    for lineno, tokens in _directives(text):
        if tokens[0] != "parent" or len(tokens) != 3:
            raise ParseError("expected 'parent <child> <parent>'", lineno)
        child, par = tokens[1:]
        if child in parent:
            raise ParseError(f"node {child!r} has more than one parent", lineno)
        parent[child] = par
    return parent


def tree_interference(net: Network, tree_parent: Mapping[str, str]) -> dict[str, int]:
    """Number of children each node carries in a collection tree rooted at the sink."""
    if net.sink in tree_parent:
        raise ValidationError("the sink cannot have a parent")
    for child, par in tree_parent.items():
        if child not in net.nodes or par not in net.nodes:
            raise ValidationError(f"tree edge {child}->{par} references an unknown node")
        if par not in net.adjacency[child]:
            raise ValidationError(f"tree edge {child}->{par} is not a network link")
    missing = net.nodes - set(tree_parent) - {net.sink}
    if missing:
        raise ValidationError(f"nodes without a parent: {', '.join(sorted(missing))}")
    for start in tree_parent:
        seen = {start}
        node = start
        while node != net.sink:
            node = tree_parent[node]
            if node in seen:
                raise ValidationError(f"cycle through node {node!r}")
            seen.add(node)
    counts = dict.fromkeys(net.nodes, 0)
    for par in tree_parent.values():
        counts[par] += 1
    return counts


def remove_node(net: Network, victim: str, return_dropped: bool = False):
    """Delete ``victim`` and its links; nodes cut off from the sink go with it.

    Returns the new network, or ``(network, dropped)`` when ``return_dropped``
    is true, where ``dropped`` holds the cascaded nodes (excluding ``victim``).
    """
    if victim == net.sink:
        raise ValidationError("cannot remove the sink")
    if victim not in net.nodes:
        raise ValidationError(f"unknown node {victim!r}")
    edges = {e for e in net.edges if victim not in e}
    adj = {n: [] for n in net.nodes if n != victim}
    for e in edges:
        u, v = tuple(e)
        adj[u].append(v)
        adj[v].append(u)
    kept = _reachable(adj, net.sink)
    dropped = frozenset(adj) - kept
    if dropped:
        logger.info("removing %s disconnects %s", victim, ", ".join(sorted(dropped)))
    new = Network(
        frozenset(kept),
        frozenset(e for e in edges if e <= kept),
        net.sink,
        {n: w for n, w in net.weights.items() if n in kept},
    )
    return (new, dropped) if return_dropped else new
