"""Static star routes and a minimum-hop collect tree."""

import math
from collections import deque
from dataclasses import dataclass, field

from .medium import Position, RadioGeometry, distance

CENTER = 1
# square side (m) giving a mean hop count of about 6 with 49 nodes and 50 m range
COLLECT_SIDE = 240.0


class DisconnectedTopology(ValueError):
    pass


def star_pairs(n: int) -> list[tuple[int, int]]:
    """Sender/destination pairs on opposite sides of the star circle.

    Senders are the even ids; destination(k) = ((k + n/2 - 2) mod n) + 2.
    """
    if n < 2 or n % 2:
        raise ValueError(f"star size must be a positive even number, got {n}")
    return [(k, (k + n // 2 - 2) % n + 2) for k in range(2, n + 2, 2)]


def star_positions(n: int, geometry: RadioGeometry = RadioGeometry(), radius_ratio=0.8) -> dict:
    radius = radius_ratio * geometry.tx_range
    pos = {CENTER: Position(0.0, 0.0)}
    for i in range(n):
        a = 2 * math.pi * i / n
        pos[i + 2] = Position(radius * math.cos(a), radius * math.sin(a))
    return pos


@dataclass
class StarTopology:
    n: int
    positions: dict
    pairs: list

    @classmethod
    def build(cls, n: int, geometry: RadioGeometry = RadioGeometry()):
        return cls(n, star_positions(n, geometry), star_pairs(n))

    def next_hop(self, node, dest):
        return static_next_hop(self, node, dest)


def static_next_hop(topology: StarTopology, node, dest):
    if dest not in topology.positions or node not in topology.positions:
        raise KeyError(f"unknown node in route {node} -> {dest}")
    if node == dest or node == CENTER:
        return dest
    return CENTER


@dataclass
class CollectTree:
    sink: int
    parent: dict = field(default_factory=dict)
    rank: dict = field(default_factory=dict)

    def next_hop(self, node, dest):
        if node == dest:
            return dest
        return self.parent[node]

    def mean_rank(self) -> float:
        ranks = [r for n, r in self.rank.items() if n != self.sink]
        return sum(ranks) / len(ranks)

    def path(self, node) -> list:
        out = [node]
        while node != self.sink:
            node = self.parent[node]
            out.append(node)
        return out


def connectivity(positions: dict, geometry: RadioGeometry) -> dict:
    ids = sorted(positions)
    adj = {i: [] for i in ids}
    for a_i, a in enumerate(ids):
        for b in ids[a_i + 1:]:
            if distance(positions[a], positions[b]) <= geometry.tx_range:
                adj[a].append(b)
                adj[b].append(a)
    return adj


def build_collect_tree(positions: dict, geometry: RadioGeometry, sink) -> CollectTree:
    """Breadth-first minimum-hop tree; the lowest-id candidate wins ties."""
    adj = connectivity(positions, geometry)
    tree = CollectTree(sink)
    tree.rank[sink] = 0
    frontier = deque([sink])
    while frontier:
        # the frontier is processed level by level in id order, so the first
        # parent that reaches a node is the lowest-id one at the previous level
        level = sorted(frontier)
        frontier.clear()
        for u in level:
            for v in adj[u]:
                if v not in tree.rank:
                    tree.rank[v] = tree.rank[u] + 1
                    tree.parent[v] = u
                    frontier.append(v)
    missing = sorted(set(positions) - set(tree.rank))
    if missing:
        raise DisconnectedTopology(f"nodes {missing} cannot reach sink {sink}")
    return tree


def random_positions(rng, count: int, side: float, sink=1) -> dict:
    """Uniform node placement in a side x side square; the sink sits at the (0, 0) corner."""
    xy = rng.uniform(0.0, side, size=(count - 1, 2))
    pos = {sink: Position(0.0, 0.0)}
    others = [i for i in range(1, count + 1) if i != sink]
    for i, (x, y) in zip(others, xy):
        pos[i] = Position(float(x), float(y))
    return pos


def random_collect_topology(rng_for_attempt, count=49, side=COLLECT_SIDE,
                            geometry: RadioGeometry = RadioGeometry(), sink=1, max_attempts=10_000):
    """Draw placements until the graph is connected.

    ``rng_for_attempt(k)`` returns the generator for attempt k.
    Returns ``(positions, tree, regenerations)``.
    """
    for attempt in range(max_attempts):
        pos = random_positions(rng_for_attempt(attempt), count, side, sink)
        try:
            return pos, build_collect_tree(pos, geometry, sink), attempt
        except DisconnectedTopology:
            continue
    raise DisconnectedTopology(f"no connected topology after {max_attempts} attempts")
