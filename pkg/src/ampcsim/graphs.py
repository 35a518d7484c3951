"""Graph data model, seeded instance generators, and the text file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed graph input (files or edge lists)."""


class Graph:
    """Undirected graph on dense vertex ids 0..n-1, optionally weighted.

    Simple graphs admit no self-loops and no duplicate edges; weighted
    graphs must have pairwise-distinct weights. Multigraph mode lifts the
    self-loop and duplicate restrictions (contraction outputs need both).
    """

    __slots__ = ("n", "edges", "weighted", "multigraph", "_adjacency", "_wadjacency")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple],
        weighted: bool = False,
        multigraph: bool = False,
    ):
        if n < 0:
            raise GraphFormatError("vertex count must be nonnegative")
        self.n = n
        self.weighted = weighted
        self.multigraph = multigraph
        normalized = []
        seen: set[tuple[int, int]] = set()
        weights: set = set()
        for edge in edges:
            if weighted:
                u, v, w = edge
            else:
                u, v = edge[0], edge[1]
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v and not multigraph:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if u > v:
                u, v = v, u
            if not multigraph:
                if (u, v) in seen:
                    raise GraphFormatError(f"duplicate edge ({u}, {v})")
                seen.add((u, v))
            if weighted:
                if w in weights:
                    raise GraphFormatError(f"duplicate edge weight {w}")
                weights.add(w)
                normalized.append((u, v, w))
            else:
                normalized.append((u, v))
        self.edges: list[tuple] = normalized
        self._adjacency: Optional[list[list[int]]] = None
        self._wadjacency = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        """Neighbor lists sorted ascending (the fixed rotation order)."""
        if self._adjacency is None:
            adj: list[list[int]] = [[] for _ in range(self.n)]
            for edge in self.edges:
                u, v = edge[0], edge[1]
                adj[u].append(v)
                if u != v:
                    adj[v].append(u)
            for lst in adj:
                lst.sort()
            self._adjacency = adj
        return self._adjacency

    def weighted_adjacency(self) -> list[list[tuple[float, int]]]:
        """Per-vertex (weight, neighbor) lists sorted by weight ascending."""
        if not self.weighted:
            raise GraphFormatError("graph is unweighted")
        if self._wadjacency is None:
            adj: list[list[tuple[float, int]]] = [[] for _ in range(self.n)]
            for u, v, w in self.edges:
                adj[u].append((w, v))
                adj[v].append((w, u))
            for lst in adj:
                lst.sort()
            self._wadjacency = adj
        return self._wadjacency

    def degrees(self) -> list[int]:
        return [len(lst) for lst in self.adjacency()]

    def __repr__(self) -> str:
        kind = "multigraph" if self.multigraph else "graph"
        return f"<{kind} n={self.n} m={self.m} weighted={self.weighted}>"


@dataclass
class ComponentLabeling:
    """Mapping from vertices to component representatives."""

    label: list[int]

    def canonical(self) -> list[int]:
        """Relabel by first occurrence so representative choice is immaterial."""
        remap: dict[int, int] = {}
        out = []
        for rep in self.label:
            if rep not in remap:
                remap[rep] = len(remap)
            out.append(remap[rep])
        return out

    def same_component(self, u: int, v: int) -> bool:
        return self.label[u] == self.label[v]

    def component_count(self) -> int:
        return len(set(self.label))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComponentLabeling):
            return NotImplemented
        return self.canonical() == other.canonical()


@dataclass
class RootedForest:
    """Parent mapping with self-looped roots; acyclic apart from the roots."""

    parent: list[int]
    roots: set[int] = field(default_factory=set)

    def __post_init__(self):
        if not self.roots:
            self.roots = {v for v, p in enumerate(self.parent) if p == v}
        for r in self.roots:
            if self.parent[r] != r:
                raise ValueError(f"root {r} must be its own parent")
        # Every vertex must reach a root without revisiting.
        n = len(self.parent)
        state = [0] * n  # 0 unvisited, 1 on path, 2 done
        for v in range(n):
            path = []
            x = v
            while state[x] == 0 and self.parent[x] != x:
                state[x] = 1
                path.append(x)
                x = self.parent[x]
                if state[x] == 1:
                    raise ValueError("parent pointers contain a cycle")
            for y in path:
                state[y] = 2


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed & ((1 << 64) - 1), spawn_key=(tag,)))


def gen_cycles(n: int, pieces: int, seed: int) -> Graph:
    """A vertex-permuted single n-cycle, or two disjoint n/2-cycles."""
    if pieces not in (1, 2):
        raise ValueError("pieces must be 1 or 2")
    if pieces == 1 and n < 3:
        raise ValueError("a simple cycle needs n >= 3")
    if pieces == 2:
        if n % 2:
            raise ValueError("two equal cycles need even n")
        if n < 6:
            raise ValueError("two simple cycles need n >= 6")
    order = _rng(seed, 0xC1).permutation(n)
    edges = []
    bounds = [(0, n)] if pieces == 1 else [(0, n // 2), (n // 2, n)]
    for lo, hi in bounds:
        for i in range(lo, hi):
            j = lo + (i - lo + 1) % (hi - lo)
            edges.append((int(order[i]), int(order[j])))
    return Graph(n, edges)


def gen_random_graph(n: int, m: int, seed: int, weighted: bool = False) -> Graph:
    """Uniform simple graph with m edges; weights are a seeded permutation
    of 1..m when requested, so they are distinct by construction."""
    limit = n * (n - 1) // 2
    if m > limit:
        raise ValueError(f"m={m} infeasible for n={n} (max {limit})")
    rng = _rng(seed, 0x47)
    chosen: set[int] = set()
    while len(chosen) < m:
        need = m - len(chosen)
        draw = rng.integers(0, limit, size=max(64, int(need * 1.3)))
        for code in draw:
            if len(chosen) >= m:
                break
            chosen.add(int(code))
    edges = []
    for code in sorted(chosen):
        # Decode a linear index into the (u < v) pair grid.
        u = int((1 + math.isqrt(1 + 8 * code)) // 2)
        v = code - u * (u - 1) // 2
        edges.append((int(v), int(u)))
    if weighted:
        weights = rng.permutation(m) + 1
        edges = [(u, v, int(w)) for (u, v), w in zip(edges, weights)]
    return Graph(n, edges, weighted=weighted)


def gen_random_forest(n: int, trees: int, seed: int) -> Graph:
    """Random-attachment forest with exactly ``trees`` components."""
    if not 1 <= trees <= n:
        raise ValueError("need 1 <= trees <= n")
    rng = _rng(seed, 0xF0)
    order = rng.permutation(n)
    edges = []
    for i in range(trees, n):
        j = int(rng.integers(0, i))
        edges.append((int(order[i]), int(order[j])))
    return Graph(n, edges)


def write_graph(graph: Graph, fileobj) -> None:
    header = f"{graph.n} {graph.m}"
    if graph.weighted:
        header += " w"
    fileobj.write(header + "\n")
    for edge in graph.edges:
        fileobj.write(" ".join(str(x) for x in edge) + "\n")


def read_graph(fileobj, multigraph: bool = False) -> Graph:
    """Parse the plain-text format: first line "n m [w]", then one edge per
    line. Self-loops and duplicates are rejected outside multigraph mode;
    duplicate weights are always rejected."""
    lines = [ln.strip() for ln in fileobj if ln.strip()]
    if not lines:
        raise GraphFormatError("empty graph file")
    head = lines[0].split()
    if len(head) not in (2, 3):
        raise GraphFormatError(f"bad header {lines[0]!r}")
    weighted = len(head) == 3 and head[2] == "w"
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise GraphFormatError(f"bad header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise GraphFormatError(f"expected {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != (3 if weighted else 2):
            raise GraphFormatError(f"bad edge line {ln!r}")
        if weighted:
            edges.append((int(parts[0]), int(parts[1]), int(parts[2])))
        else:
            edges.append((int(parts[0]), int(parts[1])))
    return Graph(n, edges, weighted=weighted, multigraph=multigraph)
