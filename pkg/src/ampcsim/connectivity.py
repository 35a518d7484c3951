"""Leader-contraction connectivity and minimum spanning forest.

One phase: every vertex explores its neighborhood up to the current budget
d (BFS for connectivity, a local Prim run for MSF), leaders are sampled
with probability min(1, c_L * ln n / d), every vertex hooks onto its
lowest-id incident leader (falling back to its lowest-id neighbor when its
degree is below d), hook chains and cycles resolve to minimum-id roots,
and the graph contracts. Budgets grow as d**1.4 up to n**(epsilon/3).

Instances with m below n * ln(n)**2 first shrink their vertex count by the
randomized pointer-merge procedure, which is bulk-synchronous and therefore
charged like a primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LeaderContractionError, NonTerminationError
from .graphs import ComponentLabeling, Graph
from .primitives import mpc_sort
from .runtime import ModelConfig, Simulator, item_coins, item_hash, partition_to_machines

_MAIN_LOOP_CAP = 64
# Vertex-shrinking is asymptotic machinery; graphs this small go straight
# to the main loop.
_REDUCTION_FLOOR = 32


@dataclass
class BudgetSchedule:
    """Exploration budget d: starts at sqrt(T / n), grows by d**1.4,
    capped at n**(epsilon/3). Kept real-valued; floors apply at use."""

    d: float
    cap: float
    history: list[float] = field(default_factory=list)

    @classmethod
    def start(cls, n_active: int, config: ModelConfig) -> "BudgetSchedule":
        cap = max(2.0, float(math.floor(max(config.n, 2) ** (config.epsilon / 3.0))))
        total = config.space_multiplier * (config.n + config.m)
        d0 = max(2.0, float(math.floor(math.sqrt(total / max(1, n_active)))))
        d = min(d0, cap)
        return cls(d=d, cap=cap, history=[d])

    def advance(self) -> None:
        self.d = min(self.d**1.4, self.cap)
        self.history.append(self.d)

    def exploration_budget(self) -> int:
        return max(2, math.floor(self.d))


def resolve_pointers(hook: dict[int, int]) -> dict[int, int]:
    """Collapse a functional pointer graph to roots.

    Chains follow to their endpoint; each pointer cycle keeps its minimum
    id as the root. Every hop follows a graph edge, so the resolved map
    only merges vertices inside one component.
    """
    result: dict[int, int] = {}
    for start in hook:
        if start in result:
            continue
        path: list[int] = []
        pos: dict[int, int] = {}
        x = start
        while True:
            if x in result:
                root = result[x]
                break
            if x in pos:
                cycle = path[pos[x] :]
                root = min(cycle)
                break
            pos[x] = len(path)
            path.append(x)
            nxt = hook[x]
            if nxt == x:
                root = x
                break
            x = nxt
        for y in path:
            result[y] = root
        result[start] = root
    return result


def _write_adjacency_round(sim: Simulator, graph: Graph, config: ModelConfig, weighted: bool) -> int:
    """Store the graph as (vertex, slot) records; returns the generation.

    Records are spread across machines individually so no machine's write
    load depends on the degree distribution.
    """
    records: list[tuple[tuple[int, int], tuple]] = []
    if weighted:
        adj_w = graph.weighted_adjacency()
        for v in range(graph.n):
            deg = len(adj_w[v])
            for i, (w, u) in enumerate(adj_w[v]):
                records.append(((v, i), (u, w, deg)))
    else:
        adj = graph.adjacency()
        for v in range(graph.n):
            deg = len(adj[v])
            for i, u in enumerate(adj[v]):
                records.append(((v, i), (u, deg)))
    parts = partition_to_machines(range(len(records)), config, sim.round_index + 1)

    def program(ctx):
        for idx in parts[ctx.machine_id]:
            key, value = records[idx]
            ctx.write(key, value)

    sim.run_round(program)
    return sim.round_index


def increase_degree(
    graph: Graph,
    d: int,
    config: ModelConfig,
    sim: Optional[Simulator] = None,
) -> Graph:
    """Add an edge from each vertex to the first d vertices its BFS visits.

    Per-vertex queries are capped at d*d, which the visit limit already
    implies for simple graphs.
    """
    if d < 1:
        raise ValueError("budget d must be >= 1")
    if sim is None:
        sim = Simulator(config)
    gen = _write_adjacency_round(sim, graph, config, weighted=False)
    adj = graph.adjacency()
    vertices = [v for v in range(graph.n) if adj[v]]
    parts = partition_to_machines(vertices, config, sim.round_index + 1)
    found_sets: dict[int, list[int]] = {}

    def program(ctx):
        for v in parts[ctx.machine_id]:
            visited = {v}
            found: list[int] = []
            queue = [v]
            head = 0
            reads = 0
            cap = d * d
            while head < len(queue) and len(found) < d and reads < cap:
                x = queue[head]
                head += 1
                record = ctx.query((x, 0), generation=gen)
                reads += 1
                if record is None:
                    continue
                u, deg = record
                i = 0
                while True:
                    if u not in visited:
                        visited.add(u)
                        found.append(u)
                        queue.append(u)
                        if len(found) >= d:
                            break
                    i += 1
                    if i >= deg or reads >= cap:
                        break
                    u, deg = ctx.query((x, i), generation=gen)
                    reads += 1
            found_sets[v] = found

    sim.run_round(program)
    edges = {(min(e[0], e[1]), max(e[0], e[1])) for e in graph.edges}
    for v, found in found_sets.items():
        for u in found:
            edges.add((min(v, u), max(v, u)))
    return Graph(graph.n, sorted(edges))


def _pointer_map(graph: Graph, seed: int) -> tuple[dict[int, int], list[tuple[int, int]]]:
    """One round of the six-line vertex-merging procedure.

    Returns the merge map over the non-isolated vertices and the pointer
    edges along which merges happened (each is a graph edge).
    """
    n = graph.n
    if graph.m == 0:
        return {}, []
    us = np.fromiter((e[0] for e in graph.edges), dtype=np.int64, count=graph.m)
    vs = np.fromiter((e[1] for e in graph.edges), dtype=np.int64, count=graph.m)

    # Line 1: point every vertex at its minimum-id neighbor.
    out = np.full(n, n, dtype=np.int64)
    np.minimum.at(out, us, vs)
    np.minimum.at(out, vs, us)
    active = out < n
    has_out = active.copy()

    # Line 2: each mutual pair drops one arrow; the smaller id keeps none.
    idx = np.arange(n)
    safe_out = np.where(active, out, 0)
    mutual = active & (out[safe_out] == idx) & active[safe_out]
    has_out &= ~(mutual & (idx < out))

    # Line 3: vertices with two or more incoming arrows drop their own.
    indeg = np.bincount(out[has_out], minlength=n + 1)[:n]
    has_out &= ~(indeg >= 2)

    # Line 4: those vertices absorb all their arrow neighbors; absorbed
    # vertices lose their other incoming arrows too.
    indeg3 = np.bincount(out[has_out], minlength=n + 1)[:n]
    centers = indeg3 >= 2
    merged_into_center = has_out & centers[np.where(has_out, out, 0)] & active
    mapping: dict[int, int] = {}
    merge_edges: list[tuple[int, int]] = []
    for v in np.flatnonzero(merged_into_center):
        mapping[int(v)] = int(out[v])
        merge_edges.append((int(v), int(out[v])))
    # Remove arrows into absorbed vertices, and the absorbed vertices' own.
    absorbed = np.zeros(n, dtype=bool)
    absorbed[np.flatnonzero(merged_into_center)] = True
    points_at_absorbed = has_out & absorbed[np.where(has_out, out, 0)]
    has_out &= ~points_at_absorbed
    has_out &= ~absorbed

    # Line 5: drop each surviving arrow with probability 2/3.
    coins = item_coins(seed, 0xE5, n)
    has_out &= coins >= 2.0 / 3.0

    # Line 6: merge the arrows that ended up isolated on both sides.
    tails = np.flatnonzero(has_out)
    heads = out[tails]
    deg = np.bincount(tails, minlength=n) + np.bincount(heads, minlength=n)
    lonely = (deg[tails] == 1) & (deg[heads] == 1)
    for t, h in zip(tails[lonely], heads[lonely]):
        mapping[int(t)] = int(h)
        merge_edges.append((int(t), int(h)))
    return mapping, merge_edges


def shrink_vertices_step(graph: Graph, seed: int) -> tuple[Graph, dict[int, int]]:
    """Apply one vertex-merging round and contract the graph accordingly.

    The mapping covers every vertex (identity where nothing merged) and
    only ever merges along edges, so components are preserved exactly.
    """
    partial, _ = _pointer_map(graph, seed)
    mapping = {v: partial.get(v, v) for v in range(graph.n)}
    edges = set()
    for e in graph.edges:
        a, b = mapping[e[0]], mapping[e[1]]
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return Graph(graph.n, sorted(edges)), mapping


def _non_isolated(graph: Graph) -> int:
    seen: set[int] = set()
    for e in graph.edges:
        seen.add(e[0])
        seen.add(e[1])
    return len(seen)


def reduction_step_cap(n: int) -> int:
    if n < 4:
        return 4
    return math.ceil(4.0 * math.log2(math.log2(n))) + 4


@dataclass
class ReduceResult:
    graph: Graph
    mapping: list[int]
    steps: int
    non_isolated_history: list[int]


def reduce_small_space(
    graph: Graph,
    config: ModelConfig,
    sim: Optional[Simulator] = None,
) -> ReduceResult:
    """Shrink the non-isolated vertex count by roughly log^2 n.

    Repeats the pointer-merge step until the count falls to
    n / ceil(log2 n)**2 or the step cap runs out. Bulk-synchronous, so
    each step is charged rather than traversed.
    """
    n = graph.n
    mapping = list(range(n))
    current = graph
    history = [_non_isolated(current)]
    target = max(1, math.ceil(n / max(1, math.ceil(math.log2(max(n, 2)))) ** 2))
    steps = 0
    cap = reduction_step_cap(n)
    while steps < cap and history[-1] > max(target, _REDUCTION_FLOOR):
        step_seed = item_hash(config.seed, 0xD0, steps)
        current, f = shrink_vertices_step(current, step_seed)
        mapping = [f[rep] for rep in mapping]
        steps += 1
        history.append(_non_isolated(current))
        if sim is not None:
            sim.charge(
                max(1, math.ceil(1.0 / config.epsilon)),
                history[-2] + 2 * current.m,
                "vertex-shrink",
            )
    return ReduceResult(graph=current, mapping=mapping, steps=steps, non_isolated_history=history)


def _sample_leaders(vertices, config: ModelConfig, d: float, tag: int) -> set[int]:
    p = min(1.0, config.leader_constant * math.log(max(config.n, 2)) / max(d, 1.0))
    if p >= 1.0:
        return set(vertices)
    return {v for v in vertices if item_hash(config.seed, tag, v) / 2.0**64 < p}


def _hook_to_leaders(
    neighborhoods: dict[int, list[int]],
    leaders: set[int],
    d: int,
) -> dict[int, int]:
    """The contraction rule: lowest-id incident leader, else lowest-id
    neighbor when degree < d, else fail unless the vertex leads itself."""
    hook: dict[int, int] = {}
    for v, nbrs in neighborhoods.items():
        leader_nbrs = [u for u in nbrs if u in leaders]
        if leader_nbrs:
            hook[v] = min(leader_nbrs)
        elif len(nbrs) < d:
            hook[v] = min(nbrs) if nbrs else v
        elif v in leaders:
            hook[v] = v
        else:
            raise LeaderContractionError(
                f"vertex {v} has degree {len(nbrs)} >= d={d} and no incident leader"
            )
    return hook


@dataclass
class ConnectivityResult:
    labeling: ComponentLabeling
    iterations: int
    schedule: Optional[BudgetSchedule]
    reduction: Optional[ReduceResult]
    simulator: Simulator = field(repr=False, default=None)


def connectivity(graph: Graph, config: ModelConfig) -> ConnectivityResult:
    """Component labels by iterated budgeted exploration and contraction."""
    sim = Simulator(config)
    mapping = list(range(graph.n))
    current = graph
    reduction = None
    if graph.m < graph.n * math.log(max(graph.n, 2)) ** 2:
        reduction = reduce_small_space(graph, config, sim)
        current = reduction.graph
        mapping = reduction.mapping

    schedule = BudgetSchedule.start(max(1, _non_isolated(current)), config)
    iterations = 0
    while current.m > 0:
        iterations += 1
        if iterations > _MAIN_LOOP_CAP:
            raise NonTerminationError("contraction loop exceeded its cap")
        d = schedule.exploration_budget()
        grown = increase_degree(current, d, config, sim)
        adj = grown.adjacency()
        active = {v: adj[v] for v in range(grown.n) if adj[v]}
        leaders = _sample_leaders(
            active.keys(), config, schedule.d, (sim.round_index << 8) | 0x1D
        )
        hook = _hook_to_leaders(active, leaders, d)
        f = resolve_pointers(hook)
        sim.charge(1, 2 * grown.m, "leader-collect")

        edges = set()
        for u, v in grown.edges:
            a, b = f.get(u, u), f.get(v, v)
            if a != b:
                edges.add((min(a, b), max(a, b)))
        current = Graph(grown.n, sorted(edges))
        sim.charge(1, grown.n + 2 * grown.m + 2 * current.m, "contract")
        mapping = [f.get(rep, rep) for rep in mapping]
        sim.charge(1, graph.n, "map-compose")
        schedule.advance()

    return ConnectivityResult(
        labeling=ComponentLabeling(mapping),
        iterations=iterations,
        schedule=schedule,
        reduction=reduction,
        simulator=sim,
    )


@dataclass
class LocalForest:
    """One vertex's budgeted Prim run: visited set and chosen tree edges."""

    center: int
    members: set[int]
    edges: list[tuple[int, int, float]]


def msf_increase_degree(
    graph: Graph,
    d: int,
    config: ModelConfig,
    sim: Optional[Simulator] = None,
) -> dict[int, LocalForest]:
    """Per-vertex Prim runs over weight-sorted adjacency, stopping once the
    local forest reaches d vertices (or the component is exhausted)."""
    import heapq

    if d < 1:
        raise ValueError("budget d must be >= 1")
    if sim is None:
        sim = Simulator(config)
    gen = _write_adjacency_round(sim, graph, config, weighted=True)
    adj = graph.weighted_adjacency()
    vertices = [v for v in range(graph.n) if adj[v]]
    parts = partition_to_machines(vertices, config, sim.round_index + 1)
    forests: dict[int, LocalForest] = {}

    def read_slot(ctx, x, i, reads):
        if i >= len(adj[x]):
            return None
        record = ctx.query((x, i), generation=gen)
        return record

    def program(ctx):
        for v in parts[ctx.machine_id]:
            members = {v}
            chosen: list[tuple[int, int, float]] = []
            reads = 0
            cap = d * d
            heap: list[tuple[float, int, int, int]] = []
            first = read_slot(ctx, v, 0, reads)
            reads += 1
            if first is not None:
                u, w, _deg = first
                heapq.heappush(heap, (w, v, 0, u))
            while heap and len(members) < d and reads < cap:
                w, x, i, u = heapq.heappop(heap)
                if i + 1 < len(adj[x]) and reads < cap:
                    nxt = read_slot(ctx, x, i + 1, reads)
                    reads += 1
                    if nxt is not None:
                        u2, w2, _deg = nxt
                        heapq.heappush(heap, (w2, x, i + 1, u2))
                if u in members:
                    continue
                members.add(u)
                chosen.append((x, u, w))
                if len(members) >= d or reads >= cap:
                    break
                nxt = read_slot(ctx, u, 0, reads)
                reads += 1
                if nxt is not None:
                    u2, w2, _deg = nxt
                    heapq.heappush(heap, (w2, u, 0, u2))
            forests[v] = LocalForest(center=v, members=members, edges=chosen)

    sim.run_round(program)
    for v in range(graph.n):
        if v not in forests:
            forests[v] = LocalForest(center=v, members={v}, edges=[])
    return forests


def _min_weight_subgraph(graph: Graph) -> tuple[Graph, dict[tuple[int, int], float]]:
    """Each vertex's minimum-weight incident edge; all of these belong to
    the minimum spanning forest."""
    best: dict[int, tuple[float, int]] = {}
    for u, v, w in graph.edges:
        if u not in best or (w, v) < best[u]:
            best[u] = (w, v)
        if v not in best or (w, u) < best[v]:
            best[v] = (w, u)
    pairs: dict[tuple[int, int], float] = {}
    for v, (w, u) in best.items():
        pairs[(min(u, v), max(u, v))] = w
    edges = sorted(pairs)
    return Graph(graph.n, edges), pairs


def _contract_weighted_min(graph: Graph, f: dict[int, int]) -> Graph:
    """Contract keeping the lightest edge of every parallel class."""
    best: dict[tuple[int, int], float] = {}
    for u, v, w in graph.edges:
        a, b = f.get(u, u), f.get(v, v)
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in best or w < best[key]:
            best[key] = w
    edges = sorted((a, b, w) for (a, b), w in best.items())
    return Graph(graph.n, edges, weighted=True)


@dataclass
class MsfResult:
    edges: set[tuple[int, int, float]]
    iterations: int
    committed_per_iteration: list[set[tuple[int, int, float]]]
    labeling: ComponentLabeling
    schedule: Optional[BudgetSchedule]
    simulator: Simulator = field(repr=False, default=None)


def msf(graph: Graph, config: ModelConfig) -> MsfResult:
    """The minimum spanning forest of a distinct-weight graph."""
    if not graph.weighted:
        raise ValueError("msf needs a weighted graph")
    sim = Simulator(config)
    sort_charge = mpc_sort(graph.edges, key=lambda e: e[2], epsilon=config.epsilon)
    sim.charge(sort_charge.rounds_charged, sort_charge.communication_charged, "weight-sort")

    weight_to_edge = {w: (u, v, w) for u, v, w in graph.edges}
    forest: set[tuple[int, int, float]] = set()
    committed: list[set[tuple[int, int, float]]] = []
    mapping = list(range(graph.n))
    current = graph

    # Sparse instances: merge along per-vertex minimum-weight edges first.
    if graph.m < graph.n * math.log(max(graph.n, 2)) ** 2:
        steps = 0
        cap = reduction_step_cap(graph.n)
        target = max(
            1, math.ceil(graph.n / max(1, math.ceil(math.log2(max(graph.n, 2)))) ** 2)
        )
        while steps < cap and _non_isolated(current) > max(target, _REDUCTION_FLOOR):
            pointer_graph, pair_weights = _min_weight_subgraph(current)
            step_seed = item_hash(config.seed, 0xB0, steps)
            partial, merge_edges = _pointer_map(pointer_graph, step_seed)
            if merge_edges:
                batch = set()
                for a, b in merge_edges:
                    w = pair_weights[(min(a, b), max(a, b))]
                    batch.add(weight_to_edge[w])
                forest |= batch
                committed.append(batch)
            f = {v: partial.get(v, v) for v in range(current.n)}
            current = _contract_weighted_min(current, f)
            mapping = [f[rep] for rep in mapping]
            steps += 1
            sim.charge(
                max(1, math.ceil(1.0 / config.epsilon)),
                _non_isolated(current) + 2 * current.m,
                "boruvka-shrink",
            )

    schedule = BudgetSchedule.start(max(1, _non_isolated(current)), config)
    iterations = 0
    while current.m > 0:
        iterations += 1
        if iterations > _MAIN_LOOP_CAP:
            raise NonTerminationError("contraction loop exceeded its cap")
        d = schedule.exploration_budget()
        forests = msf_increase_degree(current, d, config, sim)
        batch = set()
        for local in forests.values():
            for _, _, w in local.edges:
                batch.add(weight_to_edge[w])
        forest |= batch
        committed.append(batch)

        active = {v: local for v, local in forests.items() if len(local.members) > 1}
        leaders = _sample_leaders(
            active.keys(), config, schedule.d, (sim.round_index << 8) | 0x2D
        )
        hook: dict[int, int] = {}
        for v, local in active.items():
            leader_members = [x for x in local.members if x in leaders]
            if leader_members:
                hook[v] = min(leader_members)
            elif len(local.members) < d:
                others = local.members - {v}
                hook[v] = min(others) if others else v
            elif v in leaders:
                hook[v] = v
            else:
                raise LeaderContractionError(
                    f"vertex {v} reached budget d={d} with no leader in reach"
                )
        f = resolve_pointers(hook)
        sim.charge(1, 2 * current.m, "leader-collect")
        current = _contract_weighted_min(current, f)
        sim.charge(1, current.n + 2 * current.m, "contract")
        mapping = [f.get(rep, rep) for rep in mapping]
        sim.charge(1, graph.n, "map-compose")
        schedule.advance()

    return MsfResult(
        edges=forest,
        iterations=iterations,
        committed_per_iteration=committed,
        labeling=ComponentLabeling(mapping),
        schedule=schedule,
        simulator=sim,
    )


def spanning_forest(
    graph: Graph, config: ModelConfig
) -> tuple[set[tuple[int, int]], ComponentLabeling, MsfResult]:
    """Spanning forest via seeded distinct weights; also returns the full
    weighted result for callers that need the contraction metadata."""
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed & ((1 << 64) - 1), spawn_key=(0x5F,))
    )
    weights = rng.permutation(graph.m) + 1
    weighted = Graph(
        graph.n,
        [(u, v, int(w)) for (u, v), w in zip(graph.edges, weights)],
        weighted=True,
    )
    result = msf(weighted, config)
    edges = {(u, v) for u, v, _ in result.edges}
    return edges, result.labeling, result
