"""Sample-and-traverse algorithms on cycles and linked lists: shrink,
cycle counting, cycle connectivity, and list ranking.

All traversals run through the simulator: one round per contraction level,
one metered query per pointer followed. Sampling decisions are hash-based
and item-keyed, so they do not depend on machine assignment and cost no
extra queries during traversal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import CapacityError, NonTerminationError, StructureError
from .graphs import ComponentLabeling, Graph
from .runtime import ModelConfig, Simulator, item_coin, partition_to_machines


def orient_cycles(graph: Graph) -> tuple[dict[int, int], dict[int, int]]:
    """Fix a traversal orientation (succ, pred) on a disjoint union of cycles.

    Every vertex must have degree exactly 2 counting multiplicity; parallel
    edges form 2-cycles and a self-loop is a legal 1-cycle.
    """
    incidence: dict[int, list[tuple[int, int]]] = {}
    for idx, edge in enumerate(graph.edges):
        u, v = edge[0], edge[1]
        incidence.setdefault(u, []).append((idx, v))
        incidence.setdefault(v, []).append((idx, u))
    for v, inc in incidence.items():
        if len(inc) != 2:
            raise StructureError(f"vertex {v} has degree {len(inc)}, expected 2")
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    used = [False] * graph.m
    for start in incidence:
        if start in succ:
            continue
        v = start
        while True:
            edge_idx = next(
                (i for i, _ in incidence[v] if not used[i]),
                None,
            )
            if edge_idx is None:
                raise StructureError("edge incidences do not close into cycles")
            used[edge_idx] = True
            e = graph.edges[edge_idx]
            w = e[1] if e[0] == v else e[0]
            succ[v] = w
            pred[w] = v
            v = w
            if v == start:
                break
    return succ, pred


def cycles_of(succ: dict[int, int]) -> list[list[int]]:
    """Decompose an orientation into its cycles (each listed from min id)."""
    seen: set[int] = set()
    out = []
    for start in succ:
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        v = succ[start]
        while v != start:
            cyc.append(v)
            seen.add(v)
            v = succ[v]
        pivot = cyc.index(min(cyc))
        out.append(cyc[pivot:] + cyc[:pivot])
    return out


def orientation_graph(succ: dict[int, int], n: int) -> Graph:
    """The multigraph carried by an orientation: one edge per succ pointer."""
    return Graph(n, [(v, w) for v, w in succ.items()], multigraph=True)


@dataclass
class ShrinkResult:
    graph: Graph
    sample_map: dict[int, tuple[int, int]]
    iteration_sizes: list[int]
    levels: list[dict[int, int]]          # succ map per level, level 0 = input
    level_generations: list[int]          # store generation holding each level
    simulator: Simulator = field(repr=False, default=None)


class _CycleState:
    """Mutable traversal state shared by shrink-based algorithms."""

    def __init__(self, graph: Graph, config: ModelConfig, sim: Optional[Simulator] = None):
        self.config = config
        succ, pred = orient_cycles(graph)
        self.n0 = len(succ)
        self.succ = succ
        self.pred = pred
        if sim is None:
            self.sim = Simulator(
                config, initial=[(v, (pred[v], s)) for v, s in succ.items()]
            )
        else:
            # A shared simulator does not hold our records yet; write them.
            self.sim = sim
            parts = partition_to_machines(sorted(succ), config, sim.round_index + 1)

            def setup(ctx):
                for v in parts[ctx.machine_id]:
                    ctx.write(v, (pred[v], succ[v]))

            sim.run_round(setup)
        self.levels = [dict(succ)]
        self.level_generations = [self.sim.round_index]
        self.sample_map: dict[int, tuple[int, int]] = {}

    def size(self) -> int:
        return len(self.succ)

    def sample(self, probability: float) -> set[int]:
        tag = (self.sim.round_index << 8) | 0x5A
        seed = self.config.seed
        chosen = {v for v in self.succ if item_coin(seed, tag, v) < probability}
        # A cycle that loses every vertex would vanish; force its lowest id
        # back in so desk-scale runs stay total.
        for cyc in cycles_of(self.succ):
            if not any(v in chosen for v in cyc):
                chosen.add(min(cyc))
        return chosen

    def iterate(self, probability: float, forced: Optional[set[int]] = None) -> None:
        """One sample-and-traverse level: contract onto the sampled set."""
        samples = self.sample(probability) if forced is None else set(forced)
        parts = partition_to_machines(sorted(samples), self.config, self.sim.round_index + 1)
        new_succ: dict[int, int] = {}
        new_pred: dict[int, int] = {}
        sample_map = {}

        def program(ctx):
            for v in parts[ctx.machine_id]:
                record = ctx.query(v)
                left, right = record
                while right not in samples:
                    right = ctx.query(right)[1]
                while left not in samples:
                    left = ctx.query(left)[0]
                sample_map[v] = (left, right)
                new_succ[v] = right
                new_pred[v] = left
                ctx.write(v, (left, right))

        self.sim.run_round(program)
        self.succ = new_succ
        self.pred = new_pred
        self.sample_map = sample_map
        self.levels.append(dict(new_succ))
        self.level_generations.append(self.sim.round_index)


def shrink(
    graph: Graph,
    delta: float,
    t: int,
    config: ModelConfig,
    sim: Optional[Simulator] = None,
    initial_n: Optional[int] = None,
    sample_sets: Optional[Sequence[set[int]]] = None,
) -> ShrinkResult:
    """Contract a union of cycles onto vertex samples for t iterations.

    Each vertex survives with probability n**(-delta/2) per iteration
    (n = initial vertex count); survivors reconnect to the nearest sampled
    vertex in each direction. ``sample_sets`` overrides the per-iteration
    samples, which makes hand traces reproducible.
    """
    state = _CycleState(graph, config, sim)
    base = initial_n if initial_n is not None else state.n0
    probability = min(1.0, max(base, 2) ** (-delta / 2.0))
    sizes = [state.size()]
    for i in range(t):
        forced = sample_sets[i] if sample_sets is not None else None
        state.iterate(probability, forced=forced)
        sizes.append(state.size())
    return ShrinkResult(
        graph=orientation_graph(state.succ, graph.n),
        sample_map=dict(state.sample_map),
        iteration_sizes=sizes,
        levels=state.levels,
        level_generations=state.level_generations,
        simulator=state.sim,
    )


def shrink_iteration_budget(epsilon: float) -> int:
    return math.ceil(2.0 * (1.0 - epsilon) / epsilon)


@dataclass
class TwoCycleResult:
    cycles: int
    iterations: int
    residual_vertices: int
    simulator: Simulator = field(repr=False, default=None)


def two_cycle(graph: Graph, config: ModelConfig) -> TwoCycleResult:
    """Count the cycles of a one-or-two-cycle instance.

    Shrinks for ceil(2(1-eps)/eps) iterations, allows one catch-up
    iteration, then solves the residual on a single designated machine.
    """
    state = _CycleState(graph, config)
    probability = min(1.0, max(state.n0, 2) ** (-config.epsilon / 2.0))
    t = shrink_iteration_budget(config.epsilon)
    iterations = 0
    for _ in range(t):
        state.iterate(probability)
        iterations += 1
    capacity = config.budget_limit
    if state.size() > capacity:
        state.iterate(probability)
        iterations += 1
    if state.size() > capacity:
        raise CapacityError(
            f"residual of {state.size()} vertices exceeds single-machine "
            f"capacity {capacity}; the iteration count is mis-set"
        )

    survivors = sorted(state.succ)
    residual: dict[int, int] = {}

    def solve(ctx):
        if ctx.machine_id != 0:
            return
        for v in survivors:
            residual[v] = ctx.query(v)[1]

    state.sim.run_round(solve)
    count = len(cycles_of(residual))
    return TwoCycleResult(
        cycles=count,
        iterations=iterations,
        residual_vertices=len(survivors),
        simulator=state.sim,
    )


@dataclass
class CycleConnResult:
    labeling: ComponentLabeling
    search_lengths: dict[int, int]
    residual_size: int
    simulator: Simulator = field(repr=False, default=None)


def cycle_conn(
    graph: Graph,
    config: ModelConfig,
    shrink_iterations: Optional[int] = None,
) -> CycleConnResult:
    """Label the components of a disjoint union of cycles.

    After shrinking, every surviving vertex searches one direction (its
    successor pointers) until it meets a lower-priority-rank vertex or
    completes the loop; the priority minimum of each cycle becomes the
    representative. Labels are then unwound level by level onto all input
    vertices.
    """
    state = _CycleState(graph, config)
    probability = min(1.0, max(state.n0, 2) ** (-config.epsilon / 2.0))
    if shrink_iterations is None:
        shrink_iterations = math.ceil((2.0 - config.epsilon) / config.epsilon)
    for _ in range(shrink_iterations):
        state.iterate(probability)

    survivors = sorted(state.succ)
    rank_tag = (state.sim.round_index << 8) | 0x7C
    rank = {v: (item_coin(config.seed, rank_tag, v), v) for v in survivors}
    parts = partition_to_machines(survivors, config, state.sim.round_index + 1)
    stop_at: dict[int, int] = {}
    search_lengths: dict[int, int] = {}

    def search(ctx):
        for v in parts[ctx.machine_id]:
            steps = 0
            x = v
            while True:
                x = ctx.query(x)[1]
                steps += 1
                if rank[x] < rank[v] or x == v:
                    break
            stop_at[v] = x
            search_lengths[v] = steps

    state.sim.run_round(search)

    rep: dict[int, int] = {}
    for v in survivors:
        path = []
        x = v
        while x not in rep and stop_at[x] != x:
            path.append(x)
            x = stop_at[x]
        final = rep.get(x, x)
        rep[x] = final
        for y in path:
            rep[y] = final

    # Unwind the contraction levels so every input vertex learns its label.
    labels: dict[int, int] = dict(rep)
    for level in range(len(state.levels) - 2, -1, -1):
        gen = state.level_generations[level]
        upper = set(state.levels[level + 1])
        lower_heads = sorted(upper)
        level_parts = partition_to_machines(lower_heads, config, state.sim.round_index + 1)

        def unwind(ctx, gen=gen, upper=upper, level_parts=level_parts):
            for v in level_parts[ctx.machine_id]:
                lab = labels[v]
                x = ctx.query(v, generation=gen)[1]
                while x not in upper:
                    labels[x] = lab
                    ctx.write(x, lab)
                    x = ctx.query(x, generation=gen)[1]

        state.sim.run_round(unwind)

    label_list = [labels.get(v, v) for v in range(graph.n)]
    return CycleConnResult(
        labeling=ComponentLabeling(label_list),
        search_lengths=search_lengths,
        residual_size=len(survivors),
        simulator=state.sim,
    )


@dataclass
class RankedList:
    order: list[int]
    ranks: dict[int, int]
    weights_per_level: list[dict[int, int]]
    level_samples: list[set[int]]
    iterations: int
    simulator: Simulator = field(repr=False, default=None)


def rank_lists(
    successor: dict[int, Optional[int]],
    heads: Sequence[int],
    config: ModelConfig,
    sim: Optional[Simulator] = None,
) -> RankedList:
    """Rank every element of one or more disjoint linked chains.

    The contraction loop keeps heads sampled at every level, absorbs each
    gap's weight into the sample preceding it, solves the residual weighted
    problem on one machine, and unwinds ranks level by level.
    """
    total = len(successor)
    seen: set[int] = set()
    for head in heads:
        x: Optional[int] = head
        while x is not None:
            if x in seen:
                raise StructureError("successor chain revisits an element")
            seen.add(x)
            if x not in successor:
                raise StructureError(f"element {x} missing from successor map")
            x = successor[x]
    if len(seen) != total:
        raise StructureError("successor map has elements unreachable from the heads")

    if sim is None:
        sim = Simulator(config, initial=[(v, (s, 1)) for v, s in successor.items()])
    else:
        parts = partition_to_machines(sorted(successor), config, sim.round_index + 1)

        def setup(ctx):
            for v in parts[ctx.machine_id]:
                ctx.write(v, (successor[v], 1))

        sim.run_round(setup)
    head_set = set(heads)
    weights: dict[int, int] = {v: 1 for v in successor}
    succ: dict[int, Optional[int]] = dict(successor)
    levels_succ = [dict(succ)]
    levels_weight = [dict(weights)]
    level_generations = [sim.round_index]
    level_samples: list[set[int]] = []

    threshold = max(1, math.ceil(max(total, 2) ** config.epsilon))
    probability = min(1.0, max(total, 2) ** (-config.epsilon / 2.0))
    cap = shrink_iteration_budget(config.epsilon) + 1
    iterations = 0

    while len(succ) > threshold and iterations < cap:
        tag = (sim.round_index << 8) | 0x1E
        samples = {
            v for v in succ if v in head_set or item_coin(config.seed, tag, v) < probability
        }
        level_samples.append(set(samples))
        parts = partition_to_machines(sorted(samples), config, sim.round_index + 1)
        new_succ: dict[int, Optional[int]] = {}
        new_weights: dict[int, int] = {}
        gen = level_generations[-1]

        def contract(ctx, parts=parts, samples=samples, gen=gen):
            for v in parts[ctx.machine_id]:
                record = ctx.query(v, generation=gen)
                nxt, w = record
                absorbed = w
                while nxt is not None and nxt not in samples:
                    step, step_w = ctx.query(nxt, generation=gen)
                    absorbed += step_w
                    nxt = step
                new_succ[v] = nxt
                new_weights[v] = absorbed
                ctx.write(v, (nxt, absorbed))

        sim.run_round(contract)
        succ, weights = new_succ, new_weights
        levels_succ.append(dict(succ))
        levels_weight.append(dict(weights))
        level_generations.append(sim.round_index)
        iterations += 1

    if len(succ) > config.budget_limit:
        raise CapacityError(
            f"residual list of {len(succ)} elements exceeds capacity {config.budget_limit}"
        )

    # Solve the residual weighted problem on machine 0.
    ranks: dict[int, int] = {}
    final_gen = level_generations[-1]

    def solve(ctx):
        if ctx.machine_id != 0:
            return
        for head in heads:
            if head not in succ:
                continue
            rank = 0
            x: Optional[int] = head
            while x is not None:
                nxt, w = ctx.query(x, generation=final_gen)
                ranks[x] = rank
                rank += w
                x = nxt

    sim.run_round(solve)

    # Unwind: each ranked vertex ranks the gap it absorbed.
    for level in range(len(levels_succ) - 2, -1, -1):
        gen = level_generations[level]
        upper = set(levels_succ[level + 1])
        ranked_heads = sorted(upper)
        parts = partition_to_machines(ranked_heads, config, sim.round_index + 1)

        def unwind(ctx, parts=parts, upper=upper, gen=gen):
            for v in parts[ctx.machine_id]:
                nxt, w = ctx.query(v, generation=gen)
                running = ranks[v] + w
                while nxt is not None and nxt not in upper:
                    ranks[nxt] = running
                    ctx.write(nxt, running)
                    step, step_w = ctx.query(nxt, generation=gen)
                    running += step_w
                    nxt = step

        sim.run_round(unwind)

    order = sorted(successor, key=lambda v: ranks[v])
    return RankedList(
        order=order,
        ranks=ranks,
        weights_per_level=levels_weight,
        level_samples=level_samples,
        iterations=iterations,
        simulator=sim,
    )


def list_ranking(
    successor: dict[int, Optional[int]],
    head: int,
    config: ModelConfig,
) -> RankedList:
    """Rank a single linked list with a known head: ranks[v] = distance
    from the head in original list units."""
    result = rank_lists(successor, [head], config)
    if result.ranks.get(head) != 0:
        raise NonTerminationError("head did not receive rank 0")
    return result
