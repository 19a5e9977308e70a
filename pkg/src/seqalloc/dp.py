"""Exact best response via dynamic programming over reachable pick states.

A state (k, S) says: S is the set of items already identified as taken,
and on top of those the manipulator has picked k items not yet pinned
down.  Both components together fix the progress of the protocol, since
|S| + k picks have happened.  Three moves expand a state whose next
picker is known from the sequence:

* slot: the next picker is the manipulator; she banks an unspecified
  pick, moving to (k + 1, S),
* claim: some non-manipulator a is next and her favourite remaining item
  b is declared to be one of the manipulator's k banked picks, moving to
  (k - 1, S + b) and crediting u(b); agent a still has to move,
* pick: agent a actually takes b, moving to (k, S + b).

Backward induction over this graph maximizes the manipulator's total
utility; unresolved banked picks at the end of the sequence are free
grabs from the leftovers.  The graph is tiny in practice because only
states reachable through the non-manipulators' greedy behaviour exist:
every reachable S equals the union of the prefixes that the other agents
have scanned past, which caps the number of distinct sets well below
2^m (see :func:`state_set_bounds` for the implemented caps).

Two interchangeable state encodings are provided.  The item encoding
keys states by the taken set itself (a bitmask); the agent encoding keys
them by the vector of the non-manipulators' current favourite items,
which identifies the taken set uniquely on all reachable states.  Both
must and do produce identical graphs; the cross-check is part of the
test suite.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

from .core import (
    MANIPULATOR,
    Instance,
    ManipulationResult,
    ResourceLimitError,
    bundle_utility,
    profile_metrics,
    simulate,
)

ARC_SLOT = 0
ARC_CLAIM = 1
ARC_PICK = 2

DEFAULT_MAX_STATES = 2_000_000

_NO_ITEM = -1


class DpState(NamedTuple):
    """One dynamic-programming state: k banked picks on top of taken set."""

    banked: int
    taken: int  # bitmask over item indices


class Arc(NamedTuple):
    """Directed move between states; ``item`` is -1 for slot moves."""

    kind: int
    succ: int
    item: int


@dataclass
class StateGraph:
    """Reachable-state graph, in a fixed deterministic processing order.

    ``states[i]`` lists states level by level (level = picks so far),
    within a level by decreasing banked count; successors of a state
    therefore always appear later, so one reverse sweep computes values.
    ``values`` and ``choices`` stay None until backward induction ran.
    """

    representation: str
    num_items: int
    states: list[DpState]
    arcs: list[list[Arc]]
    root: int
    distinct_sets: int  # distinct taken sets with items still on the table
    values: list[int] | None = None
    choices: list[int] | None = None
    elapsed_ms: float = 0.0

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_arcs(self) -> int:
        return sum(len(out) for out in self.arcs)

    def taken_sets(self) -> set[frozenset[int]]:
        """All distinct taken sets, as item-index sets."""
        return {_mask_to_set(state.taken) for state in self.states}


def _mask_to_set(mask: int) -> frozenset[int]:
    items = []
    while mask:
        low = mask & -mask
        items.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(items)


def build_state_graph(
    instance: Instance,
    representation: str = "auto",
    max_states: int = DEFAULT_MAX_STATES,
    threads: int = 1,
) -> StateGraph:
    """Expand every reachable state from (0, empty set).

    ``representation`` picks the deduplication key: "item" keys by taken
    set, "agent" by the non-manipulators' favourite vector, "auto" lets
    the implementation choose.  The resulting graphs are identical.
    ``max_states`` caps the expansion; ``threads`` > 1 expands the states
    of one level concurrently (the merge order stays deterministic, so
    results are independent of the thread count).
    """
    if representation == "auto":
        representation = "agent" if instance.num_agents >= 3 else "item"
    if representation not in ("item", "agent"):
        raise ValueError(f"unknown state representation {representation!r}")

    start = time.perf_counter()
    m = instance.num_items
    sequence = instance.sequence
    by_agent = representation == "agent"
    others = range(1, instance.num_agents)

    # Per-state bookkeeping, indexed by state id.
    banked: list[int] = [0]
    taken: list[int] = [0]
    favs: list[tuple[int, ...]] = []  # agent representation only
    arcs: list[list[Arc]] = [[]]

    def favourites(mask: int, start_positions: tuple[int, ...]) -> tuple[int, ...]:
        out = []
        for a in others:
            row = instance.profile[a]
            pos = start_positions[a - 1]
            while pos < m and mask >> row[pos] & 1:
                pos += 1
            out.append(row[pos] if pos < m else _NO_ITEM)
        return tuple(out)

    position = [  # position[a - 1][i] = index of item i in agent a's ranking
        {item: pos for pos, item in enumerate(instance.profile[a])} for a in others
    ]

    if by_agent:
        favs.append(favourites(0, tuple(0 for _ in others)))
        index: dict = {(0, favs[0]): 0}
    else:
        index = {(0, 0): 0}

    # States of the level being expanded, bucketed by banked count.
    buckets: dict[tuple[int, int], list[int]] = {(0, 0): [0]}
    order: list[int] = []

    def expand(sid: int) -> list[tuple[int, int, int, int]]:
        """Successor descriptors (kind, new_banked, new_mask, item) of one state."""
        k = banked[sid]
        mask = taken[sid]
        level = k + mask.bit_count()
        picker = sequence[level]
        if picker == MANIPULATOR:
            return [(ARC_SLOT, k + 1, mask, _NO_ITEM)]
        if by_agent:
            fav = favs[sid][picker - 1]
        else:
            row = instance.profile[picker]
            pos = 0
            while mask >> row[pos] & 1:
                pos += 1
            fav = row[pos]
        new_mask = mask | 1 << fav
        moves = []
        if k > 0:
            moves.append((ARC_CLAIM, k - 1, new_mask, fav))
        moves.append((ARC_PICK, k, new_mask, fav))
        return moves

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for level in range(m + 1):
            for k in range(min(level, instance.manipulator_turns()), -1, -1):
                pending = buckets.pop((level, k), None)
                if not pending:
                    continue
                order.extend(pending)
                if level == m:
                    continue
                if pool is not None and len(pending) > 1:
                    expansions = list(pool.map(expand, pending))
                else:
                    expansions = [expand(sid) for sid in pending]
                for sid, moves in zip(pending, expansions):
                    out = arcs[sid]
                    for kind, new_k, new_mask, item in moves:
                        if by_agent:
                            if kind == ARC_SLOT:
                                fav = favs[sid]
                            else:
                                base = tuple(position[a - 1][f] if f != _NO_ITEM else m for a, f in zip(others, favs[sid]))
                                fav = favourites(new_mask, base)
                            key = (new_k, fav)
                        else:
                            key = (new_k, new_mask)
                        succ = index.get(key)
                        if succ is None:
                            succ = len(banked)
                            if succ >= max_states:
                                raise ResourceLimitError(
                                    f"state graph exceeds max_states={max_states}; "
                                    "raise the cap to solve this instance"
                                )
                            index[key] = succ
                            banked.append(new_k)
                            taken.append(new_mask)
                            arcs.append([])
                            if by_agent:
                                favs.append(fav)
                            new_level = new_k + new_mask.bit_count()
                            buckets.setdefault((new_level, new_k), []).append(succ)
                        out.append(Arc(kind, succ, item))
    finally:
        if pool is not None:
            pool.shutdown(wait=False)

    # Reindex into processing order so successors always come later.
    rank = {sid: i for i, sid in enumerate(order)}
    states = [DpState(banked[sid], taken[sid]) for sid in order]
    ordered_arcs = [
        [Arc(kind, rank[succ], item) for kind, succ, item in arcs[sid]] for sid in order
    ]
    # The spent position (every item identified) is not a picking position;
    # the closed-form caps count sets where someone can still move, so it
    # stays out of distinct_sets.  It still appears in states and taken_sets.
    full = (1 << m) - 1
    graph = StateGraph(
        representation=representation,
        num_items=m,
        states=states,
        arcs=ordered_arcs,
        root=0,
        distinct_sets=len({state.taken for state in states if state.taken != full}),
    )
    graph.elapsed_ms = (time.perf_counter() - start) * 1000.0
    return graph


def backward_induction(graph: StateGraph, utilities: tuple[int, ...]) -> int:
    """Fill ``graph.values``/``graph.choices`` and return the root value.

    Terminal states pay for the banked picks all at once: the manipulator
    grabs the k best leftovers, which at the end of the sequence is all
    of them.  Ties between claiming and letting an agent pick go to the
    claim, which keeps the recovered ranking deterministic.
    """
    total = sum(utilities)
    values = [0] * len(graph.states)
    choices = [0] * len(graph.states)
    for sid in range(len(graph.states) - 1, -1, -1):
        out = graph.arcs[sid]
        if not out:
            values[sid] = total - _mask_utility(graph.states[sid].taken, utilities)
            continue
        best = None
        best_arc = 0
        for arc_index, arc in enumerate(out):
            value = values[arc.succ]
            if arc.kind == ARC_CLAIM:
                value += utilities[arc.item]
            if best is None or value > best:
                best = value
                best_arc = arc_index
        values[sid] = best
        choices[sid] = best_arc
    graph.values = values
    graph.choices = choices
    return values[graph.root]


def _mask_utility(mask: int, utilities: tuple[int, ...]) -> int:
    value = 0
    while mask:
        low = mask & -mask
        value += utilities[low.bit_length() - 1]
        mask ^= low
    return value


def _recover_ranking(graph: StateGraph, instance: Instance) -> tuple[tuple[int, ...], frozenset[int]]:
    """Read an optimal report off the chosen arcs.

    Claimed items fill the manipulator's pick turns in claim order; banked
    picks still unresolved at the end are spent on the leftovers in
    truthful order.  Everything she does not pick is appended in truthful
    order, which cannot change the outcome for her.
    """
    assert graph.values is not None and graph.choices is not None
    claimed: list[int] = []
    sid = graph.root
    while graph.arcs[sid]:
        arc = graph.arcs[sid][graph.choices[sid]]
        if arc.kind == ARC_CLAIM:
            claimed.append(arc.item)
        sid = arc.succ
    final = graph.states[sid]
    truthful = instance.profile[MANIPULATOR]
    leftovers = [item for item in truthful if not final.taken >> item & 1]
    mine = claimed + leftovers
    taken_by_me = set(mine)
    ranking = tuple(mine + [item for item in truthful if item not in taken_by_me])
    return ranking, frozenset(mine)


def state_set_bounds(m: int, n: int, mu_manipulator: int, range_max: int | None) -> dict:
    """The four proven caps on the number of distinct taken sets.

    Keys follow the stats report: ``m_pow`` is m**(n-1), ``mu`` is
    m*(mu+1)**(n-1), ``rg_n`` is m*(2*rg)**(n-2) (needs at least three
    agents), ``rg`` is m*4**rg (needs a second agent for rg to exist).
    Inapplicable bounds are None.
    """
    bounds: dict = {
        "m_pow": m ** (n - 1),
        "mu": m * (mu_manipulator + 1) ** (n - 1),
        "rg_n": None,
        "rg": None,
    }
    if range_max is not None:
        if n >= 3:
            bounds["rg_n"] = m * (2 * range_max) ** (n - 2)
        bounds["rg"] = m * 4**range_max
    return bounds


def solve_dp(
    instance: Instance,
    representation: str = "auto",
    max_states: int = DEFAULT_MAX_STATES,
    threads: int = 1,
) -> ManipulationResult:
    """Optimal manipulation by backward induction over the state graph.

    The returned ranking is replayed through :func:`simulate` before
    returning, so the reported bundle and value are guaranteed to be what
    the protocol actually produces for that report.
    """
    start = time.perf_counter()
    graph = build_state_graph(instance, representation=representation, max_states=max_states, threads=threads)
    value = backward_induction(graph, instance.utilities)
    ranking, bundle = _recover_ranking(graph, instance)

    replay = simulate(instance, ranking)
    if replay.bundles[MANIPULATOR] != bundle or bundle_utility(instance, bundle) != value:
        raise RuntimeError("internal error: recovered ranking does not replay to the computed optimum")

    metrics = profile_metrics(instance)
    bounds = state_set_bounds(
        instance.num_items,
        instance.num_agents,
        metrics.mu[MANIPULATOR],
        metrics.range_max,
    )
    elapsed = (time.perf_counter() - start) * 1000.0
    stats = {
        "algorithm": "dp",
        "states": graph.num_states,
        "distinct_sets": graph.distinct_sets,
        "arcs": graph.num_arcs,
        "bound_m_pow": bounds["m_pow"],
        "bound_mu": bounds["mu"],
        "bound_rg_n": bounds["rg_n"],
        "bound_rg": bounds["rg"],
        "elapsed_ms": elapsed,
    }
    return ManipulationResult(optimal_utility=value, ranking=ranking, bundle=bundle, stats=stats)


def forced_sets(instance: Instance) -> tuple[frozenset[int], ...]:
    """The taken sets the manipulator cannot influence, per time step.

    Run the protocol with the manipulator deleted from the sequence; the
    first t - mu(0, t) picks of that run are taken by step t no matter
    what she reports.  Index t of the result is the set for step t, with
    index 0 the empty set.
    """
    m = instance.num_items
    reduced = [agent for agent in instance.sequence if agent != MANIPULATOR]
    taken = [False] * m
    cursors = [0] * instance.num_agents
    picks: list[int] = []
    for agent in reduced:
        row = instance.profile[agent]
        cursor = cursors[agent]
        while taken[row[cursor]]:
            cursor += 1
        cursors[agent] = cursor + 1
        taken[row[cursor]] = True
        picks.append(row[cursor])

    manip_turns = 0
    sets = [frozenset()]
    for step, agent in enumerate(instance.sequence, start=1):
        if agent == MANIPULATOR:
            manip_turns += 1
        sets.append(frozenset(picks[: step - manip_turns]))
    return tuple(sets)
