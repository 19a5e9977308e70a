"""Deciding whether the manipulator can secure a given set of items.

A target set is achievable when some reported ranking leaves the
manipulator holding at least those items after the protocol runs.  Sets
larger than her number of picking turns are trivially out of reach.  For
the rest, a greedy rule suffices: at each of her turns she secures the
still-unsecured target that the other agents would otherwise take
soonest.  The enumeration oracle next to it tries every order in which
the targets could be secured and is the reference the greedy rule is
held to by the test suite.

On top of the check sit two exhaustive solvers for the best-response
problem: one enumerating candidate bundles (exponential only in the
number of the manipulator's turns) and one enumerating entire reported
rankings (factorial, cross-check only).
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Iterable, Iterator

from .core import (
    MANIPULATOR,
    Instance,
    ManipulationResult,
    ResourceLimitError,
    bundle_utility,
    simulate,
)

DEFAULT_ORACLE_ORDERS = 40_320  # 8!
DEFAULT_SUBSET_BUDGET = 5_000_000
DEFAULT_RANKING_ITEM_LIMIT = 8

_NEVER = 1 << 60


@dataclass(frozen=True)
class AchievabilityCertificate:
    """Outcome of an achievability check.

    For achievable targets, ``ranking`` is a report that secures them and
    ``pick_order`` lists the targets in the order they get picked up;
    replaying the ranking yields a bundle containing every target.  For
    unachievable targets both fields are None.
    """

    achievable: bool
    ranking: tuple[int, ...] | None = None
    pick_order: tuple[int, ...] | None = None


def _checked_target(instance: Instance, target: Iterable[int]) -> frozenset[int]:
    target = frozenset(target)
    for item in target:
        if not isinstance(item, int) or isinstance(item, bool) or not 0 <= item < instance.num_items:
            raise ValueError(f"target item {item!r} out of range")
    return target


def is_achievable(instance: Instance, target: Iterable[int]) -> AchievabilityCertificate:
    """Greedy most-endangered-first check.

    At each manipulator turn, every unsecured target's removal time is
    measured in a hypothetical continuation where the manipulator sits
    out all her turns; she then secures the target that would disappear
    first (ties: the one she truthfully prefers).  Runs in
    O(mu * (m + n)) per call.  Agreement with the enumeration oracle is
    the correctness contract, enforced by the test suite.
    """
    target = _checked_target(instance, target)
    if len(target) > instance.manipulator_turns():
        return AchievabilityCertificate(False)
    if not target:
        return AchievabilityCertificate(True, instance.profile[MANIPULATOR], ())

    m = instance.num_items
    sequence = instance.sequence
    profile = instance.profile
    truthful_pos = {item: pos for pos, item in enumerate(profile[MANIPULATOR])}

    taken = [False] * m
    cursors = [0] * instance.num_agents
    unsecured = set(target)
    my_picks: list[int] = []
    secured: list[int] = []

    for step, agent in enumerate(sequence):
        if agent == MANIPULATOR:
            if unsecured:
                item = _most_endangered(instance, taken, cursors, step, unsecured, truthful_pos)
                unsecured.discard(item)
                secured.append(item)
            else:
                item = next(i for i in profile[MANIPULATOR] if not taken[i])
            taken[item] = True
            my_picks.append(item)
        else:
            row = profile[agent]
            cursor = cursors[agent]
            while taken[row[cursor]]:
                cursor += 1
            cursors[agent] = cursor + 1
            item = row[cursor]
            if item in unsecured:
                return AchievabilityCertificate(False)
            taken[item] = True

    mine = set(my_picks)
    ranking = tuple(my_picks + [item for item in profile[MANIPULATOR] if item not in mine])
    return AchievabilityCertificate(True, ranking, tuple(secured))


def _most_endangered(
    instance: Instance,
    taken: list[int],
    cursors: list[int],
    step: int,
    unsecured: set[int],
    truthful_pos: dict[int, int],
) -> int:
    """Unsecured target taken soonest if the manipulator stops picking."""
    hypothetical = taken.copy()
    hypo_cursors = cursors.copy()
    removal: dict[int, int] = {}
    missing = len(unsecured)
    for t in range(step + 1, len(instance.sequence)):
        agent = instance.sequence[t]
        if agent == MANIPULATOR:
            continue
        row = instance.profile[agent]
        cursor = hypo_cursors[agent]
        while hypothetical[row[cursor]]:
            cursor += 1
        hypo_cursors[agent] = cursor + 1
        item = row[cursor]
        hypothetical[item] = True
        if item in unsecured:
            removal[item] = t
            missing -= 1
            if missing == 0:
                break
    return min(unsecured, key=lambda item: (removal.get(item, _NEVER), truthful_pos[item]))


def is_achievable_oracle(
    instance: Instance,
    target: Iterable[int],
    max_orders: int = DEFAULT_ORACLE_ORDERS,
) -> AchievabilityCertificate:
    """Exhaustive reference check: try every securing order for the target.

    Each candidate order is replayed literally; the manipulator takes the
    next listed target at each of her turns (failing the order if it is
    already gone) and reverts to truthful picking once the list is done.
    Orders are tried in lexicographic order over the sorted target, so the
    reported certificate is deterministic.
    """
    target = _checked_target(instance, target)
    if math.factorial(len(target)) > max_orders:
        raise ResourceLimitError(
            f"oracle would enumerate {len(target)}! > {max_orders} orders; raise max_orders to force it"
        )
    if len(target) > instance.manipulator_turns():
        return AchievabilityCertificate(False)

    m = instance.num_items
    profile = instance.profile
    for order in itertools.permutations(sorted(target)):
        taken = [False] * m
        cursors = [0] * instance.num_agents
        my_picks: list[int] = []
        next_target = 0
        for agent in instance.sequence:
            if agent == MANIPULATOR:
                if next_target < len(order):
                    item = order[next_target]
                    if taken[item]:
                        break
                    next_target += 1
                else:
                    item = next(i for i in profile[MANIPULATOR] if not taken[i])
                taken[item] = True
                my_picks.append(item)
            else:
                row = profile[agent]
                cursor = cursors[agent]
                while taken[row[cursor]]:
                    cursor += 1
                cursors[agent] = cursor + 1
                taken[row[cursor]] = True
        else:
            if next_target == len(order):
                mine = set(my_picks)
                ranking = tuple(my_picks + [i for i in profile[MANIPULATOR] if i not in mine])
                return AchievabilityCertificate(True, ranking, order)
    return AchievabilityCertificate(False)


def _colex_subsets(m: int, size: int) -> Iterator[tuple[int, ...]]:
    """All sorted ``size``-subsets of range(m) in colexicographic order."""
    if size == 0:
        yield ()
        return
    for top in range(size - 1, m):
        for rest in _colex_subsets(top, size - 1):
            yield rest + (top,)


def solve_subset_enum(instance: Instance, budget: int = DEFAULT_SUBSET_BUDGET) -> ManipulationResult:
    """Optimal manipulation by enumerating candidate bundles.

    With mu picking turns the optimal bundle has exactly mu items, so
    enumerating the C(m, mu) item sets and keeping the best achievable
    one is exact.  Subsets are visited in colex order; a subset is tested
    only when it beats the incumbent (the truthful bundle seeds it, being
    always achievable), which prunes almost all achievability calls.
    Ties in value resolve to the lexicographically smallest sorted set.
    """
    start = time.perf_counter()
    m = instance.num_items
    mu = instance.manipulator_turns()
    total = math.comb(m, mu)
    if total > budget:
        raise ResourceLimitError(
            f"subset enumeration needs C({m}, {mu}) = {total} > {budget} candidates; raise the budget to force it"
        )

    utilities = instance.utilities
    truthful = simulate(instance)
    best_set = tuple(sorted(truthful.bundles[MANIPULATOR]))
    best_value = bundle_utility(instance, best_set)
    best_certificate: AchievabilityCertificate | None = None
    checks = 0
    for subset in _colex_subsets(m, mu):
        value = sum(utilities[item] for item in subset)
        if value < best_value or (value == best_value and subset >= best_set):
            continue
        checks += 1
        certificate = is_achievable(instance, subset)
        if certificate.achievable:
            best_set = subset
            best_value = value
            best_certificate = certificate

    if best_certificate is None:
        ranking = instance.profile[MANIPULATOR]
    else:
        ranking = best_certificate.ranking
    elapsed = (time.perf_counter() - start) * 1000.0
    stats = {
        "algorithm": "subset",
        "subsets_enumerated": total,
        "achievability_checks": checks,
        "elapsed_ms": elapsed,
    }
    return ManipulationResult(
        optimal_utility=best_value,
        ranking=tuple(ranking),
        bundle=frozenset(best_set),
        stats=stats,
    )


def solve_bruteforce_rankings(
    instance: Instance,
    limit: int = DEFAULT_RANKING_ITEM_LIMIT,
) -> ManipulationResult:
    """Optimal manipulation by trying all m! reports.  Cross-check only.

    Rankings are tried in lexicographic order and ties keep the first
    optimum, so the result is deterministic.  Refuses instances beyond
    ``limit`` items.
    """
    if instance.num_items > limit:
        raise ResourceLimitError(
            f"brute force over {instance.num_items}! rankings exceeds the {limit}-item limit"
        )
    start = time.perf_counter()
    m = instance.num_items
    n = instance.num_agents
    sequence = instance.sequence
    profile = instance.profile
    utilities = instance.utilities

    best_value = -1
    best_ranking: tuple[int, ...] | None = None
    for ranking in itertools.permutations(range(m)):
        taken = [False] * m
        cursors = [0] * n
        value = 0
        for agent in sequence:
            row = ranking if agent == MANIPULATOR else profile[agent]
            cursor = cursors[agent]
            while taken[row[cursor]]:
                cursor += 1
            cursors[agent] = cursor + 1
            item = row[cursor]
            taken[item] = True
            if agent == MANIPULATOR:
                value += utilities[item]
        if value > best_value:
            best_value = value
            best_ranking = ranking

    bundle = simulate(instance, best_ranking).bundles[MANIPULATOR]
    elapsed = (time.perf_counter() - start) * 1000.0
    stats = {
        "algorithm": "brute",
        "rankings_tried": math.factorial(m),
        "elapsed_ms": elapsed,
    }
    return ManipulationResult(
        optimal_utility=best_value,
        ranking=best_ranking,
        bundle=bundle,
        stats=stats,
    )
