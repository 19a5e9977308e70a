"""Sequential allocation instances and the greedy picking protocol.

An instance fixes a set of indivisible items, a set of agents, a picking
sequence, one strict preference ranking per agent, and additive utilities
consistent with the first agent's ranking.  Agent 0 is the manipulator:
every solver in this package searches over the rankings she may report,
while the remaining agents always pick greedily and truthfully (each takes
her most preferred item still available when her turn comes).

Conventions used throughout the package:

* items and agents are referred to by 0-based index; the JSON form also
  carries display names,
* rankings list item indices from most to least preferred,
* ranks are 1-based (rank 1 is the most preferred item),
* utilities are nonnegative integers, strictly decreasing along agent 0's
  truthful ranking, with a total bounded by 2**63 - 1 so downstream
  arithmetic stays in machine-integer range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

MANIPULATOR = 0

UTILITY_SUM_LIMIT = 2**63 - 1


class InvalidInstanceError(ValueError):
    """Instance data violates a structural invariant.

    ``code`` is a stable machine-readable identifier:

    * ``empty``: no items or no agents,
    * ``length-mismatch``: sequence/profile/utilities length disagrees
      with the item and agent counts,
    * ``sequence-entry``: sequence entry is not a valid agent index,
    * ``non-permutation``: a profile row (or reported ranking) is not a
      permutation of the item indices,
    * ``non-strict-utilities``: utilities tie or increase along agent 0's
      ranking,
    * ``negative-utility``: a utility is negative,
    * ``utility-overflow``: utilities sum past the signed 64-bit limit,
    * ``duplicate-name``: item or agent display names repeat,
    * ``malformed``: JSON document does not have the expected shape.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ResourceLimitError(RuntimeError):
    """A solver or builder exceeded one of its configured budgets."""


@dataclass(frozen=True)
class Instance:
    """One sequential allocation instance.

    ``sequence[t]`` is the agent picking at time step t (0-based here;
    reports and logs use 1-based steps).  ``profile[a]`` is agent a's
    truthful ranking.  ``utilities[i]`` is the manipulator's utility for
    item i.  Construction validates all invariants.
    """

    items: tuple[str, ...]
    agents: tuple[str, ...]
    sequence: tuple[int, ...]
    profile: tuple[tuple[int, ...], ...]
    utilities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "sequence", tuple(self.sequence))
        object.__setattr__(self, "profile", tuple(tuple(row) for row in self.profile))
        object.__setattr__(self, "utilities", tuple(self.utilities))
        _check_instance(self)

    @property
    def num_items(self) -> int:
        return len(self.items)

    @property
    def num_agents(self) -> int:
        return len(self.agents)

    def manipulator_turns(self) -> int:
        return self.sequence.count(MANIPULATOR)

    def to_json(self) -> str:
        doc = {
            "items": list(self.items),
            "agents": list(self.agents),
            "sequence": list(self.sequence),
            "profile": [list(row) for row in self.profile],
            "utilities": list(self.utilities),
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInstanceError("malformed", f"instance is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidInstanceError("malformed", "instance JSON must be an object")
        missing = [key for key in ("items", "agents", "sequence", "profile", "utilities") if key not in doc]
        if missing:
            raise InvalidInstanceError("malformed", f"instance JSON lacks keys: {', '.join(missing)}")
        try:
            return cls(
                items=tuple(doc["items"]),
                agents=tuple(doc["agents"]),
                sequence=tuple(doc["sequence"]),
                profile=tuple(tuple(row) for row in doc["profile"]),
                utilities=tuple(doc["utilities"]),
            )
        except TypeError as exc:
            raise InvalidInstanceError("malformed", f"instance JSON has a wrong field shape: {exc}") from exc


def _check_instance(inst: Instance) -> None:
    m = len(inst.items)
    n = len(inst.agents)
    if m == 0 or n == 0:
        raise InvalidInstanceError("empty", "instance needs at least one item and one agent")
    for name in inst.items + inst.agents:
        if not isinstance(name, str) or not name:
            raise InvalidInstanceError("malformed", "item and agent names must be nonempty strings")
    if len(set(inst.items)) != m:
        raise InvalidInstanceError("duplicate-name", "item names must be unique")
    if len(set(inst.agents)) != n:
        raise InvalidInstanceError("duplicate-name", "agent names must be unique")

    if len(inst.sequence) != m:
        raise InvalidInstanceError(
            "length-mismatch",
            f"sequence has {len(inst.sequence)} entries for {m} items",
        )
    for entry in inst.sequence:
        if not isinstance(entry, int) or isinstance(entry, bool) or not 0 <= entry < n:
            raise InvalidInstanceError("sequence-entry", f"sequence entry {entry!r} is not an agent index")

    if len(inst.profile) != n:
        raise InvalidInstanceError(
            "length-mismatch",
            f"profile has {len(inst.profile)} rows for {n} agents",
        )
    for a, row in enumerate(inst.profile):
        _require_permutation(row, m, f"profile row {a}")

    if len(inst.utilities) != m:
        raise InvalidInstanceError(
            "length-mismatch",
            f"utilities list {len(inst.utilities)} values for {m} items",
        )
    for u in inst.utilities:
        if not isinstance(u, int) or isinstance(u, bool):
            raise InvalidInstanceError("malformed", f"utility {u!r} is not an integer")
        if u < 0:
            raise InvalidInstanceError("negative-utility", f"utility {u} is negative")
    if sum(inst.utilities) > UTILITY_SUM_LIMIT:
        raise InvalidInstanceError("utility-overflow", "utilities sum past the signed 64-bit limit")
    top_row = inst.profile[MANIPULATOR]
    for pos in range(m - 1):
        if inst.utilities[top_row[pos]] <= inst.utilities[top_row[pos + 1]]:
            raise InvalidInstanceError(
                "non-strict-utilities",
                "utilities must strictly decrease along the manipulator's ranking "
                f"(violated between items {top_row[pos]} and {top_row[pos + 1]})",
            )


def _require_permutation(row: Sequence[int], m: int, label: str) -> None:
    if len(row) != m:
        raise InvalidInstanceError("non-permutation", f"{label} has {len(row)} entries for {m} items")
    seen = [False] * m
    for item in row:
        if not isinstance(item, int) or isinstance(item, bool) or not 0 <= item < m or seen[item]:
            raise InvalidInstanceError("non-permutation", f"{label} is not a permutation of 0..{m - 1}")
        seen[item] = True


def validate(instance: Instance) -> Instance:
    """Re-run all structural checks and hand the instance back."""
    _check_instance(instance)
    return instance


@dataclass(frozen=True)
class Allocation:
    """Outcome of one full run of the picking protocol.

    ``bundles[a]`` is the set of items agent a ended up with and
    ``pick_log`` records (step, agent, item) triples with 1-based steps.
    """

    bundles: tuple[frozenset[int], ...]
    pick_log: tuple[tuple[int, int, int], ...]

    def to_json_dict(self) -> dict:
        return {
            "bundles": [sorted(bundle) for bundle in self.bundles],
            "pick_log": [list(entry) for entry in self.pick_log],
        }


def simulate(instance: Instance, reported_ranking: Sequence[int] | None = None) -> Allocation:
    """Run the picking protocol and return who got what.

    The manipulator picks along ``reported_ranking`` when one is given and
    along her truthful ranking otherwise; everyone else is truthful.  The
    protocol is deterministic, so equal inputs always give equal outputs.
    """
    m = instance.num_items
    n = instance.num_agents
    rows: list[Sequence[int]] = list(instance.profile)
    if reported_ranking is not None:
        ranking = tuple(reported_ranking)
        _require_permutation(ranking, m, "reported ranking")
        rows[MANIPULATOR] = ranking

    taken = [False] * m
    cursors = [0] * n
    bundles: list[list[int]] = [[] for _ in range(n)]
    log = []
    for step, agent in enumerate(instance.sequence, start=1):
        row = rows[agent]
        cursor = cursors[agent]
        while taken[row[cursor]]:
            cursor += 1
        item = row[cursor]
        cursors[agent] = cursor + 1
        taken[item] = True
        bundles[agent].append(item)
        log.append((step, agent, item))
    return Allocation(
        bundles=tuple(frozenset(bundle) for bundle in bundles),
        pick_log=tuple(log),
    )


def bundle_utility(instance: Instance, bundle: Iterable[int]) -> int:
    """Manipulator utility of a bundle (utilities are additive)."""
    return sum(instance.utilities[item] for item in bundle)


def truthful_utility(instance: Instance) -> int:
    """Utility the manipulator collects when everyone reports truthfully."""
    return bundle_utility(instance, simulate(instance).bundles[MANIPULATOR])


def best_available(instance: Instance, agent: int, taken: Iterable[int]) -> int:
    """First item in ``agent``'s truthful ranking outside ``taken``."""
    if not 0 <= agent < instance.num_agents:
        raise ValueError(f"agent index {agent} out of range")
    gone = set(taken)
    for item in instance.profile[agent]:
        if item not in gone:
            return item
    raise ValueError("no item available: every item is already taken")


@dataclass(frozen=True)
class ProfileMetrics:
    """Positional summary of a preference profile.

    ``rank[a][i]`` is item i's 1-based rank in agent a's ranking.  The
    range of an item counts the positions it spans across the
    non-manipulators only; with a single agent there are none, which the
    range fields signal with None.  ``mu[a]`` counts agent a's picking
    turns and ``mu_prefix[a][t]`` counts her turns among the first t steps.
    """

    rank: tuple[tuple[int, ...], ...]
    item_range: tuple[int, ...] | None
    range_max: int | None
    mu: tuple[int, ...]
    mu_prefix: tuple[tuple[int, ...], ...]


def profile_metrics(instance: Instance) -> ProfileMetrics:
    m = instance.num_items
    n = instance.num_agents

    rank = tuple(_rank_of_row(row, m) for row in instance.profile)

    item_range: tuple[int, ...] | None = None
    range_max: int | None = None
    if n >= 2:
        spans = []
        for item in range(m):
            positions = [rank[a][item] for a in range(1, n)]
            spans.append(max(positions) - min(positions) + 1)
        item_range = tuple(spans)
        range_max = max(spans)

    mu = [0] * n
    prefix: list[list[int]] = [[0] for _ in range(n)]
    for agent in instance.sequence:
        mu[agent] += 1
        for a in range(n):
            prefix[a].append(prefix[a][-1] + (1 if a == agent else 0))
    return ProfileMetrics(
        rank=rank,
        item_range=item_range,
        range_max=range_max,
        mu=tuple(mu),
        mu_prefix=tuple(tuple(p) for p in prefix),
    )


def _rank_of_row(row: Sequence[int], m: int) -> tuple[int, ...]:
    rank = [0] * m
    for pos, item in enumerate(row, start=1):
        rank[item] = pos
    return tuple(rank)


@dataclass(frozen=True)
class ManipulationResult:
    """Best response found by one of the solvers.

    ``ranking`` is the report achieving ``optimal_utility``; replaying it
    with :func:`simulate` yields exactly ``bundle`` for the manipulator.
    ``stats`` carries algorithm-specific counters, always including
    ``algorithm`` and ``elapsed_ms``.
    """

    optimal_utility: int
    ranking: tuple[int, ...]
    bundle: frozenset[int]
    stats: dict

    def to_json(self, timings: bool = False) -> str:
        stats = dict(self.stats)
        algorithm = stats.pop("algorithm")
        if not timings:
            stats["elapsed_ms"] = 0.0
        doc = {
            "algorithm": algorithm,
            "optimal_utility": self.optimal_utility,
            "ranking": list(self.ranking),
            "bundle": sorted(self.bundle),
            "stats": stats,
        }
        return json.dumps(doc, indent=2) + "\n"
