"""Diagnostics: utility-ratio bound, state-count bounds, sweeps.

Two proven facts are checked empirically here on every instance thrown
at the solvers: optimal manipulation earns strictly less than twice the
truthful utility (whenever that is positive), and the number of
distinct taken sets in the dynamic program stays under each applicable
closed-form cap.  Neither can fail on correct code, so a violation
signals an implementation bug and raises instead of returning quietly.
Ratios are exact fractions; no float ever decides a verdict.
"""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .achievability import solve_bruteforce_rankings, solve_subset_enum
from .core import (
    MANIPULATOR,
    Instance,
    InvalidInstanceError,
    ProfileMetrics,
    ResourceLimitError,
    profile_metrics,
    truthful_utility,
)
from .dp import StateGraph, build_state_graph, solve_dp, state_set_bounds
from .generators import gen_correlated, gen_random
from .ilp import build_model, solve_naive


class BoundViolationError(RuntimeError):
    """A proven bound failed on a concrete instance; something is buggy."""


@dataclass(frozen=True)
class BoundReport:
    """Joint report of the ratio check and the state-count check.

    ``ratio`` is exact (optimal over truthful) and None when the
    truthful utility is zero, in which case the ratio bound is vacuous
    and ``bound_ok`` is True by convention.  ``bounds``/``slack`` map
    bound names (m_pow, mu, rg_n, rg) to values, None where a bound
    needs more agents than the instance has.
    """

    u_truthful: int
    u_optimal: int
    ratio: Fraction | None
    bound_ok: bool
    vacuous: bool
    states: int
    distinct_sets: int
    bounds: dict
    slack: dict

    def to_json_dict(self) -> dict:
        return {
            "u_truthful": self.u_truthful,
            "u_optimal": self.u_optimal,
            "ratio": str(self.ratio) if self.ratio is not None else None,
            "bound_ok": self.bound_ok,
            "vacuous": self.vacuous,
            "states": self.states,
            "distinct_sets": self.distinct_sets,
            "bounds": dict(self.bounds),
            "slack": dict(self.slack),
        }


def _bound_report(instance: Instance, **solver_kwargs) -> BoundReport:
    result = solve_dp(instance, **solver_kwargs)
    u_truthful = truthful_utility(instance)
    u_optimal = result.optimal_utility
    vacuous = u_truthful == 0
    ratio = None if vacuous else Fraction(u_optimal, u_truthful)
    bound_ok = True if vacuous else u_optimal < 2 * u_truthful
    bounds = {
        "m_pow": result.stats["bound_m_pow"],
        "mu": result.stats["bound_mu"],
        "rg_n": result.stats["bound_rg_n"],
        "rg": result.stats["bound_rg"],
    }
    distinct = result.stats["distinct_sets"]
    slack = {name: None if cap is None else cap - distinct for name, cap in bounds.items()}
    return BoundReport(
        u_truthful=u_truthful,
        u_optimal=u_optimal,
        ratio=ratio,
        bound_ok=bound_ok,
        vacuous=vacuous,
        states=result.stats["states"],
        distinct_sets=distinct,
        bounds=bounds,
        slack=slack,
    )


def check_ratio_bound(instance: Instance, **solver_kwargs) -> BoundReport:
    """Solve and verify optimal < 2 * truthful (vacuous at truthful 0)."""
    report = _bound_report(instance, **solver_kwargs)
    if not report.bound_ok:
        raise BoundViolationError(
            f"optimal utility {report.u_optimal} reaches twice the truthful {report.u_truthful}"
        )
    return report


def check_state_bounds(instance: Instance, **solver_kwargs) -> BoundReport:
    """Solve and verify distinct taken sets against every applicable cap."""
    report = _bound_report(instance, **solver_kwargs)
    for name, cap in report.bounds.items():
        if cap is not None and report.distinct_sets > cap:
            raise BoundViolationError(
                f"{report.distinct_sets} distinct taken sets exceed bound {name} = {cap}"
            )
    return report


def verify_state_invariants(instance: Instance, graph: StateGraph) -> int:
    """Check the structural invariants of every stored state.

    Each taken set must equal the union, over the non-manipulators, of
    the ranking prefix strictly above the agent's favourite remaining
    item; the favourites' ranks may pairwise differ by at most
    range_max - 1; and every taken item outside the second agent's
    scanned prefix must sit within 2 * range_max positions below her
    favourite.  Returns the number of states checked; raises
    BoundViolationError on the first violation.
    """
    n = instance.num_agents
    if n < 2:
        return 0
    m = instance.num_items
    metrics = profile_metrics(instance)
    range_max = metrics.range_max

    prefix_masks = []
    for a in range(1, n):
        masks = [0]
        for item in instance.profile[a]:
            masks.append(masks[-1] | 1 << item)
        prefix_masks.append(masks)

    checked = 0
    for state in graph.states:
        taken = state.taken
        favourites = []
        union = 0
        for a in range(1, n):
            row = instance.profile[a]
            pos = 0
            while pos < m and taken >> row[pos] & 1:
                pos += 1
            if pos < m:
                favourites.append((a, row[pos], pos + 1))
            union |= prefix_masks[a - 1][pos]
        if union != taken:
            raise BoundViolationError(
                f"state (k={state.banked}, taken={taken:b}) is not a union of scanned prefixes"
            )
        if favourites:
            ranks = [rank for _, _, rank in favourites]
            if max(ranks) - min(ranks) > range_max - 1:
                raise BoundViolationError(
                    f"favourite ranks {ranks} spread wider than range_max - 1 = {range_max - 1}"
                )
            agent, _, rank = favourites[0]
            scanned = prefix_masks[agent - 1][rank - 1]
            outside = taken & ~scanned
            while outside:
                low = outside & -outside
                item = low.bit_length() - 1
                outside ^= low
                item_rank = metrics.rank[agent][item]
                if not rank + 1 <= item_rank <= rank + 2 * range_max:
                    raise BoundViolationError(
                        f"taken item {item} at rank {item_rank} leaves the window "
                        f"({rank + 1}..{rank + 2 * range_max}) of agent {agent}"
                    )
        checked += 1
    return checked


@dataclass(frozen=True)
class SweepConfig:
    """Parameter grid for :func:`bench_sweep`.

    The grid is the cartesian product of the fields, iterated in field
    order (agents, items, mu, range target, seeds, algorithms).  None
    entries leave the corresponding generator knob unconstrained.
    """

    agents: tuple[int, ...]
    items: tuple[int, ...]
    mu_manipulator: tuple = (None,)
    target_range_max: tuple = (None,)
    seeds: tuple[int, ...] = (1,)
    algorithms: tuple[str, ...] = ("dp",)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SweepConfig":
        known = {field: doc[field] for field in doc}
        unknown = set(known) - {
            "agents",
            "items",
            "mu_manipulator",
            "target_range_max",
            "seeds",
            "algorithms",
        }
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        if "agents" not in known or "items" not in known:
            raise ValueError("sweep config needs 'agents' and 'items' lists")
        return cls(
            agents=tuple(known["agents"]),
            items=tuple(known["items"]),
            mu_manipulator=tuple(known.get("mu_manipulator", [None])),
            target_range_max=tuple(known.get("target_range_max", [None])),
            seeds=tuple(known.get("seeds", [1])),
            algorithms=tuple(known.get("algorithms", ["dp"])),
        )


SWEEP_COLUMNS = [
    "n",
    "m",
    "mu_manipulator",
    "target_range_max",
    "seed",
    "algorithm",
    "status",
    "optimal_utility",
    "truthful_utility",
    "ratio",
    "states",
    "distinct_sets",
    "arcs",
    "bound_m_pow",
    "bound_mu",
    "bound_rg_n",
    "bound_rg",
    "elapsed_ms",
]

_SOLVERS = {
    "dp": lambda instance: solve_dp(instance),
    "subset": lambda instance: solve_subset_enum(instance),
    "brute": lambda instance: solve_bruteforce_rankings(instance),
    "ilp-naive": lambda instance: solve_naive(build_model(instance)),
}


def _sweep_row(point: tuple) -> dict:
    n, m, mu, target, seed, algorithm = point
    row = {column: None for column in SWEEP_COLUMNS}
    row.update({"n": n, "m": m, "target_range_max": target, "seed": seed, "algorithm": algorithm})
    try:
        if target is None:
            instance, _ = gen_random(seed, n, m, mu_manipulator=mu)
        else:
            instance, _ = gen_correlated(seed, n, m, target, mu_manipulator=mu)
        row["mu_manipulator"] = instance.manipulator_turns()
        solver = _SOLVERS.get(algorithm)
        if solver is None:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        result = solver(instance)
        u_truthful = truthful_utility(instance)
        row["optimal_utility"] = result.optimal_utility
        row["truthful_utility"] = u_truthful
        row["ratio"] = str(Fraction(result.optimal_utility, u_truthful)) if u_truthful else None
        metrics = profile_metrics(instance)
        bounds = state_set_bounds(m, n, metrics.mu[MANIPULATOR], metrics.range_max)
        row["bound_m_pow"] = bounds["m_pow"]
        row["bound_mu"] = bounds["mu"]
        row["bound_rg_n"] = bounds["rg_n"]
        row["bound_rg"] = bounds["rg"]
        for key in ("states", "distinct_sets", "arcs"):
            row[key] = result.stats.get(key)
        row["elapsed_ms"] = result.stats["elapsed_ms"]
        row["status"] = "ok"
    except InvalidInstanceError as exc:
        row["status"] = f"invalid:{exc.code}"
    except ResourceLimitError:
        row["status"] = "resource-limit"
    except ValueError as exc:
        row["status"] = f"error:{exc}"
    return row


def run_sweep(config: SweepConfig, threads: int = 1) -> list[dict]:
    """Run the whole grid; one result dict per point, in grid order.

    Failures never abort the sweep; they land in the row's status.
    """
    grid = list(
        itertools.product(
            config.agents,
            config.items,
            config.mu_manipulator,
            config.target_range_max,
            config.seeds,
            config.algorithms,
        )
    )
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_row, grid))
    return [_sweep_row(point) for point in grid]


def sweep_to_csv(rows: list[dict], timings: bool = False) -> str:
    """Render sweep rows as CSV; timings are zeroed unless requested."""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        rendered = dict(row)
        if not timings:
            rendered["elapsed_ms"] = 0.0 if row["status"] == "ok" else None
        rendered = {key: ("" if value is None else value) for key, value in rendered.items()}
        writer.writerow(rendered)
    return out.getvalue()


def bench_sweep(config: SweepConfig, threads: int = 1, timings: bool = False) -> str:
    """Sweep the grid and return the CSV report."""
    return sweep_to_csv(run_sweep(config, threads=threads), timings=timings)
