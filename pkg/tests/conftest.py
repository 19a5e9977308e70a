import pytest

from seqalloc import Instance, gen_correlated, gen_random
from seqalloc.rng import stream


@pytest.fixture
def running_example() -> Instance:
    """Four items, three agents, manipulator picks first and last.

    Truthfully the manipulator ends with {i1, i4} worth 6; reporting
    i3 > i2 > i1 > i4 instead earns her {i2, i3} worth 7, the optimum.
    """
    return Instance(
        items=["i1", "i2", "i3", "i4"],
        agents=["a1", "a2", "a3"],
        sequence=[0, 1, 2, 0],
        profile=[
            [0, 1, 2, 3],
            [2, 3, 0, 1],
            [0, 1, 2, 3],
        ],
        utilities=[5, 4, 3, 1],
    )


@pytest.fixture
def running_example_steep(running_example) -> Instance:
    """Same structure with utilities (1000, 999, 998, 0)."""
    return Instance(
        items=running_example.items,
        agents=running_example.agents,
        sequence=running_example.sequence,
        profile=running_example.profile,
        utilities=[1000, 999, 998, 0],
    )


def seeded_instances(count: int, agents=(2, 3, 4), items=(4, 5, 6, 7), tag: str = "tests"):
    """Deterministic stream of small random instances for cross-checks."""
    produced = 0
    seed = 0
    while produced < count:
        seed += 1
        for n in agents:
            for m in items:
                if produced >= count:
                    return
                yield gen_random(seed * 1000 + n * 10 + m, n, m)[0]
                produced += 1


def seeded_targets(instance: Instance, size: int, tag: str):
    """Deterministic pseudo-random target set of the given size."""
    items = list(range(instance.num_items))
    stream(instance.num_items * 7 + size, tag).shuffle(items)
    return frozenset(items[: min(size, instance.num_items)])
