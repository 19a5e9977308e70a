import pytest

from conftest import seeded_instances
from seqalloc import (
    GreedyRow,
    InfeasibleModelError,
    Instance,
    IpModel,
    ResourceLimitError,
    assignment_is_feasible,
    build_model,
    export_lp,
    gen_random,
    parse_lp,
    simulate,
    solve_dp,
    solve_naive,
)


def test_model_dimensions(running_example):
    """4 items, 2 non-manipulator steps: 16 vars, 8 equalities, 8 covers."""
    model = build_model(running_example)
    assert model.num_vars == 16
    assert model.num_eq_rows == 8
    assert model.num_greedy_rows == 8
    assert model.manipulator_steps == (1, 4)
    assert model.utilities == (5, 4, 3, 1)


def test_greedy_row_contents(running_example):
    model = build_model(running_example)
    by_key = {(row.item, row.step): row for row in model.greedy_rows}
    # Agent a2 ranks i3 first, so its row at step 2 has no better items.
    assert by_key[(3, 2)] == GreedyRow(3, 2, ())
    # i1 sits behind i3 and i4 for a2.
    assert by_key[(1, 2)].better == (3, 4)
    # Agent a3 is truthful-identical to the manipulator.
    assert by_key[(4, 3)].better == (1, 2, 3)


def test_single_item_model():
    instance = Instance(items=["x"], agents=["a"], sequence=[0], profile=[[0]], utilities=[1])
    model = build_model(instance)
    assert model.num_vars == 1
    assert model.num_eq_rows == 2
    assert model.num_greedy_rows == 0


def test_export_contains_expected_rows(running_example):
    text = export_lp(build_model(running_example))
    assert text.splitlines()[0] == "Maximize"
    assert "5 x_1_1" in text
    assert "5 x_1_4" in text
    assert " item_1: x_1_1 + x_1_2 + x_1_3 + x_1_4 = 1" in text
    assert " greedy_3_2: x_3_2 + x_3_1 >= 1" in text
    assert text.rstrip().endswith("End")


def test_round_trip_is_byte_identical(running_example):
    model = build_model(running_example)
    text = export_lp(model)
    assert parse_lp(text) == model
    assert export_lp(parse_lp(text)) == text


def test_round_trip_on_random_instances():
    for instance in seeded_instances(25):
        model = build_model(instance)
        text = export_lp(model)
        assert export_lp(parse_lp(text)) == text
        if model.manipulator_steps:
            # Without manipulator steps the objective is empty and the
            # utilities are genuinely absent from the text.
            assert parse_lp(text) == model


@pytest.mark.parametrize(
    "text",
    [
        "nonsense",
        "Maximize\n obj: 1 x_1_1\nBinary\nEnd\n",
        "Maximize\n obj: 1 y_1\nSubject To\n item_1: x_1_1 = 1\nBinary\n x_1_1\nEnd\n",
        "Maximize\n obj: 1 x_1_1\nSubject To\n item_1: x_1_1 = 2\nBinary\n x_1_1\nEnd\n",
    ],
)
def test_parse_rejects_foreign_text(text):
    with pytest.raises(ValueError):
        parse_lp(text)


def test_naive_solver_regression(running_example, running_example_steep):
    assert solve_naive(build_model(running_example)).optimal_utility == 7
    assert solve_naive(build_model(running_example)).bundle == {1, 2}
    assert solve_naive(build_model(running_example_steep)).optimal_utility == 1997


def test_naive_solver_limit():
    instance, _ = gen_random(4, 2, 9)
    with pytest.raises(ResourceLimitError):
        solve_naive(build_model(instance))


def test_naive_matches_dp_on_random_instances():
    for instance in seeded_instances(30, items=(4, 5, 6)):
        assert solve_naive(build_model(instance)).optimal_utility == solve_dp(instance).optimal_utility


def test_naive_result_replays(running_example):
    for instance in seeded_instances(15):
        result = solve_naive(build_model(instance))
        replay = simulate(instance, result.ranking)
        assert replay.bundles[0] == result.bundle


def test_truthful_run_is_feasible():
    """The indicator matrix of any protocol run satisfies every row."""
    for instance in seeded_instances(20):
        model = build_model(instance)
        allocation = simulate(instance)
        assignment = {step: item + 1 for step, _, item in allocation.pick_log}
        assert assignment_is_feasible(model, assignment)


def test_non_protocol_assignment_is_infeasible(running_example):
    model = build_model(running_example)
    # Giving a2 item i1 at step 2 while i3 is still on the table breaks greedy.
    assignment = {1: 4, 2: 1, 3: 2, 4: 3}
    assert not assignment_is_feasible(model, assignment)


def test_infeasible_model_is_reported():
    model = IpModel(
        num_items=2,
        utilities=(2, 1),
        manipulator_steps=(2,),
        greedy_rows=(GreedyRow(1, 1, (2,)), GreedyRow(2, 1, (1,))),
    )
    with pytest.raises(InfeasibleModelError):
        solve_naive(model)
