import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from sievelogic.fincat import Arrow, build_category, poset_to_category
from sievelogic.quantum import (
    build_operator_category,
    function_of,
    make_operator,
)
from sievelogic.scenario import build_scenario_category, bundled_fixture, parse_scenario


# --- plain categories -------------------------------------------------------

@pytest.fixture(scope="session")
def one_object():
    return build_category(
        ["A"], [Arrow("id_A", "A", "A")], {"A": "id_A"}, {}
    )


@pytest.fixture(scope="session")
def two_free():
    # Two objects with a single free arrow between them.
    arrows = [Arrow("id_A", "A", "A"), Arrow("id_B", "B", "B"), Arrow("f", "A", "B")]
    table = {("id_B", "f"): "f", ("f", "id_A"): "f"}
    return build_category(["A", "B"], arrows, {"A": "id_A", "B": "id_B"}, table)


@pytest.fixture(scope="session")
def chain2():
    return poset_to_category(["p", "q"], [("p", "q")])


@pytest.fixture(scope="session")
def chain3():
    return poset_to_category(["p", "q", "r"], [("p", "q"), ("q", "r"), ("p", "r")])


@pytest.fixture(scope="session")
def antichain2():
    return poset_to_category(["p", "q"], [])


@pytest.fixture(scope="session")
def vposet():
    return poset_to_category(["p", "q", "r"], [("p", "q"), ("p", "r")])


@pytest.fixture(scope="session")
def diamond():
    return poset_to_category(
        ["p", "q", "r", "s"],
        [("p", "q"), ("p", "r"), ("q", "s"), ("r", "s"), ("p", "s")],
    )


PLAIN_CATEGORY_FIXTURES = [
    "one_object", "two_free", "chain2", "chain3", "antichain2", "vposet", "diamond",
]


# --- spectral operators and their categories --------------------------------

@pytest.fixture(scope="session")
def sigma_z():
    return make_operator("sigma_z", 2, [(1, [(1, 0)]), (-1, [(0, 1)])])


@pytest.fixture(scope="session")
def sigma_x():
    return make_operator("sigma_x", 2, [(1, [(1, 1)]), (-1, [(1, -1)])])


@pytest.fixture(scope="session")
def sz_unclosed(sigma_z):
    return build_operator_category([sigma_z])


@pytest.fixture(scope="session")
def sz_closed(sigma_z):
    return build_operator_category([sigma_z], close_under_questions=True)


@pytest.fixture(scope="session")
def zx_unclosed(sigma_z, sigma_x):
    return build_operator_category([sigma_z, sigma_x])


@pytest.fixture(scope="session")
def zx_closed(sigma_z, sigma_x):
    return build_operator_category([sigma_z, sigma_x], close_under_questions=True)


@pytest.fixture(scope="session")
def vshape3():
    # One fine-grained context with two incomparable coarse-grainings:
    # the base category is the V poset.
    a = make_operator("A", 3, [(1, [(1, 0, 0)]), (2, [(0, 1, 0)]), (3, [(0, 0, 1)])])
    b = function_of(a, {Fraction(1): 5, Fraction(2): 5, Fraction(3): 6}, name="B")
    c = function_of(a, {Fraction(1): 7, Fraction(2): 8, Fraction(3): 8}, name="C")
    return build_operator_category([a, b, c])


@pytest.fixture(scope="session")
def colorable3():
    # Two dimension-3 bases sharing one ray; closed under questions this is
    # small enough to count colorings by hand.
    b1 = make_operator(
        "b1", 3, [(1, [(1, 0, 0)]), (2, [(0, 1, 0)]), (3, [(0, 0, 1)])]
    )
    b2 = make_operator(
        "b2", 3, [(1, [(1, 0, 0)]), (2, [(0, 1, 1)]), (3, [(0, 1, -1)])]
    )
    return build_operator_category([b1, b2], close_under_questions=True)


OPERATOR_CATEGORY_FIXTURES = [
    "sz_unclosed", "sz_closed", "zx_unclosed", "zx_closed", "vshape3", "colorable3",
]

ALL_CATEGORY_FIXTURES = PLAIN_CATEGORY_FIXTURES + OPERATOR_CATEGORY_FIXTURES


@pytest.fixture(scope="session")
def cabello():
    scn = parse_scenario(
        bundled_fixture("cabello18.scn").read_text(), "cabello18.scn"
    )
    return build_scenario_category(scn)


@pytest.fixture(scope="session")
def generated_scenarios():
    from genscen import random_closed_scenario

    return [random_closed_scenario(seed) for seed in range(50)]


@pytest.fixture
def fixture_category(request):
    """Indirection fixture: resolves a category fixture by name."""
    value = request.getfixturevalue(request.param)
    return getattr(value, "base", value)


@pytest.fixture
def operator_category(request):
    return request.getfixturevalue(request.param)
