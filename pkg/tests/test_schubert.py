import numpy as np
import pytest

from modules.combinatorics import ProblemSpec, count_classes, catalan
from modules.schubert import (
    BoxPartition,
    CohomologyElement,
    special_class,
    pieri_multiply,
    multiply_special_classes,
    intersection_number,
    wronski_map_degree_schubert
)
from utils.helpers import InvalidArgumentError


def test_box_partition_validation():
    assert BoxPartition(2, 1, 3).codim == 3
    with pytest.raises(InvalidArgumentError):
        BoxPartition(1, 2, 3)
    with pytest.raises(InvalidArgumentError):
        BoxPartition(3, 0, 3)


def test_cohomology_element_drops_zero_terms():
    element = CohomologyElement(3, {BoxPartition(1, 0, 3): 0, BoxPartition(1, 1, 3): 2})
    assert element.as_dict() == {(1, 1): 2}
    assert CohomologyElement(3).is_zero()


def test_addition():
    total = special_class(1, 3) + special_class(1, 3) + special_class(2, 3)
    assert total.as_dict() == {(2, 0): 1, (1, 0): 2}
    with pytest.raises(InvalidArgumentError):
        special_class(1, 3) + special_class(1, 4)


def test_pieri_sigma1_squared():
    assert pieri_multiply(special_class(1, 3), 1).as_dict() == {(2, 0): 1, (1, 1): 1}


def test_pieri_vanishes_past_the_box():
    assert pieri_multiply(CohomologyElement(3, {BoxPartition(2, 2, 3): 1}), 1).is_zero()


def test_special_class_range():
    assert special_class(0, 3) == CohomologyElement.identity(3)
    with pytest.raises(InvalidArgumentError):
        special_class(3, 3)


def test_sigma1_fourth_power_in_g24():
    assert multiply_special_classes([1, 1, 1, 1], 3).as_dict() == {(2, 2): 2}


@pytest.mark.parametrize("d, m, expected", [
    (2, (1, 1), 1),
    (3, (1, 1, 1, 1), 2),
    (3, (2, 1), 1),
    (4, (2, 2, 1), 2),
    (4, (1, 1, 1, 1, 1, 1), 5),
    (4, (1, 1, 1), 1),
    (5, (5, 1), 0),
    (3, (2, 2, 2), 0),
    (4, (1, 1), 0),
])
def test_intersection_number_examples(d, m, expected):
    assert intersection_number(ProblemSpec(d, m)) == expected


@pytest.mark.parametrize("d", range(1, 11))
def test_wronski_map_degree_is_catalan(d):
    assert wronski_map_degree_schubert(d) == catalan(d)


def test_intersection_matches_count_on_small_grid():
    for d in range(2, 6):
        for m in [(1, 1), (2, 1), (2, 2), (1, 1, 1), (2, 1, 1), (3, 2, 1), (1, 1, 1, 1), (2, 2, 1, 1)]:
            spec = ProblemSpec(d, m)
            assert intersection_number(spec) == count_classes(spec), spec.label()


def test_intersection_number_ignores_point_order():
    rng = np.random.default_rng(5)
    for d in range(2, 9):
        for _ in range(6):
            n = int(rng.integers(2, 6))
            m = tuple(int(v) for v in rng.integers(1, d, size=n))
            expected = intersection_number(ProblemSpec(d, m))
            for _ in range(3):
                shuffled = tuple(int(v) for v in rng.permutation(m))
                assert intersection_number(ProblemSpec(d, shuffled)) == expected, (d, m)
