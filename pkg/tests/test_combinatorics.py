import math
from itertools import combinations_with_replacement, product

import numpy as np
import pytest

import modules.combinatorics as combinatorics
from modules.combinatorics import (
    ProblemSpec,
    binomial,
    sharp_formula,
    count_classes,
    classify_spec,
    dim_sing_formula,
    catalan,
    wronski_map_degree,
    genfun_coefficients
)
from utils.helpers import (
    SpecRegime,
    InvalidArgumentError,
    UnsupportedCaseError,
    InternalConsistencyError
)


def test_problem_spec_derived_quantities():
    spec = ProblemSpec(4, (2, 2, 1))
    assert (spec.n, spec.M, spec.k, spec.m_inf) == (3, 5, 2, 1)
    assert spec.admissible
    assert spec.label() == "d=4 m=(2,2,1)"


@pytest.mark.parametrize("d, m", [(0, (1,)), (3, ()), (3, (1, 0)), (3, (2, -1))])
def test_problem_spec_rejects_invalid(d, m):
    with pytest.raises(InvalidArgumentError):
        ProblemSpec(d, m)


def test_problem_spec_z_length_must_match():
    with pytest.raises(InvalidArgumentError):
        ProblemSpec(2, (1, 1), (0, 1, 2))


def test_binomial_convention():
    assert binomial(5, 2) == 10
    assert binomial(2, 3) == 0
    assert binomial(-1, 0) == 0
    assert binomial(0, 0) == 1
    with pytest.raises(InvalidArgumentError):
        binomial(3, -1)


@pytest.mark.parametrize("d, m, expected", [
    (2, (1, 1), 1),
    (3, (1, 1, 1, 1), 2),
    (3, (2, 1), 1),
    (4, (2, 2, 1), 2),
    (4, (1, 1, 1, 1, 1, 1), 5),
    (4, (1, 1, 1), 1),
    (5, (5, 1), 0),
    (3, (1, 1, 1), 2),
])
def test_sharp_formula_examples(d, m, expected):
    assert sharp_formula(ProblemSpec(d, m)) == expected


def test_sharp_formula_needs_two_points():
    with pytest.raises(UnsupportedCaseError):
        sharp_formula(ProblemSpec(3, (2,)))


@pytest.mark.parametrize("d, m, expected", [(3, (2,), 1), (3, (1,), 0), (5, (4,), 1)])
def test_count_classes_single_point(d, m, expected):
    assert count_classes(ProblemSpec(d, m)) == expected


@pytest.mark.parametrize("d", range(2, 9))
def test_catalan_reproduction(d):
    spec = ProblemSpec(d, (1,) * (2 * d - 2))
    assert sharp_formula(spec) == math.comb(2 * d - 2, d - 1) // d == catalan(d)


def test_catalan_numbers():
    assert [catalan(d) for d in range(1, 9)] == [1, 1, 2, 5, 14, 42, 132, 429]
    assert wronski_map_degree(5) == 14
    with pytest.raises(InvalidArgumentError):
        catalan(0)


@pytest.mark.parametrize("d, m, regime", [
    (3, (2,), SpecRegime.SINGLE_POINT),
    (5, (5, 1), SpecRegime.VANISHING),
    (2, (1, 1, 1), SpecRegime.VANISHING),
    (4, (1, 1), SpecRegime.VANISHING),
    (4, (1, 1, 1), SpecRegime.BOUNDARY),
    (3, (1, 1, 1, 1), SpecRegime.GENERIC),
])
def test_classify_spec(d, m, regime):
    assert classify_spec(ProblemSpec(d, m)) is regime


def test_vanishing_and_boundary_counts_on_grid():
    for d in range(1, 7):
        for m in (m for n in range(1, 6) for m in product(range(1, 7), repeat=n)):
            spec = ProblemSpec(d, m)
            regime = classify_spec(spec)
            if regime is SpecRegime.VANISHING:
                assert count_classes(spec) == 0, spec.label()
            elif regime is SpecRegime.BOUNDARY:
                assert count_classes(spec) == 1, spec.label()


@pytest.mark.parametrize("m, k, expected", [
    ((1, 1), 0, 1),
    ((1, 1), 1, 1),
    ((1, 1, 1, 1), 2, 2),
    ((2, 2, 1), 2, 2),
    ((3,), 0, 1),
    ((3,), 1, 0),
    ((1, 1), -1, 0),
    ((1, 1), 2, 0),
])
def test_dim_sing_formula_examples(m, k, expected):
    assert dim_sing_formula(m, k) == expected


def test_genfun_coefficients():
    assert genfun_coefficients(1) == [0]
    assert genfun_coefficients(4) == [0, 1, 0, 2]
    assert genfun_coefficients(6) == [0, 1, 0, 2, 0, 5]
    with pytest.raises(InvalidArgumentError):
        genfun_coefficients(0)


def test_counts_never_exceed_catalan():
    for d in range(2, 7):
        for m in [(1,) * j for j in range(2, 2 * d - 1)] + [(2, 1, 1), (2, 2), (3, 1, 1, 1)]:
            spec = ProblemSpec(d, m)
            if spec.M <= 2 * d - 2:
                assert count_classes(spec) <= catalan(d), spec.label()


def test_grouped_subset_sums_match_enumeration(monkeypatch):
    specs = [ProblemSpec(4, (2, 2, 1)), ProblemSpec(5, (1, 1, 2, 2, 1, 1)),
             ProblemSpec(6, (3, 1, 1, 1, 1, 3))]
    enumerated = [sharp_formula(spec) for spec in specs]
    monkeypatch.setattr(combinatorics, "SUBSET_ENUMERATION_LIMIT", 0)
    assert [sharp_formula(spec) for spec in specs] == enumerated
    assert dim_sing_formula((2, 2, 1), 2) == 2


def test_many_simple_points_use_grouping():
    d = 12
    assert sharp_formula(ProblemSpec(d, (1,) * (2 * d - 2))) == catalan(d)


def test_vanishing_specs_bypass_the_signed_sum():
    spec = ProblemSpec(2, (3, 3))
    assert count_classes(spec) == 0
    with pytest.raises(InternalConsistencyError):
        sharp_formula(spec)


def test_singular_dimensions_account_for_the_whole_product():
    for n in range(1, 7):
        for m in combinations_with_replacement(range(1, 6), n):
            M = sum(m)
            total = sum(dim_sing_formula(m, k) * (M - 2 * k + 1) for k in range(M // 2 + 1))
            assert total == math.prod(v + 1 for v in m), m


def test_sharp_formula_ignores_point_order():
    rng = np.random.default_rng(11)
    for d in range(2, 8):
        for _ in range(10):
            n = int(rng.integers(2, 6))
            m = tuple(int(v) for v in rng.integers(1, d, size=n))
            spec = ProblemSpec(d, m)
            if not spec.admissible:
                continue
            for _ in range(3):
                shuffled = tuple(int(v) for v in rng.permutation(m))
                assert sharp_formula(ProblemSpec(d, shuffled)) == sharp_formula(spec), m


@pytest.mark.parametrize("d", range(1, 11))
def test_wronski_map_degree_counts_simple_points(d):
    assert wronski_map_degree(d) == catalan(d)
    if d > 1:
        assert wronski_map_degree(d) == count_classes(ProblemSpec(d, (1,) * (2 * d - 2)))


def test_wronski_map_degree_needs_positive_degree():
    with pytest.raises(InvalidArgumentError):
        wronski_map_degree(0)
