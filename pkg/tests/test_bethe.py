import dataclasses
import math
from itertools import product

import numpy as np
import pytest

from modules.combinatorics import ProblemSpec, count_classes
from modules.bethe import (
    MasterProblem,
    SolverConfig,
    CriticalOrbit,
    OrbitSolver,
    master_function,
    master_log_gradient,
    master_log_hessian,
    wronskian_form_residual,
    orbit_distance,
    solve_orbits,
    exact_k1_oracle,
    reconstruct_class,
    boundary_class,
    verify_class,
    sample_configuration,
    perturbation_spot_check
)
from utils.helpers import (
    InvalidArgumentError,
    InvalidConfigurationError,
    DomainError,
    NotCriticalError
)


def random_problem(rng, m, d):
    return MasterProblem(tuple(sample_configuration(len(m), rng)), tuple(m), d)


def random_domain_point(rng, prob, margin=0.2):
    """k points at distance > margin from each other and from z."""
    while True:
        t = rng.uniform(-1.5, 1.5, size=prob.k) + 1j * rng.uniform(-1.5, 1.5, size=prob.k)
        points = np.concatenate([t, np.asarray(prob.z)])
        gaps = np.abs(points[:, None] - points[None, :]) + np.eye(len(points)) * 10
        if gaps[: prob.k].min() > margin:
            return t


def same_orbit_sets(a, b, tol):
    return len(a) == len(b) and all(
        min(orbit_distance(x.points, y.points) for y in b) < tol for x in a)


class TestSolverConfig:

    def test_from_dict_ignores_unknown_keys(self, caplog):
        cfg = SolverConfig.from_dict({"seed": 3, "eps_newton": "1e-9", "colour": "blue"})
        assert cfg.seed == 3 and cfg.eps_newton == 1e-9
        assert "colour" in caplog.text

    def test_rejects_bad_values(self):
        with pytest.raises(InvalidArgumentError):
            SolverConfig(eps_newton=0.0)
        with pytest.raises(InvalidArgumentError):
            SolverConfig(saturation_window=0)
        with pytest.raises(InvalidArgumentError):
            SolverConfig(seed=-1)

    def test_monodromy_settings_validated(self):
        with pytest.raises(InvalidArgumentError):
            SolverConfig(monodromy_loops=-1)
        with pytest.raises(InvalidArgumentError):
            SolverConfig(monodromy_window=0)
        assert SolverConfig(monodromy_loops=0).monodromy_loops == 0

    def test_to_dict_leaves_out_thread_count(self):
        assert "threads" not in SolverConfig(threads=4).to_dict()
        assert SolverConfig(threads=4).to_dict() == SolverConfig(threads=1).to_dict()

    def test_to_dict(self):
        assert SolverConfig(seed=9).to_dict()["seed"] == 9


class TestMasterProblem:

    def test_derived_order(self):
        prob = MasterProblem((0, 1, 2j), (2, 2, 1), 4)
        assert (prob.M, prob.k) == (5, 2)
        assert prob.spec == ProblemSpec(4, (2, 2, 1))

    def test_repeated_points_rejected(self):
        with pytest.raises(InvalidConfigurationError):
            MasterProblem((0, 0), (1, 1), 2)

    def test_order_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            MasterProblem((0, 1, 2), (1, 1, 1), 2)
        with pytest.raises(InvalidArgumentError):
            MasterProblem((0, 1), (1, 1), 4)


class TestMasterFunction:

    def test_gradient_example(self):
        prob = MasterProblem((0, 1), (1, 1), 2)
        np.testing.assert_allclose(master_log_gradient([0.5], prob), [0.0], atol=1e-15)
        np.testing.assert_allclose(master_log_gradient([2.0], prob), [-1.5])

    def test_domain_errors_name_the_pair(self):
        prob = MasterProblem((0, 1, 2, 3), (1, 1, 1, 1), 3)
        with pytest.raises(DomainError) as info:
            master_log_gradient([0.5, 0.5], prob)
        assert info.value.pair == ("t_1", "t_2")
        with pytest.raises(DomainError) as info:
            master_log_gradient([0.5, 2.0], prob)
        assert info.value.pair == ("t_2", "z_3")

    def test_wrong_length_rejected(self):
        prob = MasterProblem((0, 1, 2, 3), (1, 1, 1, 1), 3)
        with pytest.raises(InvalidArgumentError):
            master_log_gradient([0.5], prob)

    def test_gradient_matches_central_differences(self, rng):
        h = 1e-5
        for m, d in [((1, 1, 1, 1), 3), ((2, 2, 1), 4), ((1, 1, 1), 3), ((2, 1, 1, 1, 1), 4)] * 5:
            prob = random_problem(rng, m, d)
            for _ in range(100):
                t = random_domain_point(rng, prob)
                phi = master_function(t, prob)
                gradient = master_log_gradient(t, prob)
                for i in range(prob.k):
                    step = np.zeros(prob.k, dtype=complex)
                    step[i] = h
                    fd = (master_function(t + step, prob) - master_function(t - step, prob)) / (2 * h * phi)
                    assert abs(fd - gradient[i]) <= 1e-5 * max(1.0, abs(gradient[i]))

    def test_hessian_matches_gradient_differences(self, rng):
        h = 1e-6
        prob = random_problem(rng, (1, 1, 1, 1, 1, 1), 4)
        t = random_domain_point(rng, prob)
        J = master_log_hessian(t, prob)
        np.testing.assert_allclose(J, J.T)
        for j in range(prob.k):
            step = np.zeros(prob.k, dtype=complex)
            step[j] = h
            column = (master_log_gradient(t + step, prob) - master_log_gradient(t - step, prob)) / (2 * h)
            np.testing.assert_allclose(column, J[:, j], rtol=1e-5, atol=1e-6)

    def test_wronskian_form_is_negated_gradient(self, rng):
        prob = random_problem(rng, (2, 2, 1), 4)
        for _ in range(20):
            t = random_domain_point(rng, prob)
            np.testing.assert_allclose(wronskian_form_residual(t, prob),
                                       -master_log_gradient(t, prob), rtol=1e-9, atol=1e-9)


class TestCriticalOrbit:

    def test_permutations_give_identical_records(self, catalan_problem, solver_config):
        orbit = solve_orbits(catalan_problem, solver_config)[0]
        shuffled = CriticalOrbit(tuple(reversed(orbit.points)), orbit.residual, orbit.hessian_condition)
        assert shuffled.points == orbit.points
        assert shuffled.key == orbit.key

    def test_degenerate_orbits_are_flagged_not_dropped(self, catalan_problem):
        cfg = SolverConfig(hessian_condition_limit=1.0, saturation_window=100)
        orbits = solve_orbits(catalan_problem, cfg)
        assert len(orbits) == 2
        assert all(orbit.degenerate for orbit in orbits)

    def test_orbit_distance(self):
        assert orbit_distance([0, 1], [1, 0]) == 0.0
        assert orbit_distance([0, 1], [0.1, 1]) == pytest.approx(0.1)
        assert orbit_distance([0], [0, 1]) == float("inf")


class TestSolveOrbits:

    def test_two_simple_points(self, solver_config):
        prob = MasterProblem((0, 1), (1, 1), 2)
        orbits = solve_orbits(prob, solver_config)
        assert len(orbits) == 1
        assert orbits[0].points[0] == pytest.approx(0.5)
        assert orbits[0].residual < solver_config.eps_newton

    def test_catalan_instance(self, catalan_problem, solver_config):
        orbits = solve_orbits(catalan_problem, solver_config)
        assert len(orbits) == 2
        assert all(orbit.residual < solver_config.eps_newton for orbit in orbits)

    def test_boundary_case_has_no_critical_system(self, solver_config):
        with pytest.raises(InvalidArgumentError):
            solve_orbits(MasterProblem((0, 1, 2), (1, 1, 1), 4), solver_config)

    def test_thread_count_does_not_change_result(self, catalan_problem):
        serial = solve_orbits(catalan_problem, SolverConfig(seed=5, saturation_window=150))
        threaded = solve_orbits(catalan_problem, SolverConfig(seed=5, saturation_window=150,
                                                              threads=3, batch_size=16))
        assert [o.points for o in serial] == [o.points for o in threaded]

    def test_orbits_between_close_pairs_are_found(self, catalan_problem):
        solver = OrbitSolver(SolverConfig(seed=0, saturation_window=200))
        orbits = solver.solve(catalan_problem)
        assert len(orbits) == 2
        assert all(orbit.residual < solver.config.eps_newton for orbit in orbits)

    def test_double_points_reach_the_count(self):
        prob = MasterProblem(tuple(sample_configuration(3, np.random.default_rng(7))), (2, 2, 1), 4)
        assert len(solve_orbits(prob, SolverConfig(seed=7))) == 2

    def test_k1_root_between_close_points(self):
        prob = MasterProblem((0, 0.01, 1, 1j), (1, 1, 1, 1), 4)
        cfg = SolverConfig(seed=0, saturation_window=200, monodromy_loops=0)
        orbits = solve_orbits(prob, cfg)
        assert len(orbits) == count_classes(prob.spec) == 3
        assert same_orbit_sets(orbits, exact_k1_oracle(prob, cfg), cfg.delta_dedupe)
        assert any(abs(o.points[0] - 0.005) < 0.005 for o in orbits)

    def test_monodromy_reaches_every_orbit_from_one(self, catalan_problem, solver_config):
        full = solve_orbits(catalan_problem, solver_config)
        solver = OrbitSolver(SolverConfig(seed=1, monodromy_window=20, monodromy_loops=60))
        for orbit in full:
            grown = solver.complete_by_monodromy(catalan_problem, [orbit])
            assert same_orbit_sets(grown, full, 1e-6)
            assert solver.loops_used >= 1

    def test_monodromy_does_not_depend_on_threads(self, catalan_problem, solver_config):
        seed_orbit = solve_orbits(catalan_problem, solver_config)[:1]
        serial = OrbitSolver(SolverConfig(seed=2)).complete_by_monodromy(catalan_problem, seed_orbit)
        threaded = OrbitSolver(SolverConfig(seed=2, threads=3)).complete_by_monodromy(
            catalan_problem, seed_orbit)
        assert [o.points for o in serial] == [o.points for o in threaded]

    def test_monodromy_needs_a_known_orbit(self, catalan_problem):
        with pytest.raises(InvalidArgumentError):
            OrbitSolver().complete_by_monodromy(catalan_problem, [])

    def test_start_budget_is_respected(self, catalan_problem):
        solver = OrbitSolver(SolverConfig(max_starts=10))
        solver.solve(catalan_problem)
        assert solver.starts_used <= 10


class TestExactK1Oracle:

    def test_two_simple_points(self):
        orbits = exact_k1_oracle(MasterProblem((0, 1), (1, 1), 2))
        assert len(orbits) == 1
        assert orbits[0].points[0] == pytest.approx(0.5)

    def test_double_point_root_is_filtered(self):
        orbits = exact_k1_oracle(MasterProblem((0, 1), (2, 1), 3))
        assert len(orbits) == 1
        assert orbits[0].points[0] == pytest.approx(2 / 3)
        assert count_classes(ProblemSpec(3, (2, 1))) == 1

    def test_three_simple_points(self):
        orbits = exact_k1_oracle(MasterProblem((0, 1, 2), (1, 1, 1), 3))
        roots = sorted(o.points[0].real for o in orbits)
        assert roots == pytest.approx([1 - 3 ** -0.5, 1 + 3 ** -0.5])

    def test_requires_k_one(self, catalan_problem):
        with pytest.raises(InvalidArgumentError):
            exact_k1_oracle(catalan_problem)

    def test_matches_solver_on_small_instances(self, rng, solver_config):
        for m, d in [((1, 1), 2), ((2, 1), 3), ((1, 1, 1), 3), ((2, 1, 1), 4)]:
            prob = random_problem(rng, m, d)
            assert same_orbit_sets(solve_orbits(prob, solver_config), exact_k1_oracle(prob),
                                   solver_config.delta_dedupe)


class TestReconstruction:

    def test_two_simple_points(self):
        prob = MasterProblem((0, 1), (1, 1), 2)
        rc = reconstruct_class(solve_orbits(prob)[0], prob)
        np.testing.assert_allclose(rc.f.coeffs, [-0.5, 1], atol=1e-10)
        np.testing.assert_allclose(rc.g.coeffs, [0.25, -0.5, 1], atol=1e-10)
        assert rc.wronskian_residual < 1e-8
        assert rc.coprimality_margin > 1e-6

    def test_catalan_classes_verify(self, catalan_problem, solver_config):
        for orbit in solve_orbits(catalan_problem, solver_config):
            rc = reconstruct_class(orbit, catalan_problem)
            report = verify_class(rc, catalan_problem)
            assert report.passed, report.to_dict()
            assert (report.degree, report.order) == (3, 2)

    def test_residues_vanish_at_critical_points(self, catalan_problem, solver_config):
        W = catalan_problem.wronskian()
        for orbit in solve_orbits(catalan_problem, solver_config):
            rc = reconstruct_class(orbit, catalan_problem)
            df = rc.f.derivative()
            scale = max(1.0, max(abs(W(t) / df(t) ** 2) for t in orbit.points))
            assert max(abs(a) for a in rc.residues) < 10 * solver_config.eps_newton * scale

    def test_perturbed_point_is_not_critical(self, catalan_problem, solver_config):
        orbit = solve_orbits(catalan_problem, solver_config)[0]
        moved = CriticalOrbit(tuple(p + 1e-2 for p in orbit.points), 0.0, 1.0)
        with pytest.raises(NotCriticalError):
            reconstruct_class(moved, catalan_problem)

    def test_residues_scale_with_gradient(self, catalan_problem, solver_config):
        orbit = solve_orbits(catalan_problem, solver_config)[0]
        W = catalan_problem.wronskian()
        for gamma in (1e-2, 1e-4):
            moved = CriticalOrbit((orbit.points[0] + gamma,) + orbit.points[1:], 0.0, 1.0)
            t = np.asarray(moved.points)
            rc = reconstruct_class(moved, catalan_problem, tol=math.inf, eps_verify=math.inf)
            df = rc.f.derivative()
            b = np.array([W(ti) / df(ti) ** 2 for ti in t])
            expected = -b * master_log_gradient(t, catalan_problem)
            np.testing.assert_allclose(rc.residues, expected, rtol=1e-6, atol=1e-14)
            assert max(abs(a) for a in rc.residues) > 1e-4 * gamma * np.abs(b).max()

    def test_basis_change_keeps_verification(self, catalan_problem, solver_config):
        orbit = solve_orbits(catalan_problem, solver_config)[0]
        rc = reconstruct_class(orbit, catalan_problem)
        assert verify_class(dataclasses.replace(rc, g=rc.g + rc.f), catalan_problem).passed

    def test_non_basis_change_fails_verification(self, catalan_problem, solver_config):
        orbit = solve_orbits(catalan_problem, solver_config)[0]
        rc = reconstruct_class(orbit, catalan_problem)
        x = type(rc.f)([0.0, 1.0])
        report = verify_class(dataclasses.replace(rc, g=rc.g + x * rc.f), catalan_problem)
        assert not report.passed
        assert not report.wronskian_ok

    def test_van_vleck_polynomials_are_distinct(self, catalan_problem, solver_config):
        hs = []
        for orbit in solve_orbits(catalan_problem, solver_config):
            report = verify_class(reconstruct_class(orbit, catalan_problem), catalan_problem)
            assert report.van_vleck.degree <= len(catalan_problem.z) - 2
            hs.append(report.van_vleck)
        assert (hs[0] - hs[1]).coefficient_norm() > 1e-6


def test_boundary_class_is_primitive_of_wronskian():
    prob = MasterProblem((0, 1, 2), (1, 1, 1), 4)
    rc = boundary_class(prob)
    np.testing.assert_allclose(rc.g.derivative().coeffs, prob.wronskian().coeffs)
    assert rc.f.degree == 0
    report = verify_class(rc, prob)
    assert report.passed, report.to_dict()
    with pytest.raises(InvalidArgumentError):
        boundary_class(MasterProblem((0, 1), (1, 1), 2))


def test_sample_configuration_is_separated(rng):
    z = np.asarray(sample_configuration(6, rng, radius=2.0))
    assert len(z) == 6 and np.all(np.abs(z) <= 2.0)
    gaps = np.abs(z[:, None] - z[None, :]) + np.eye(6) * 10
    assert gaps.min() >= 1e-2 * 4.0


def test_perturbation_spot_check_is_stable(catalan_problem, solver_config):
    assert perturbation_spot_check(catalan_problem, solver_config).stable


ACCEPTANCE_INSTANCES = [
    (2, (1, 1), 1),
    (3, (1, 1, 1, 1), 2),
    (3, (2, 1), 1),
    (4, (2, 2, 1), 2),
    (4, (1, 1, 1, 1, 1, 1), 5),
]


@pytest.mark.slow
@pytest.mark.parametrize("d, m, expected", ACCEPTANCE_INSTANCES)
@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_generic_instances_reach_the_count(d, m, expected, seed):
    prob = random_problem(np.random.default_rng(seed), m, d)
    assert count_classes(prob.spec) == expected
    orbits = solve_orbits(prob, SolverConfig(seed=seed))
    assert len(orbits) == expected
    for orbit in orbits:
        rc = reconstruct_class(orbit, prob)
        report = verify_class(rc, prob)
        assert report.passed, report.to_dict()
        assert rc.wronskian_residual < 1e-8
        assert rc.coprimality_margin > 1e-6
        assert rc.f.degree + rc.g.degree == prob.M + 1


@pytest.mark.slow
def test_never_overcount_on_random_instances():
    rng = np.random.default_rng(2024)
    specs = [ProblemSpec(d, m) for d in range(2, 6) for n in range(2, 5)
             for m in product(range(1, 4), repeat=n)]
    specs = [s for s in specs if s.admissible and s.k >= 1 and count_classes(s) <= 6]
    for index in rng.choice(len(specs), size=200):
        spec = specs[index]
        prob = random_problem(rng, spec.m, spec.d)
        orbits = solve_orbits(prob, SolverConfig(seed=int(index), saturation_window=100))
        assert len(orbits) <= count_classes(spec), spec.label()


@pytest.mark.slow
def test_k1_oracle_equivalence_up_to_degree_six():
    rng = np.random.default_rng(7)
    for d in range(2, 7):
        for m in {tuple(sorted(c, reverse=True)) for n in range(2, d + 1)
                  for c in product(range(1, d), repeat=n) if sum(c) == d}:
            prob = random_problem(rng, m, d)
            cfg = SolverConfig(seed=d)
            assert same_orbit_sets(solve_orbits(prob, cfg), exact_k1_oracle(prob, cfg),
                                   cfg.delta_dedupe), (d, m)
