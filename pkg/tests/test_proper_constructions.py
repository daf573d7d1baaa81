from dataclasses import replace
from fractions import Fraction

import pytest

from services import proper_service
from services.errors import BudgetExceededError, InfeasibleInputError, InvalidInstanceError
from services.instance_service import (CFL, FacilityLocationInstance, build_cfl_proper_instance,
                                       build_lbfl_gap_instance, generate_random_instance)
from services.proper_service import (canonical_cfl_solution, cfl_bad_projection, cfl_gap_report,
                                     cfl_round_measures, class_density, cyclic_support, example1_verify,
                                     exclusive_sets, gap1_check, gap_series, lbfl_bad_projection,
                                     lbfl_gap_report, lbfl_integral_bound, lbfl_round_enumeration,
                                     lbfl_round_fractions, lbfl_round_measures, theorem_gap1_classset)
from services.relaxation_service import Class, project_constellation

F = Fraction


@pytest.fixture(scope='module')
def lbfl5():
    return build_lbfl_gap_instance(5, 2, 1)


@pytest.fixture(scope='module')
def cfl5():
    return build_cfl_proper_instance(5)


def test_exclusive_sets_layout():
    sets = exclusive_sets(5)
    assert [len(b) for b in sets.blocks] == [24] * 4
    assert sets.far.start == 96
    assert len(sets.far) == 29
    assert sets.discarded == (96, 97, 98, 99)
    assert sets.owner(23) == 0
    assert sets.owner(24) == 1
    assert sets.owner(96) is None

def test_lbfl_round_measures():
    measures = lbfl_round_measures(5, 2)
    assert measures.phi == F(29, 25)
    assert measures.xi == F(38, 75)
    with pytest.raises(InvalidInstanceError):
        lbfl_round_measures(3, 2)

def test_lbfl_round_fractions_closed_form():
    rounds = lbfl_round_fractions(4, 2)
    assert rounds.a_own == F(1, 3)
    assert rounds.a_cross == F(1, 90)
    assert rounds.a_far == F(8, 19)
    assert rounds.b_own == F(2, 3)
    assert rounds.b_cross == F(1, 45)

def test_lbfl_round_enumeration_matches_closed_form():
    enum = lbfl_round_enumeration(4, 2)
    assert enum.class_counts == {'round_a_simplex': 90, 'round_a_far': 1938, 'round_b': 630}
    assert enum.uniform is True
    assert enum.mismatches(lbfl_round_fractions(4, 2)) == []

def test_lbfl_round_enumeration_budget():
    with pytest.raises(BudgetExceededError):
        lbfl_round_enumeration(4, 2, budget=100)

def test_lbfl_bad_projection_values(lbfl5):
    projection = lbfl_bad_projection(lbfl5)
    assert projection.own == F(24, 25)
    assert projection.cross == F(1, 75)
    assert projection.far == F(1, 2)
    assert projection.y[0] == F(24, 25)
    assert projection.y[4] == projection.y[5] == F(29, 50)
    assert projection.far_identity_ok is True
    assert projection.x(0, 0) == F(24, 25)
    assert projection.x(1, 0) == F(1, 75)
    assert projection.x(4, 96) == F(1, 2)
    assert projection.x(0, 96) == 0

def test_lbfl_gap_report(lbfl5):
    report = lbfl_gap_report(lbfl5, lbfl_bad_projection(lbfl5))
    assert report.lp_value == F(96, 25)
    assert report.integral_value == 24
    assert report.gap == F(25, 4)
    assert report.certificate['formula_bound'] == 24

def test_lbfl_integral_bound_falls_back_to_formula(mocker, lbfl5):
    mocker.patch('services.proper_service.integral_optimum',
                 side_effect=BudgetExceededError('facility subsets', 47, 1))
    bound = lbfl_integral_bound(lbfl5)
    assert bound.brute_force is None
    assert bound.value == 24
    report = lbfl_gap_report(lbfl5, lbfl_bad_projection(lbfl5))
    assert report.certificate['integral_is_lower_bound'] is True

def test_lbfl_gap_series_grows_with_n():
    rows = gap_series('lbfl-gap', [4, 5, 6])
    assert [r['gap'] for r in rows] == [F(16, 3), F(25, 4), F(36, 5)]
    assert rows[0]['lp_value'] == F(45, 16)

def test_cfl_round_measures():
    measures = cfl_round_measures(5, 4)
    assert measures.phi == F(1, 20)
    assert measures.xi == F(24, 25)
    with pytest.raises(InfeasibleInputError):
        cfl_round_measures(5, 5)

def test_cfl_bad_projection_values(cfl5):
    projection = cfl_bad_projection(cfl5)
    assert projection.y == {0: 1, 1: 1, 2: 1, 3: 1, 4: F(1, 25)}
    assert projection.x[4] == F(1, 101)
    assert projection.x[0] == F(25, 101)

def test_cfl_bad_projection_other_round_size(cfl5):
    assert cfl_bad_projection(cfl5, t=2).y == cfl_bad_projection(cfl5).y

def test_cfl_gap_report(cfl5):
    report = cfl_gap_report(cfl5, cfl_bad_projection(cfl5))
    assert report.lp_value == F(1, 25)
    assert report.integral_value == 1
    assert report.gap == 25
    assert report.certificate['brute_force'] == 1

def test_cfl_gap_report_coverage_fallback(mocker, cfl5):
    mocker.patch('services.proper_service.integral_optimum',
                 side_effect=BudgetExceededError('facility subsets', 31, 1))
    report = cfl_gap_report(cfl5, cfl_bad_projection(cfl5))
    assert report.integral_value == 1
    assert 'brute_force' not in report.certificate

def test_cfl_gap_series():
    rows = gap_series('cfl-proper', [3, 4, 5])
    assert [r['gap'] for r in rows] == [9, 16, 25]
    with pytest.raises(InvalidInstanceError):
        gap_series('ls', [3])

def test_class_density():
    cl = Class.of([0, 1, 4], [(0, 0), (0, 1), (1, 2), (4, 3)])
    assert class_density(cl, 4) == F(3, 2)
    assert class_density(cl, None) == F(4, 3)
    with pytest.raises(InvalidInstanceError):
        class_density(Class.of([4], [(4, 0)]), 4)

def test_cyclic_support_projects_onto_solution(cfl5):
    solution = canonical_cfl_solution(cfl5)
    classes, weights = cyclic_support(cfl5, solution, 2)
    assert len(classes) == 5
    assert weights == [F(1, 2)] * 5
    y, x = project_constellation(classes, weights)
    assert y == {i: 1 for i in range(5)}
    assert x[(4, 100)] == 1
    assert x[(0, 24)] == 1
    assert class_density(classes.classes[0], 4) == 25
    with pytest.raises(InvalidInstanceError):
        cyclic_support(cfl5, solution, 0)

def test_theorem_gap1_classset_expresses_integral_hull():
    inst = FacilityLocationInstance(CFL, 2, 2, (F(1), F(2)), 2, {(0, 1): F(3), (1, 0): F(2)})
    classes = theorem_gap1_classset(inst)
    assert len(classes) == 6
    check = gap1_check(inst, classes)
    assert check.lp_value == 3
    assert check.integral_value == 3
    assert check.total_min == check.total_max == 1
    assert check.complexity == 1
    assert check.vertex_integral
    assert check.passed

@pytest.mark.parametrize('seed', range(10))
def test_theorem_gap1_classset_on_random_instances(seed):
    inst = generate_random_instance(3, 4, 'cfl' if seed % 2 == 0 else 'lbfl', 2, seed=seed)
    check = gap1_check(inst, theorem_gap1_classset(inst))
    assert check.lp_value == check.integral_value
    assert check.passed, check.to_json()

def test_example1_verify():
    report = example1_verify()
    assert report.star_feasible is True
    assert report.star_count == 20
    assert report.projection_feasible is False
    assert report.type_count == 526
    assert report.measure_bound == F(9, 5)
    assert report.facility0_demand == F(9, 5)
    assert report.passed

def test_example1_measure_is_the_verified_dual_value(mocker):
    spy = mocker.spy(proper_service, 'solve_lp')
    report = example1_verify()
    sol = spy.spy_return
    assert sol.certificate_verified
    assert report.measure_bound == sol.objective_value == F(9, 5)
    assert any(v != 0 for v in sol.duals.values())

def test_example1_measure_follows_the_duals(mocker):
    real = proper_service.solve_lp

    def doubled_duals(lp):
        sol = real(lp)
        return replace(sol, duals={k: 2 * v for k, v in sol.duals.items()})

    mocker.patch('services.proper_service.solve_lp', side_effect=doubled_duals)
    report = example1_verify()
    assert report.measure_bound == F(18, 5)
    assert not report.passed
