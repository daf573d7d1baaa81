from fractions import Fraction

import pytest

from services.errors import BudgetExceededError, InfeasibleInputError, IntegralVariableError, MissingWitnessError
from services.hierarchy_service import (ConeVector, WitnessPair, brute_membership, integral_points, ldlt_factor,
                                        oracle_crosscheck, oracle_grid, polytope_oracle, protection_matrix_check,
                                        protection_matrix_exists, psd_restriction_check, symmetry_factor_check,
                                        twin_identity_holds, twin_type2)
from services.instance_service import CFL, FacilityLocationInstance, build_ls_instance
from services.relaxation_service import standard_lp
from services.witness_service import root_solution

F = Fraction


def _K(n_clients=1, bound=1):
    return standard_lp(FacilityLocationInstance(CFL, 2, n_clients, (F(1), F(1)), bound))


def _point(values):
    return ConeVector(F(1), {k: F(v) for k, v in values.items()})


def test_twin_type2_and_identity():
    z = _point({'a': F(1, 2), 'b': F(1, 4)})
    type1 = _point({'a': 1, 'b': F(1, 2)})
    type2 = twin_type2(z, type1, 'a')
    assert type2.z0 == 1
    assert type2.value('a') == 0
    assert type2.value('b') == 0
    assert twin_identity_holds(z, type1, type2, 'a') == (True, None)

def test_twin_type2_rejects_integral_variable():
    z = _point({'a': 1})
    with pytest.raises(IntegralVariableError):
        twin_type2(z, z, 'a')

def test_symmetry_factor_check_passes_and_fails():
    z = _point({'a': F(1, 2), 'b': F(1, 4), 'c': 1})
    wa = WitnessPair('a', _point({'a': 1, 'b': F(1, 2), 'c': 1}))
    wb = WitnessPair('b', _point({'a': 1, 'b': 1, 'c': 1}))
    assert symmetry_factor_check(z, [wa, wb]) == (True, None)
    skewed = WitnessPair('b', _point({'a': F(1, 2), 'b': 1, 'c': 1}))
    ok, violation = symmetry_factor_check(z, [wa, skewed])
    assert ok is False
    assert violation['condition'] == 'symmetry'
    assert violation['indices'] == ['a', 'b']

def test_symmetry_factor_check_integral_coordinate_moved():
    z = _point({'a': F(1, 2), 'c': 1})
    ok, violation = symmetry_factor_check(z, [WitnessPair('a', _point({'a': 1, 'c': F(1, 2)}))])
    assert ok is False
    assert violation['condition'] == 'integral-unchanged'

def test_symmetry_factor_check_missing_witness():
    z = _point({'a': F(1, 2)})
    with pytest.raises(MissingWitnessError):
        symmetry_factor_check(z, {})

def test_polytope_oracle_requires_unit_z0():
    K = _K()
    oracle = polytope_oracle(K)
    point = {'y[0]': 1, 'y[1]': 0, 'x[0,0]': 1, 'x[1,0]': 0}
    assert oracle(_point(point)) is True
    assert oracle(ConeVector(F(1, 2), _point(point).coords)) is False

def test_protection_matrix_construct_and_check():
    K = _K()
    z = _point({'y[0]': F(1, 2), 'y[1]': F(1, 2), 'x[0,0]': F(1, 2), 'x[1,0]': F(1, 2)})
    found, view = protection_matrix_exists(K, z, construct=True)
    assert found is True
    ok, violations = protection_matrix_check(view, polytope_oracle(K))
    assert ok, violations

def test_point_outside_lifted_polytope():
    K = _K(n_clients=3, bound=2)
    z = _point({'y[0]': 1, 'y[1]': F(1, 2),
                'x[0,0]': F(1, 2), 'x[0,1]': F(1, 2), 'x[0,2]': 1,
                'x[1,0]': F(1, 2), 'x[1,1]': F(1, 2), 'x[1,2]': 0})
    assert polytope_oracle(K)(z) is True
    assert brute_membership(K, z, 1) is False
    assert protection_matrix_exists(K, z) is False

def test_brute_membership_rejects_bad_z0():
    with pytest.raises(InfeasibleInputError):
        brute_membership(_K(), ConeVector(F(2), {}), 1)

def test_protection_matrix_rounds_limit():
    with pytest.raises(BudgetExceededError):
        protection_matrix_exists(_K(), _point({}), rounds=0)

def test_oracle_grid_size_and_step():
    assert len(oracle_grid(_K(), F(1, 2))) == 81
    with pytest.raises(InfeasibleInputError):
        oracle_grid(_K(), F(2, 3))
    with pytest.raises(BudgetExceededError):
        oracle_grid(_K(), F(1, 2), budget=80)

def test_oracle_crosscheck_one_round():
    K = _K()
    report = oracle_crosscheck(K, 1, oracle_grid(K, F(1, 2)))
    assert report.points == 81
    assert report.inside_k == 10
    assert report.members == 10
    assert report.agree

def test_oracle_crosscheck_two_rounds_integral_grid():
    K = _K()
    report = oracle_crosscheck(K, 2, oracle_grid(K, F(1)))
    assert report.points == 16
    assert report.members == 4
    assert report.to_json()['agree'] is True

def test_ldlt_factor():
    assert ldlt_factor([[F(1), F(2)], [F(2), F(1)]])[0] is False
    assert ldlt_factor([[F(2), F(1)], [F(1), F(2)]]) == (True, [F(2), F(3, 2)])
    assert ldlt_factor([[F(0), F(0)], [F(0), F(0)]])[0] is True

def test_psd_restriction_check():
    assert psd_restriction_check([F(1, 2), F(1, 2)]) is True
    assert psd_restriction_check([F(0), F(1), F(1, 3)]) is True
    with pytest.raises(InfeasibleInputError):
        psd_restriction_check([F(3, 2)])

def test_oracle_crosscheck_quarter_grid():
    K = _K()
    report = oracle_crosscheck(K, 1, oracle_grid(K, F(1, 4)))
    assert report.points == 625
    assert report.inside_k == 35
    assert report.members == 35
    assert report.agree

def test_oracle_crosscheck_agrees_on_point_cut_by_one_round():
    K = _K(n_clients=3, bound=2)
    cut = _point({'y[0]': 1, 'y[1]': F(1, 2),
                  'x[0,0]': F(1, 2), 'x[0,1]': F(1, 2), 'x[0,2]': 1,
                  'x[1,0]': F(1, 2), 'x[1,1]': F(1, 2), 'x[1,2]': 0})
    vertex = _point({'y[0]': 1, 'y[1]': 1, 'x[0,0]': 1, 'x[0,1]': 1, 'x[0,2]': 0,
                     'x[1,0]': 0, 'x[1,1]': 0, 'x[1,2]': 1})
    outside = _point({name: 0 for name in cut.coords})
    report = oracle_crosscheck(K, 1, [cut, vertex, outside])
    assert report.points == 3
    assert report.inside_k == 2
    assert report.members == 1
    assert report.agree

def test_integral_vertices_survive_two_rounds():
    K = _K(n_clients=2, bound=2)
    vertices = integral_points(K)
    assert len(vertices) == 6
    for vertex in vertices:
        z = ConeVector(F(1), vertex)
        assert brute_membership(K, z, 2) is True
        assert protection_matrix_exists(K, z, rounds=2) is True

@pytest.mark.parametrize('n', [10, 20, 30])
def test_psd_restriction_holds_on_bad_solution(n):
    root = root_solution(build_ls_instance(n, n, 10))
    y = [root.y[i] for i in root.facilities]
    assert len(y) == 2 * n
    assert y.count(F(10, n * n)) == n
    assert psd_restriction_check(y) is True
