from fractions import Fraction

import pytest

from services.errors import BudgetExceededError, InfeasibleInputError, InvalidInstanceError
from services.instance_service import CFL, FacilityLocationInstance, generate_random_instance
from services.lp_model import x_var, y_var
from services.relaxation_service import (Class, ClassSet, Star, classic_to_star, complexity, constellation_lp,
                                         enumerate_stars, integral_solutions, project_constellation,
                                         solution_class, standard_lp, star_lp, star_marginals,
                                         symmetry_closure, validity_check)
from services.solver_service import OPTIMAL, solve_lp

F = Fraction


def _toy(n_facilities=2, n_clients=2, bound=2, opening=(1, 1)):
    return FacilityLocationInstance(CFL, n_facilities, n_clients, tuple(F(c) for c in opening), bound)


def test_standard_lp_shape():
    lp = standard_lp(_toy())
    assert len(lp.variables) == 2 + 4
    assert lp.constraint('capacity[0]').coeffs['y[0]'] == -2
    assert lp.constraint('cover[1]').rhs == 1

def test_standard_lp_aggregation_keeps_optimum():
    inst = generate_random_instance(3, 5, 'cfl', 2, seed=7)
    dense = solve_lp(standard_lp(inst)).objective_value
    aggregated = solve_lp(standard_lp(inst, aggregate_clients=True)).objective_value
    assert dense == aggregated

def test_star_lp_matches_classic_lp():
    inst = generate_random_instance(2, 3, 'cfl', 2, seed=5)
    assert len(enumerate_stars(inst)) == 12
    assert solve_lp(star_lp(inst)).objective_value == solve_lp(standard_lp(inst)).objective_value

@pytest.mark.parametrize('seed', range(50))
def test_star_lp_matches_classic_lp_on_random_instances(seed):
    inst = generate_random_instance(3, 4, 'cfl' if seed % 2 == 0 else 'lbfl', 2, seed=seed)
    classic = solve_lp(standard_lp(inst))
    star = solve_lp(star_lp(inst))
    assert classic.status == star.status == OPTIMAL
    assert star.objective_value == classic.objective_value
    y = {i: classic.values[y_var(i)] for i in inst.facilities}
    x = {(i, j): classic.values[x_var(i, j)] for i in inst.facilities for j in inst.clients}
    weights = classic_to_star(inst, y, x)
    cover, mass = star_marginals(weights)
    assert cover == {j: 1 for j in inst.clients}
    assert all(mass.get(i, 0) <= y[i] for i in inst.facilities)
    assert sum(w * s.cost(inst) for s, w in weights.items()) == classic.objective_value

def test_star_lp_budget():
    with pytest.raises(BudgetExceededError):
        star_lp(generate_random_instance(2, 3, 'cfl', 2, seed=5), budget=5)

def test_classic_to_star_preserves_marginals_and_cost():
    inst = _toy(2, 3, 2)
    y = {0: F(1), 1: F(3, 4)}
    x = {(0, 0): F(1), (0, 1): F(1, 2), (0, 2): F(1, 4), (1, 1): F(1, 2), (1, 2): F(3, 4)}
    weights = classic_to_star(inst, y, x)
    cover, mass = star_marginals(weights)
    assert cover == {0: 1, 1: 1, 2: 1}
    assert mass == y
    assert weights[Star(0, frozenset({0, 1}))] == F(1, 2)
    assert weights[Star(1, frozenset({1, 2}))] == F(1, 2)
    assert sum(w * s.cost(inst) for s, w in weights.items()) == F(7, 4)
    assert all(len(s.clients) <= 2 for s in weights)

def test_classic_to_star_drops_unused_opening():
    inst = _toy(2, 2, 2)
    y = {0: F(1), 1: F(1)}
    x = {(0, 0): F(1, 2), (1, 0): F(1, 2), (0, 1): F(1)}
    weights = classic_to_star(inst, y, x)
    assert all(s.clients for s in weights)
    assert weights == {Star(0, frozenset({0, 1})): F(1, 2), Star(0, frozenset({1})): F(1, 2),
                       Star(1, frozenset({0})): F(1, 2)}
    cover, mass = star_marginals(weights)
    assert cover == {0: 1, 1: 1}
    assert mass == {0: 1, 1: F(1, 2)}
    assert sum(w * s.cost(inst) for s, w in weights.items()) == F(3, 2)

def test_classic_to_star_rejects_infeasible():
    inst = _toy(2, 2, 2)
    with pytest.raises(InfeasibleInputError):
        classic_to_star(inst, {0: F(1, 2)}, {(0, 0): F(1), (0, 1): F(1)})

def test_class_rejects_closed_facility_assignment():
    with pytest.raises(InvalidInstanceError):
        Class.of([0], [(1, 0)])

def test_class_rejects_double_assignment():
    with pytest.raises(InvalidInstanceError):
        Class.of([0, 1], [(0, 0), (1, 0)])

def test_constellation_lp_rejects_empty_set():
    with pytest.raises(InvalidInstanceError):
        constellation_lp(_toy(), ClassSet(()))

def test_project_constellation_sums_weights():
    a = Class.of([0], [(0, 0), (0, 1)])
    b = Class.of([0, 1], [(0, 0), (1, 1)])
    y, x = project_constellation(ClassSet((a, b)), [F(1, 3), F(2, 3)])
    assert y == {0: 1, 1: F(2, 3)}
    assert x[(0, 0)] == 1
    assert x[(0, 1)] == F(1, 3)

def test_complexity_is_largest_open_count_over_openable():
    inst = _toy(3, 4, 2, opening=(0, 0, 0))
    assert complexity(ClassSet((Class.of([0, 1], [(0, 0)]),)), inst) == F(2, 3)

def test_symmetry_closure_counts_orbits():
    inst = _toy()
    closed = symmetry_closure(ClassSet((Class.of([0], [(0, 0), (0, 1)]), Class.of([0], [(0, 0)]))), inst)
    assert len(closed) == 6
    assert closed.symmetric_closed is True

def test_symmetry_closure_budget():
    with pytest.raises(BudgetExceededError):
        symmetry_closure(ClassSet((Class.of([0], [(0, 0)]),)), _toy(), budget=1)

def test_validity_check_all_integral_solutions():
    inst = _toy()
    classes = ClassSet(tuple(solution_class(o, a) for o, a in integral_solutions(inst)))
    assert len(classes) == 6
    assert validity_check(classes, inst) == (True, None)

def test_validity_check_reports_missing_solution():
    inst = _toy()
    classes = ClassSet(tuple(solution_class(o, a) for o, a in integral_solutions(inst)
                             if o != frozenset({0})))
    valid, witness = validity_check(classes, inst)
    assert valid is False
    assert witness == {'open_facilities': [0], 'assignment': [0, 0]}
