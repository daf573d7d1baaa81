from fractions import Fraction

import pytest

from services.errors import BudgetExceededError, MalformedLPError
from services.instance_service import (CFL, FacilityLocationInstance, build_cfl_proper_instance,
                                       generate_random_instance)
from services.lp_model import (EQ, GE, LE, Constraint, LinearProgram, Variable, lp_from_text, lp_to_text,
                               make_constraint, parse_var)
from services.relaxation_service import standard_lp
from services.solver_service import (INFEASIBLE, OPTIMAL, UNBOUNDED, check_feasible, farkas_system,
                                     integral_optimum, integrality_gap, is_feasible, solve_lp)


def _lp(constraints, objective, names=('x', 'y')):
    return LinearProgram([Variable(n) for n in names], constraints, objective)


def test_parse_var_names():
    assert parse_var('y[3]') == ('y', 3)
    assert parse_var('x[1,7]') == ('x', 1, 7)
    with pytest.raises(MalformedLPError):
        parse_var('z[1]')

def test_linear_program_rejects_undeclared_variable():
    with pytest.raises(MalformedLPError):
        _lp([Constraint({'w': Fraction(1)}, LE, Fraction(1), 'c')], {})

def test_linear_program_rejects_inverted_bounds():
    with pytest.raises(MalformedLPError):
        LinearProgram([Variable('x', Fraction(2), Fraction(1))], [], {})

def test_lp_text_format_round_trip():
    lp = _lp([make_constraint([('x', 1), ('y', "1/2")], GE, 1, 'c1'),
              make_constraint([('x', 1)], LE, 3, 'c2')], {'x': Fraction(2), 'y': Fraction(1, 3)})
    back = lp_from_text(lp_to_text(lp))
    assert back.constraints == lp.constraints
    assert back.objective == lp.objective
    assert solve_lp(back).objective_value == solve_lp(lp).objective_value

def test_lp_from_text_malformed():
    with pytest.raises(MalformedLPError):
        lp_from_text("var x 0 inf\nc1: 1*x <> 3\n")

def test_solve_lp_optimal_with_certificate():
    lp = _lp([Constraint({'x': Fraction(1), 'y': Fraction(1)}, GE, Fraction(1), 'cover'),
              Constraint({'x': Fraction(1), 'y': Fraction(-1)}, EQ, Fraction(1, 3), 'tilt')],
             {'x': Fraction(1), 'y': Fraction(2)})
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.values['x'] == Fraction(2, 3)
    assert sol.values['y'] == Fraction(1, 3)
    assert sol.objective_value == Fraction(4, 3)
    assert sol.certificate_verified is True

def test_solve_lp_rejects_corrupted_dual_certificate(mocker):
    from services import solver_service
    exact = solver_service._verify_dual
    mocker.patch('services.solver_service._verify_dual',
                 side_effect=lambda form, duals, objective: exact(form, [d + 1 for d in duals], objective))
    lp = _lp([Constraint({'x': Fraction(1), 'y': Fraction(1)}, GE, Fraction(1), 'cover'),
              Constraint({'x': Fraction(1), 'y': Fraction(-1)}, EQ, Fraction(1, 3), 'tilt')],
             {'x': Fraction(1), 'y': Fraction(2)})
    with pytest.raises(MalformedLPError, match='dual certificate'):
        solve_lp(lp)

def test_solve_lp_infeasible():
    lp = _lp([Constraint({'x': Fraction(1)}, GE, Fraction(2), 'lo'),
              Constraint({'x': Fraction(1)}, LE, Fraction(1), 'hi')], {'x': Fraction(1)}, names=('x',))
    assert solve_lp(lp).status == INFEASIBLE

def test_solve_lp_unbounded():
    lp = _lp([], {'x': Fraction(-1)}, names=('x',))
    assert solve_lp(lp).status == UNBOUNDED

def test_solve_lp_degenerate_cycle_prone_program():
    # classic cycling example for Dantzig pricing
    names = ('x1', 'x2', 'x3', 'x4')
    rows = [
        Constraint({'x1': Fraction(1, 2), 'x2': Fraction(-11, 2), 'x3': Fraction(-5, 2), 'x4': Fraction(9)}, LE, Fraction(0), 'r1'),
        Constraint({'x1': Fraction(1, 2), 'x2': Fraction(-3, 2), 'x3': Fraction(-1, 2), 'x4': Fraction(1)}, LE, Fraction(0), 'r2'),
        Constraint({'x1': Fraction(1)}, LE, Fraction(1), 'r3'),
    ]
    objective = {'x1': Fraction(-10), 'x2': Fraction(57), 'x3': Fraction(9), 'x4': Fraction(24)}
    sol = solve_lp(LinearProgram([Variable(n) for n in names], rows, objective))
    assert sol.status == OPTIMAL
    assert sol.objective_value == -1

def test_check_feasible_reports_violations():
    lp = _lp([Constraint({'x': Fraction(1), 'y': Fraction(1)}, EQ, Fraction(1), 'cover')], {})
    ok, violations = check_feasible({'x': Fraction(1, 2), 'y': Fraction(1, 3)}, lp)
    assert ok is False
    assert violations[0]['constraint'] == 'cover'
    assert violations[0]['lhs'] == Fraction(5, 6)

def test_check_feasible_missing_value():
    lp = _lp([], {})
    with pytest.raises(MalformedLPError):
        check_feasible({'x': Fraction(0)}, lp)
    ok, _ = check_feasible({'x': Fraction(0)}, lp, default_zero=True)
    assert ok is True

def test_is_feasible_uses_farkas_certificate():
    rows = [Constraint({'x': Fraction(1)}, GE, Fraction(2), 'lo')]
    rows += [Constraint({'x': Fraction(1)}, LE, Fraction(k), f"hi{k}") for k in range(1, 5)]
    lp = _lp(rows, {}, names=('x',))
    ok, cert = is_feasible(lp)
    assert ok is False
    alt = farkas_system(lp)
    assert check_feasible(cert, alt)[0]

def test_is_feasible_returns_point():
    lp = _lp([Constraint({'x': Fraction(1), 'y': Fraction(1)}, EQ, Fraction(1), 'cover')], {})
    ok, point = is_feasible(lp)
    assert ok is True
    assert point['x'] + point['y'] == 1

def test_integral_optimum_single_facility():
    inst = FacilityLocationInstance(CFL, 1, 1, (Fraction(3),), 1, {(0, 0): Fraction(2)})
    result = integral_optimum(inst)
    assert result.value == 5
    assert result.open_facilities == (0,)
    assert result.assignment == {0: 0}

def test_integral_optimum_cfl_proper_opens_everything():
    result = integral_optimum(build_cfl_proper_instance(5))
    assert result.value == 1
    assert len(result.open_facilities) == 5

def test_integral_optimum_budget():
    inst = generate_random_instance(6, 6, 'cfl', 2, seed=3)
    with pytest.raises(BudgetExceededError) as exc:
        integral_optimum(inst, budget=2)
    assert exc.value.budget == 2

def test_integral_optimum_is_at_least_lp():
    inst = generate_random_instance(3, 5, 'cfl', 2, seed=11)
    lp_value = solve_lp(standard_lp(inst)).objective_value
    assert integral_optimum(inst).value >= lp_value

def test_integrality_gap_cfl_proper_classic():
    inst = build_cfl_proper_instance(5)
    report = integrality_gap(inst, standard_lp(inst, aggregate_clients=True))
    assert report.lp_value == Fraction(1, 25)
    assert report.integral_value == 1
    assert report.gap == 25

def test_integrality_gap_ls_classic(ls20):
    report = integrality_gap(ls20, standard_lp(ls20, aggregate_clients=True))
    assert report.lp_value <= Fraction(1, 2)
    assert report.integral_value >= 1
    assert report.gap >= 2

def test_integrality_gap_skips_integral_over_budget():
    inst = generate_random_instance(6, 6, 'cfl', 2, seed=3)
    report = integrality_gap(inst, standard_lp(inst), budget=1)
    assert report.integral_skipped is True
    assert report.gap is None
    assert report.to_json()['integral_value'] is None
