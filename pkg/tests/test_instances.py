from fractions import Fraction

import pytest

from services.errors import InvalidInstanceError
from services.instance_service import (
    CFL, CHEAP, COSTLY, FAR_CLUSTER, LBFL, SIMPLEX,
    FacilityLocationInstance,
    build_cfl_proper_instance,
    build_example1_instance,
    build_lbfl_gap_instance,
    build_ls_instance,
    example1_blocks,
    find_metric_violation,
    generate_instance,
    generate_random_instance,
    instance_from_json,
    instance_to_json,
    lbfl_gap_geometry,
    rederive_params,
)


def test_build_ls_instance_acceptance_parameters(ls20):
    assert ls20.base.n_clients == 160001
    assert ls20.base.capacity_or_bound == 8000
    assert ls20.param('a') == Fraction(1, 400)
    assert ls20.param('b') == Fraction(1, 40)
    assert ls20.param('delta') == Fraction(1, 10)
    assert ls20.with_label(CHEAP) == list(range(20))
    assert ls20.with_label(COSTLY) == list(range(20, 40))

def test_build_ls_instance_costs():
    inst = build_ls_instance(3, 3, 3)
    assert inst.base.opening_cost == tuple([Fraction(0)] * 3 + [Fraction(1)] * 3)
    assert inst.base.cost(4, 10) == 0

@pytest.mark.parametrize("n,l,H", [(0, 5, 1), (5, 0, 1), (5, 5, 0), (5, 5, "-1/2")])
def test_build_ls_instance_rejects_nonpositive(n, l, H):
    with pytest.raises(InvalidInstanceError):
        build_ls_instance(n, l, H)

def test_build_lbfl_gap_instance_shape():
    inst = build_lbfl_gap_instance(5, 2, 1)
    base = inst.base
    assert base.mode == LBFL
    assert base.n_facilities == 6
    assert base.n_clients == 125
    assert base.capacity_or_bound == 25
    assert inst.param('D_far') == 10
    assert inst.param('alpha') == Fraction(3, 5)
    assert inst.facility_labels == tuple([SIMPLEX] * 4 + [FAR_CLUSTER] * 2)

def test_build_lbfl_gap_instance_distances():
    inst = build_lbfl_gap_instance(5, 2, 1)
    base = inst.base
    # client 0 is exclusive to facility 0, client 24 to facility 1, client 96 is far
    assert base.cost(0, 0) == 0
    assert base.cost(1, 0) == 1
    assert base.cost(0, 24) == 1
    assert base.cost(0, 96) == 10
    assert base.cost(4, 96) == 0
    assert base.cost(5, 0) == 10
    assert find_metric_violation(base) is None

@pytest.mark.parametrize("n,c", [(5, 1), (3, 2), (4, 3)])
def test_build_lbfl_gap_instance_rejects_degenerate(n, c):
    with pytest.raises(InvalidInstanceError):
        build_lbfl_gap_instance(n, c, 1)

def test_lbfl_gap_geometry_small_n():
    inst = lbfl_gap_geometry(3, 1)
    assert inst.base.n_clients == 27
    assert inst.param('B') == 9

def test_build_cfl_proper_instance_shape():
    inst = build_cfl_proper_instance(5)
    assert inst.base.mode == CFL
    assert inst.base.n_clients == 101
    assert inst.param('U') == 25
    assert inst.base.opening_cost[-1] == 1
    assert sum(inst.base.opening_cost) == 1

def test_build_example1_instance_blocks():
    inst = build_example1_instance()
    assert inst.base.n_clients == 44
    assert inst.base.capacity_or_bound == 10
    assert [len(b) for b in example1_blocks()] == [13, 13, 9, 9]

def test_instance_validation_cfl_capacity():
    with pytest.raises(InvalidInstanceError, match="cannot serve"):
        FacilityLocationInstance(CFL, 1, 3, (Fraction(0),), 2)

def test_instance_validation_lbfl_too_few_clients():
    with pytest.raises(InvalidInstanceError):
        FacilityLocationInstance(LBFL, 1, 1, (Fraction(0),), 2)
    # allowed once flagged
    FacilityLocationInstance(LBFL, 1, 1, (Fraction(0),), 2, integral_infeasible=True)

def test_instance_validation_metric_violation():
    costs = {(0, 0): Fraction(10)}
    with pytest.raises(InvalidInstanceError, match="metric"):
        FacilityLocationInstance(CFL, 2, 2, (Fraction(0), Fraction(0)), 2, costs, metric=True)

def test_generate_random_instance_deterministic():
    a = generate_random_instance(3, 6, 'cfl', 3, seed=7)
    b = generate_random_instance(3, 6, 'cfl', 3, seed=7)
    assert a == b
    assert find_metric_violation(a) is None

def test_generate_random_instance_raises_capacity():
    inst = generate_random_instance(2, 9, 'cfl', 1, seed=1)
    assert inst.capacity_or_bound == 5

def test_instance_json_round_trip():
    inst = build_lbfl_gap_instance(4, 2, "3/2")
    back = instance_from_json(instance_to_json(inst, name='lbfl'))
    assert back.base.connection_cost == inst.base.connection_cost
    assert back.params == inst.params
    assert rederive_params(back)['D_far'] == 12

def test_instance_from_json_malformed():
    with pytest.raises(InvalidInstanceError):
        instance_from_json({'mode': 'CFL'})

def test_generate_instance_by_name():
    inst = generate_instance('cfl-proper', {'n': '4'})
    assert inst.base.n_clients == 49
    with pytest.raises(InvalidInstanceError):
        generate_instance('unknown', {})
