"""
Proper Service Module - bad solutions for proper relaxations of LBFL and CFL,
their gap reports, and the small-scale checks around them.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import config
from .errors import (BudgetExceededError, InfeasibleInputError, InvalidInstanceError,
                     ProjectionMismatchError, check_budget)
from .instance_service import (LabeledInstance, base_of, build_cfl_proper_instance, build_lbfl_gap_instance,
                               example1_blocks, build_example1_instance)
from .lp_model import EQ, Constraint, LinearProgram, Variable, x_var, y_var
from .rational import jsonable, rational_field
from .relaxation_service import (Class, ClassSet, class_var, classic_to_star, complexity, constellation_lp,
                                 integral_solutions, project_constellation, solution_class, standard_lp,
                                 star_lp)
from .solver_service import (OPTIMAL, GapReport, check_feasible, integral_optimum, is_feasible, solve_lp)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


# LBFL

@dataclass(frozen=True)
class ExclusiveSets:
    """
    Client blocks of the LBFL gap instance. Simplex facility i owns the
    contiguous block [i(B-1), (i+1)(B-1)); the two far facilities share the
    rest. Facility i's discarded client is the i-th client of the far block.
    """
    n: int
    B: int
    blocks: Tuple[range, ...]
    far: range
    discarded: Tuple[int, ...]

    def exclusive(self, i: int) -> range:
        return self.blocks[i] if i < self.n - 1 else self.far

    def owner(self, j: int) -> Optional[int]:
        k = j // (self.B - 1)
        return k if k < self.n - 1 else None


def exclusive_sets(n: int) -> ExclusiveSets:
    B = n ** 2
    block = B - 1
    blocks = tuple(range(i * block, (i + 1) * block) for i in range(n - 1))
    far = range((n - 1) * block, n ** 3)
    sets = ExclusiveSets(n, B, blocks, far, tuple(far.start + i for i in range(n - 1)))
    if len(far) != B + n - 1:
        raise InvalidInstanceError("far block must hold B + n - 1 clients")
    return sets


def _check_lbfl_params(n: int, c: int) -> None:
    if c < 2 or n - c - 1 < 1:
        raise InvalidInstanceError(f"need c >= 2 and n - c - 1 >= 1 (n={n}, c={c})")


@dataclass(frozen=True)
class RoundMeasures:
    phi: Fraction
    xi: Fraction
    n: int
    c: Optional[int] = None
    t: Optional[int] = None

    def to_json(self) -> dict:
        return {'phi': rational_field(self.phi), 'xi': rational_field(self.xi),
                'n': self.n, 'c': self.c, 't': self.t}


def lbfl_round_measures(n: int, c: int) -> RoundMeasures:
    _check_lbfl_params(n, c)
    phi = Fraction(n * n + n - 1, n * n)
    xi = (Fraction(n * n - 1, n * n) - Fraction(n - c - 1, n - 1) * phi) * Fraction(n - 1, n - c)
    if phi <= 0 or xi <= 0:
        raise InvalidInstanceError(f"round measures not positive at n={n}, c={c}")
    return RoundMeasures(phi, xi, n, c=c)


@dataclass(frozen=True)
class RoundFractions:
    """Per unit of measure: how much of a client goes to a facility of each role."""
    a_own: Fraction
    a_cross: Fraction
    a_far: Fraction
    b_own: Fraction
    b_cross: Fraction

    def to_json(self) -> dict:
        return jsonable(self.__dict__)


def lbfl_round_fractions(n: int, c: int) -> RoundFractions:
    _check_lbfl_params(n, c)
    cross_den = (n - 1) * (n - 2) * (n * n - 1)
    return RoundFractions(
        a_own=Fraction(n - c - 1, n - 1),
        a_cross=Fraction(n - c - 1, cross_den),
        a_far=Fraction(n * n, 2 * (n * n + n - 1)),
        b_own=Fraction(n - c, n - 1),
        b_cross=Fraction(n - c, cross_den),
    )


def _simplex_part_count(n: int, size: int) -> int:
    absent = n - 1 - size
    return math.comb(n - 1, size) * math.perm(absent * (n * n - 1), size)


def _simplex_classes(sets: ExclusiveSets, size: int):
    """Admissible simplex parts: `size` simplex facilities, each with its block plus one client of an absent block."""
    simplex = range(sets.n - 1)
    for chosen in itertools.combinations(simplex, size):
        absent = [i for i in simplex if i not in chosen]
        spare = [j for i in absent for j in sets.blocks[i]]
        for picks in itertools.permutations(spare, size):
            pairs = [(i, j) for i in chosen for j in sets.blocks[i]]
            pairs += list(zip(chosen, picks))
            yield Class.of(chosen, pairs)


def _far_classes(sets: ExclusiveSets):
    for f in (sets.n - 1, sets.n):
        for members in itertools.combinations(sets.far, sets.B):
            yield Class.of([f], [(f, j) for j in members])


@dataclass
class RoundEnumeration:
    fractions: RoundFractions
    class_counts: Dict[str, int]
    # every own (resp. cross) pair received the same fraction
    uniform: bool

    def mismatches(self, closed: RoundFractions) -> List[str]:
        return [k for k in closed.__dict__ if getattr(closed, k) != getattr(self.fractions, k)]


def lbfl_round_enumeration(n: int, c: int, budget: Optional[int] = None) -> RoundEnumeration:
    """
    Literal enumeration of the admissible classes of both rounds, with uniform
    measure. A Round A class is a simplex part with n-c-1 facilities times a
    far part; the two factors are independent, so each is counted on its own.
    """
    _check_lbfl_params(n, c)
    budget = config.ENUM_BUDGET if budget is None else budget
    sets = exclusive_sets(n)
    counts = {
        'round_a_simplex': _simplex_part_count(n, n - c - 1),
        'round_a_far': 2 * math.comb(len(sets.far), sets.B),
        'round_b': _simplex_part_count(n, n - c),
    }
    check_budget("admissible classes", sum(counts.values()), budget)

    def tally(classes) -> Tuple[int, Dict[Tuple[int, int], int]]:
        total, hits = 0, {}
        for cl in classes:
            total += 1
            for pair in cl.assignments:
                hits[pair] = hits.get(pair, 0) + 1
        return total, hits

    def role_fraction(total, hits, pairs) -> Tuple[Fraction, bool]:
        values = {Fraction(hits.get(p, 0), total) for p in pairs}
        return min(values), len(values) == 1

    own_pairs = [(i, j) for i in range(n - 1) for j in sets.blocks[i]]
    cross_pairs = [(i, j) for i in range(n - 1) for k in range(n - 1) if k != i for j in sets.blocks[k]]
    far_pairs = [(f, j) for f in (n - 1, n) for j in sets.far]

    a_total, a_hits = tally(_simplex_classes(sets, n - c - 1))
    f_total, f_hits = tally(_far_classes(sets))
    b_total, b_hits = tally(_simplex_classes(sets, n - c))
    a_own, u1 = role_fraction(a_total, a_hits, own_pairs)
    a_cross, u2 = role_fraction(a_total, a_hits, cross_pairs)
    a_far, u3 = role_fraction(f_total, f_hits, far_pairs)
    b_own, u4 = role_fraction(b_total, b_hits, own_pairs)
    b_cross, u5 = role_fraction(b_total, b_hits, cross_pairs)
    logger.info("enumerated %d + %d + %d admissible classes at n=%d c=%d", a_total, f_total, b_total, n, c)
    return RoundEnumeration(RoundFractions(a_own, a_cross, a_far, b_own, b_cross),
                            {'round_a_simplex': a_total, 'round_a_far': f_total, 'round_b': b_total},
                            all((u1, u2, u3, u4, u5)))


@dataclass
class LbflProjection:
    """(y*, x*) by role: own block, cross (another simplex block), far."""
    n: int
    sets: ExclusiveSets
    measures: RoundMeasures
    y: Dict[int, Fraction]
    own: Fraction
    cross: Fraction
    far: Fraction
    # after Round A the far assignments already sit at their final value
    far_identity_ok: bool = True

    def x(self, i: int, j: int) -> Fraction:
        owner = self.sets.owner(j)
        if i >= self.n - 1:
            return self.far if owner is None else ZERO
        if owner is None:
            return ZERO
        return self.own if owner == i else self.cross

    def to_json(self) -> dict:
        return {'n': self.n, 'measures': self.measures.to_json(), 'y': jsonable(self.y),
                'x': {'own': jsonable(self.own), 'cross': jsonable(self.cross), 'far': jsonable(self.far)},
                'far_identity_ok': self.far_identity_ok}


def _expect(coordinate: str, expected: Fraction, actual: Fraction) -> None:
    if expected != actual:
        raise ProjectionMismatchError(coordinate, expected, actual)


def lbfl_bad_projection(inst: LabeledInstance) -> LbflProjection:
    n, c = int(inst.param('n')), int(inst.param('c'))
    B = n * n
    measures = lbfl_round_measures(n, c)
    rounds = lbfl_round_fractions(n, c)
    sets = exclusive_sets(n)
    phi, xi = measures.phi, measures.xi
    own = phi * rounds.a_own + xi * rounds.b_own
    cross = phi * rounds.a_cross + xi * rounds.b_cross
    far = phi * rounds.a_far
    y = {i: phi * Fraction(n - c - 1, n - 1) + xi * Fraction(n - c, n - 1) for i in range(n - 1)}
    y[n - 1] = y[n] = phi / 2

    far_ok = far == Fraction(1, 2)
    if not far_ok:
        logger.warning("far assignments after Round A are %s, not 1/2", far)
    _expect('x[own]', Fraction(B - 1, B), own)
    _expect('x[cross]', Fraction(1, B * (n - 2)), cross)
    _expect('x[far]', Fraction(1, 2), far)
    for i in range(n - 1):
        _expect(y_var(i), Fraction(B - 1, B), y[i])
        _expect(f"load[{i}]", B * y[i], (B - 1) * own + (n - 2) * (B - 1) * cross)
    for f in (n - 1, n):
        _expect(y_var(f), Fraction(n * n + n - 1, 2 * B), y[f])
        _expect(f"load[{f}]", B * y[f], len(sets.far) * far)
    _expect('cover[simplex]', ONE, own + (n - 2) * cross)
    _expect('cover[far]', ONE, 2 * far)
    return LbflProjection(n, sets, measures, y, own, cross, far, far_ok)


def _aggregated_point(lp: LinearProgram, y: Callable[[int], Fraction],
                      x: Callable[[int, int], Fraction], facilities: Sequence[int]) -> Dict[str, Fraction]:
    point = {y_var(i): y(i) for i in facilities}
    for g, members in enumerate(lp.meta['blocks']):
        for i in facilities:
            point[x_var(i, g)] = x(i, members[0])
    return point


@dataclass
class IntegralBound:
    formula: Fraction
    brute_force: Optional[Fraction] = None

    @property
    def value(self) -> Fraction:
        return self.brute_force if self.brute_force is not None else self.formula


def lbfl_integral_bound(inst: LabeledInstance, budget: Optional[int] = None) -> IntegralBound:
    """
    Either some simplex facility stays closed and its B-1 clients pay at least
    D each, or every simplex facility opens and the n-1 clients it lacks come
    from the far point at D' each.
    """
    n, D, far = int(inst.param('n')), inst.param('D'), inst.param('D_far')
    B = n * n
    bound = IntegralBound(min((B - 1) * D, (n - 1) * far))
    try:
        bound.brute_force = integral_optimum(inst, budget).value
    except BudgetExceededError as exc:
        logger.info("brute force skipped: %s", exc)
    return bound


def lbfl_gap_report(inst: LabeledInstance, projection: LbflProjection) -> GapReport:
    lp = standard_lp(inst, aggregate_clients=True)
    facilities = list(base_of(inst).facilities)
    point = _aggregated_point(lp, lambda i: projection.y[i], projection.x, facilities)
    ok, violations = check_feasible(point, lp)
    if not ok:
        raise ProjectionMismatchError(violations[0]['constraint'], violations[0]['rhs'], violations[0]['lhs'])
    cost = lp.evaluate(point)
    n, B, D = projection.n, projection.n ** 2, inst.param('D')
    _expect('cost', (n - 1) * (B - 1) * D / (n * n), cost)
    bound = lbfl_integral_bound(inst)
    certificate = {'formula_bound': bound.formula, 'brute_force': bound.brute_force,
                   'integral_is_lower_bound': bound.brute_force is None, 'measures': projection.measures.to_json()}
    return GapReport(cost, bound.value, 'proper-lbfl', certificate)


# CFL

def class_density(cl: Class, special_facility: Optional[int]) -> Fraction:
    others = [i for i in cl.open_facilities if i != special_facility]
    if not others:
        raise InvalidInstanceError("class has no facility besides the special one")
    return Fraction(sum(len(cl.clients_of(i)) for i in others), len(others))


def cyclic_support(instance, solution: Tuple[Sequence[int], Dict[int, int]], r: int) -> Tuple[ClassSet, List[Fraction]]:
    """
    Classes over r cyclically consecutive open facilities, each keeping the
    solution's assignments; weight 1/r apiece projects back onto the solution.
    """
    opened, assignment = solution
    opened = sorted(opened)
    t = len(opened)
    if not 1 <= r <= t:
        raise InvalidInstanceError(f"window size {r} must lie in [1, {t}]")
    classes = []
    for start in range(t):
        window = [opened[(start + k) % t] for k in range(r)]
        pairs = [(i, j) for j, i in assignment.items() if i in window]
        classes.append(Class.of(window, pairs))
    return ClassSet(tuple(classes)), [Fraction(1, r)] * t


def canonical_cfl_solution(inst: LabeledInstance) -> Tuple[List[int], Dict[int, int]]:
    """Facilities 0..n-2 take U clients each, the last facility takes the last client."""
    n, U = int(inst.param('n')), int(inst.param('U'))
    assignment = {j: min(j // U, n - 1) for j in base_of(inst).clients}
    return list(range(n)), assignment


def cfl_round_measures(n: int, t: int) -> RoundMeasures:
    if not 1 <= t <= n - 1:
        raise InfeasibleInputError(f"t must lie in [1, {n - 1}]")
    return RoundMeasures(Fraction(1, n * t), Fraction(n - 1, t) * (1 - Fraction(1, n * n)), n, t=t)


@dataclass
class CflProjection:
    n: int
    measures: RoundMeasures
    y: Dict[int, Fraction]
    # every client has the same assignment vector
    x: Dict[int, Fraction]

    def to_json(self) -> dict:
        return {'n': self.n, 'measures': self.measures.to_json(), 'y': jsonable(self.y), 'x': jsonable(self.x)}


def cfl_bad_projection(inst: LabeledInstance, t: Optional[int] = None) -> CflProjection:
    """
    Round A spreads phi over all facility permutations of a density-U class
    with t facilities, Round B spreads xi over permutations of the first n-1.
    """
    n, U = int(inst.param('n')), int(inst.param('U'))
    m = base_of(inst).n_clients
    t = n - 1 if t is None else t
    rm = cfl_round_measures(n, t)
    y = {i: rm.phi * Fraction(t, n) + rm.xi * Fraction(t, n - 1) for i in range(n - 1)}
    y[n - 1] = rm.phi * Fraction(t, n)
    share_a = rm.phi * Fraction(t * U, m * n)
    share_b = rm.xi * Fraction(t * U, m * (n - 1))
    x = {i: share_a + share_b for i in range(n - 1)}
    x[n - 1] = share_a

    x_last = Fraction(U, n * n) / m
    _expect(y_var(n - 1), Fraction(1, n * n), y[n - 1])
    _expect(f"x[{n - 1},*]", x_last, x[n - 1])
    for i in range(n - 1):
        _expect(y_var(i), ONE, y[i])
        _expect(f"x[{i},*]", (1 - x_last) / (n - 1), x[i])

    lp = standard_lp(inst, aggregate_clients=True)
    point = _aggregated_point(lp, lambda i: y[i], lambda i, j: x[i], range(n))
    ok, violations = check_feasible(point, lp)
    if not ok:
        raise ProjectionMismatchError(violations[0]['constraint'], violations[0]['rhs'], violations[0]['lhs'])
    return CflProjection(n, rm, y, x)


def cfl_gap_report(inst: LabeledInstance, projection: CflProjection) -> GapReport:
    """
    Cost is f_n * y_n. Since (n-1)U < m every integral solution opens all n
    facilities, so the integral optimum is at least f_n; brute force confirms it.
    """
    base = base_of(inst)
    n = projection.n
    cost = sum((base.opening_cost[i] * projection.y[i] for i in range(n)), ZERO)
    coverage_bound = base.opening_cost[n - 1] if (n - 1) * base.capacity_or_bound < base.n_clients else ZERO
    certificate = {'coverage_bound': coverage_bound, 'measures': projection.measures.to_json()}
    try:
        integral = integral_optimum(inst).value
        certificate['brute_force'] = integral
    except BudgetExceededError as exc:
        logger.info("brute force skipped: %s", exc)
        integral = coverage_bound
    return GapReport(cost, integral, 'proper-cfl', certificate)


# Integral class sets and the four-facility LBFL example

def theorem_gap1_classset(inst, budget: Optional[int] = None) -> ClassSet:
    """One class per integral solution."""
    classes = tuple(solution_class(opened, assignment) for opened, assignment in integral_solutions(inst, budget))
    if not classes:
        raise InfeasibleInputError("instance has no integral solution")
    return ClassSet(classes, symmetric_closed=True)


@dataclass
class Gap1Check:
    lp_value: Fraction
    integral_value: Fraction
    total_min: Fraction
    total_max: Fraction
    complexity: Fraction
    vertex_integral: bool = True

    @property
    def passed(self) -> bool:
        return (self.lp_value == self.integral_value and self.total_min == self.total_max == 1
                and self.vertex_integral)

    def to_json(self) -> dict:
        return jsonable({'lp_value': self.lp_value, 'integral_value': self.integral_value,
                         'total_min': self.total_min, 'total_max': self.total_max,
                         'complexity': self.complexity, 'vertex_integral': self.vertex_integral,
                         'passed': self.passed})


def gap1_check(inst, class_set: ClassSet) -> Gap1Check:
    """LP(C) optimum against brute force, and sum of class weights pinned to 1 over the whole region."""
    lp = constellation_lp(inst, class_set)
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise InfeasibleInputError(f"constellation LP is {sol.status.lower()}")
    totals = []
    for sign in (1, -1):
        total_lp = LinearProgram(lp.variables, lp.constraints, {v.name: Fraction(sign) for v in lp.variables},
                                 name='class-total')
        totals.append(sign * solve_lp(total_lp).objective_value)
    y, x = project_constellation(class_set, [sol.values.get(class_var(k), ZERO) for k in range(len(class_set))])
    vertex_integral = all(v in (ZERO, ONE) for v in list(y.values()) + list(x.values()))
    return Gap1Check(sol.objective_value, integral_optimum(inst).value, totals[0], totals[1],
                     complexity(class_set, inst), vertex_integral)


def example1_point() -> Tuple[Dict[int, Fraction], Dict[Tuple[int, int], Fraction]]:
    """The fractional solution: facilities 0, 1 integral on S1, S2; 2 and 3 at 9/10 split over S3, S4."""
    s1, s2, s3, s4 = example1_blocks()
    y = {0: ONE, 1: ONE, 2: Fraction(9, 10), 3: Fraction(9, 10)}
    x = {}
    for j in s1:
        x[(0, j)] = ONE
    for j in s2:
        x[(1, j)] = ONE
    for j in s3:
        x[(2, j)], x[(3, j)] = Fraction(9, 10), Fraction(1, 10)
    for j in s4:
        x[(2, j)], x[(3, j)] = Fraction(1, 10), Fraction(9, 10)
    return y, x


# facility -> blocks it serves in the support of the fractional solution
_EXAMPLE1_SUPPORT = {0: (0,), 1: (1,), 2: (2, 3), 3: (2, 3)}


def example1_class_types() -> List[Tuple[Tuple[int, ...], Dict[Tuple[int, int], int]]]:
    """
    Classes of the complexity-3/4 set that fit inside the support, up to
    permuting clients within a block: (open facilities, (facility, block) -> count).
    Full integral solutions with at most three facilities, and three-facility
    restrictions of four-facility solutions whose dropped facility keeps >= B.
    """
    sizes = [len(b) for b in example1_blocks()]
    B = 10
    m = sum(sizes)
    types = []
    for pick in (2, 3):
        # full solution {0, 1, pick}: every client within the support
        types.append(((0, 1, pick), {(0, 0): sizes[0], (1, 1): sizes[1], (pick, 2): sizes[2], (pick, 3): sizes[3]}))
        for c0 in range(B, sizes[0] + 1):
            for c1 in range(B, sizes[1] + 1):
                for a3 in range(sizes[2] + 1):
                    for a4 in range(sizes[3] + 1):
                        served = c0 + c1 + a3 + a4
                        if a3 + a4 < B or m - served < B:
                            continue
                        counts = {(0, 0): c0, (1, 1): c1, (pick, 2): a3, (pick, 3): a4}
                        types.append(((0, 1, pick), {k: v for k, v in counts.items() if v}))
    return types


@dataclass
class Example1Report:
    star_feasible: bool
    star_count: int
    projection_feasible: bool
    type_count: int
    measure_bound: Fraction
    facility0_demand: Fraction

    @property
    def passed(self) -> bool:
        return self.star_feasible and not self.projection_feasible and self.measure_bound == Fraction(18, 10)

    def to_json(self) -> dict:
        return {'star_feasible': self.star_feasible, 'star_count': self.star_count,
                'projection_feasible': self.projection_feasible, 'type_count': self.type_count,
                'measure_bound': rational_field(self.measure_bound),
                'facility0_demand': rational_field(self.facility0_demand), 'passed': self.passed}


def example1_verify() -> Example1Report:
    """
    (i) the fractional solution decomposes into stars feasible for the star LP;
    (ii) no weighting of the complexity-3/4 classes projects onto it.

    (ii) is decided on class types: the target is invariant under permuting
    clients within a block, so averaging any projecting weights over those
    permutations gives projecting weights that are uniform per type.
    """
    inst = build_example1_instance()
    y, x = example1_point()
    weights = classic_to_star(inst, y, x)
    lp = star_lp(inst, stars=list(weights))
    star_ok, _ = check_feasible({s.name: w for s, w in weights.items()}, lp)

    blocks = example1_blocks()
    types = example1_class_types()
    var = [f"w[{k}]" for k in range(len(types))]

    def projection_rows(facilities):
        rows = []
        for i in facilities:
            coeffs = {var[k]: ONE for k, (opened, _) in enumerate(types) if i in opened}
            rows.append(Constraint(coeffs, EQ, y[i], f"proj_y[{i}]"))
            for b in _EXAMPLE1_SUPPORT[i]:
                coeffs = {var[k]: Fraction(counts[(i, b)], len(blocks[b]))
                          for k, (_, counts) in enumerate(types) if counts.get((i, b))}
                rows.append(Constraint(coeffs, EQ, x[(i, blocks[b][0])], f"proj_x[{i},S{b + 1}]"))
        return rows

    variables = [Variable(v) for v in var]
    feasible, _ = is_feasible(LinearProgram(variables, projection_rows(range(4)), {}, name='example1'))

    # smallest measure of classes holding facility 2 or 3 that their own rows allow,
    # read off the dual: sum over those rows of multiplier * right-hand side
    holders = {v: ONE for v, (opened, _) in zip(var, types) if 2 in opened or 3 in opened}
    measure_rows = projection_rows((2, 3))
    relaxed = solve_lp(LinearProgram(variables, measure_rows, holders, name='example1-measure'))
    measure = sum((relaxed.duals[row.name] * row.rhs for row in measure_rows), ZERO)
    # every such class also opens facility 0
    demand = sum((relaxed.values[v] for v, (opened, _) in zip(var, types) if 0 in opened), ZERO)
    report = Example1Report(star_ok, len(weights), feasible, len(types), measure, demand)
    logger.info("example1: star feasible %s, projection feasible %s over %d types",
                star_ok, feasible, len(types))
    return report


# Series

def gap_series(family: str, ns: Sequence[int], c: int = 2, D: Fraction = ONE) -> List[dict]:
    """Rows n, lp_value, integral_value, gap for the cfl-proper or lbfl-gap family."""
    rows = []
    for n in ns:
        if family == 'cfl-proper':
            inst = build_cfl_proper_instance(n)
            report = cfl_gap_report(inst, cfl_bad_projection(inst))
        elif family == 'lbfl-gap':
            inst = build_lbfl_gap_instance(n, c, D)
            report = lbfl_gap_report(inst, lbfl_bad_projection(inst))
        else:
            raise InvalidInstanceError(f"unknown family '{family}'")
        rows.append({'n': n, 'lp_value': report.lp_value, 'integral_value': report.integral_value,
                     'gap': report.gap})
    return rows
