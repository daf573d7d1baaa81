"""
Relaxation Service Module - the standard, star and constellation LPs,
conversions between them, and class sets.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import config
from .errors import InfeasibleInputError, InvalidInstanceError, check_budget
from .instance_service import CFL, LBFL, FacilityLocationInstance, base_of
from .lp_model import EQ, GE, LE, Constraint, LinearProgram, Variable, x_var, y_var
from .solver_service import check_feasible, is_feasible

logger = logging.getLogger(__name__)

Point = Dict[str, Fraction]


def standard_lp(instance, aggregate_clients: bool = False) -> LinearProgram:
    """
    The classic LP: opening plus connection cost, links x <= y, cover, 0..1 bounds, and
    the capacity row (CFL) or lower-bound row (LBFL) per facility.

    With aggregate_clients, clients sharing a cost row become one block of
    variables x[i,g] weighted by the block size; the optimum is unchanged.
    """
    inst = base_of(instance)
    if aggregate_clients:
        rows = list(inst.client_profiles().items())
        blocks = [(g, len(members), row) for g, (row, members) in enumerate(rows)]
        meta = {'aggregated': True, 'blocks': [members for _, members in rows]}
    else:
        blocks = [(j, 1, None) for j in inst.clients]
        meta = {'aggregated': False}

    def cost(i, j, row):
        return row[i] if row is not None else inst.cost(i, j)

    variables = [Variable(y_var(i), Fraction(0), Fraction(1)) for i in inst.facilities]
    variables += [Variable(x_var(i, j), Fraction(0), Fraction(1))
                  for i in inst.facilities for j, _, _ in blocks]
    objective: Dict[str, Fraction] = {}
    for i in inst.facilities:
        if inst.opening_cost[i]:
            objective[y_var(i)] = inst.opening_cost[i]
        for j, size, row in blocks:
            c = cost(i, j, row)
            if c:
                objective[x_var(i, j)] = size * c

    constraints = []
    for i in inst.facilities:
        for j, _, _ in blocks:
            constraints.append(Constraint({x_var(i, j): Fraction(1), y_var(i): Fraction(-1)}, LE,
                                          Fraction(0), f"link[{i},{j}]"))
    for j, _, _ in blocks:
        constraints.append(Constraint({x_var(i, j): Fraction(1) for i in inst.facilities}, EQ,
                                      Fraction(1), f"cover[{j}]"))
    bound = inst.capacity_or_bound
    for i in inst.facilities:
        coeffs = {x_var(i, j): Fraction(size) for j, size, _ in blocks}
        coeffs[y_var(i)] = Fraction(-bound)
        if inst.mode == CFL:
            constraints.append(Constraint(coeffs, LE, Fraction(0), f"capacity[{i}]"))
        else:
            constraints.append(Constraint(coeffs, GE, Fraction(0), f"lower[{i}]"))
    return LinearProgram(variables, constraints, objective, name='classic', meta=meta)


@dataclass(frozen=True)
class Star:
    facility: int
    clients: FrozenSet[int]

    def cost(self, inst: FacilityLocationInstance) -> Fraction:
        return inst.opening_cost[self.facility] + sum(
            (inst.cost(self.facility, j) for j in self.clients), Fraction(0))

    @property
    def name(self) -> str:
        return f"star[{self.facility}|{','.join(str(j) for j in sorted(self.clients))}]"


def _star_sizes(inst: FacilityLocationInstance, max_star_size: Optional[int]) -> range:
    top = inst.n_clients if max_star_size is None else min(max_star_size, inst.n_clients)
    if inst.mode == CFL:
        return range(1, min(inst.capacity_or_bound, top) + 1)
    return range(inst.capacity_or_bound, top + 1)


def star_count(instance, max_star_size: Optional[int] = None) -> int:
    inst = base_of(instance)
    return inst.n_facilities * sum(math.comb(inst.n_clients, k) for k in _star_sizes(inst, max_star_size))


def enumerate_stars(instance, max_star_size: Optional[int] = None,
                    budget: Optional[int] = None) -> List[Star]:
    inst = base_of(instance)
    check_budget("stars", star_count(inst, max_star_size), config.STAR_BUDGET if budget is None else budget)
    stars = []
    for i in inst.facilities:
        for k in _star_sizes(inst, max_star_size):
            for combo in itertools.combinations(inst.clients, k):
                stars.append(Star(i, frozenset(combo)))
    return stars


def star_lp(instance, max_star_size: Optional[int] = None, budget: Optional[int] = None,
            stars: Optional[Sequence[Star]] = None) -> LinearProgram:
    """LP over star variables: client cover = 1, facility use <= 1, x_s >= 0."""
    inst = base_of(instance)
    if stars is None:
        stars = enumerate_stars(inst, max_star_size, budget)
    variables = [Variable(s.name, Fraction(0), None) for s in stars]
    objective = {s.name: s.cost(inst) for s in stars if s.cost(inst)}
    cover: Dict[int, Dict[str, Fraction]] = {j: {} for j in inst.clients}
    budget_rows: Dict[int, Dict[str, Fraction]] = {i: {} for i in inst.facilities}
    for s in stars:
        budget_rows[s.facility][s.name] = Fraction(1)
        for j in s.clients:
            cover[j][s.name] = Fraction(1)
    constraints = [Constraint(coeffs, EQ, Fraction(1), f"cover[{j}]") for j, coeffs in cover.items()]
    constraints += [Constraint(coeffs, LE, Fraction(1), f"facility[{i}]")
                    for i, coeffs in budget_rows.items() if coeffs]
    return LinearProgram(variables, constraints, objective, name='star',
                         meta={'stars': {s.name: s for s in stars}})


def point_from_yx(y: Dict[int, Fraction], x: Dict[Tuple[int, int], Fraction], instance) -> Point:
    inst = base_of(instance)
    point = {y_var(i): y.get(i, Fraction(0)) for i in inst.facilities}
    for i in inst.facilities:
        for j in inst.clients:
            point[x_var(i, j)] = x.get((i, j), Fraction(0))
    return point


def classic_to_star(instance, y: Dict[int, Fraction], x: Dict[Tuple[int, int], Fraction]) -> Dict[Star, Fraction]:
    """
    Decompose a feasible classic solution into star weights.

    Facility i gets a rectangle of height y_i made of w_i = ceil(sum_j x_ij / y_i)
    unit-width strips. Clients are packed in index order, a piece of height x_ij
    each, filling the current strip and overflowing into the next one. Cutting
    at every packing height gives bands; a band becomes one star weighted by
    its height. A client's two pieces never share a height because x_ij <= y_i.
    Heights no client reaches (sum_j x_ij < y_i) are dropped, so facility i
    may end up with star mass below y_i and the cost can only go down.
    """
    inst = base_of(instance)
    ok, violations = check_feasible(point_from_yx(y, x, inst), standard_lp(inst))
    if not ok:
        raise InfeasibleInputError(f"solution violates {violations[0]['constraint']}")

    weights: Dict[Star, Fraction] = {}
    for i in inst.facilities:
        height = y.get(i, Fraction(0))
        if height == 0:
            continue
        pieces: List[Tuple[int, Fraction, Fraction]] = []  # (client, bottom, top)
        level = Fraction(0)
        for j in inst.clients:
            amount = x.get((i, j), Fraction(0))
            if amount == 0:
                continue
            if level + amount <= height:
                pieces.append((j, level, level + amount))
                level += amount
            else:
                pieces.append((j, level, height))
                level = amount - (height - level)
                pieces.append((j, Fraction(0), level))
            if level == height:
                level = Fraction(0)
        cuts = sorted({Fraction(0), height} | {b for _, b, _ in pieces} | {t for _, _, t in pieces})
        for lo, hi in zip(cuts, cuts[1:]):
            members = frozenset(j for j, b, t in pieces if b <= lo and hi <= t)
            if not members:
                continue
            star = Star(i, members)
            weights[star] = weights.get(star, Fraction(0)) + (hi - lo)
    return weights


def star_marginals(weights: Dict[Star, Fraction]) -> Tuple[Dict[int, Fraction], Dict[int, Fraction]]:
    """Per-client cover and per-facility mass of a star solution."""
    cover: Dict[int, Fraction] = {}
    mass: Dict[int, Fraction] = {}
    for star, w in weights.items():
        mass[star.facility] = mass.get(star.facility, Fraction(0)) + w
        for j in star.clients:
            cover[j] = cover.get(j, Fraction(0)) + w
    return cover, mass


@dataclass(frozen=True)
class Class:
    """0-1 (y, x) vector stored sparsely: the open facilities and the assigned pairs."""
    open_facilities: FrozenSet[int]
    assignments: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        seen = set()
        for i, j in self.assignments:
            if i not in self.open_facilities:
                raise InvalidInstanceError(f"class assigns client {j} to closed facility {i}")
            if j in seen:
                raise InvalidInstanceError(f"class assigns client {j} twice")
            seen.add(j)

    @classmethod
    def of(cls, facilities: Iterable[int], assignments: Iterable[Tuple[int, int]]) -> 'Class':
        return cls(frozenset(facilities), frozenset(assignments))

    def cost(self, inst: FacilityLocationInstance) -> Fraction:
        return sum((inst.opening_cost[i] for i in self.open_facilities), Fraction(0)) + sum(
            (inst.cost(i, j) for i, j in self.assignments), Fraction(0))

    def clients_of(self, i: int) -> List[int]:
        return sorted(j for f, j in self.assignments if f == i)

    @property
    def clients(self) -> FrozenSet[int]:
        return frozenset(j for _, j in self.assignments)

    def to_json(self) -> dict:
        return {'facilities': sorted(self.open_facilities), 'assignments': sorted([list(p) for p in self.assignments])}


@dataclass(frozen=True)
class ClassSet:
    classes: Tuple[Class, ...]
    symmetric_closed: bool = False

    def __len__(self):
        return len(self.classes)

    def __iter__(self) -> Iterator[Class]:
        return iter(self.classes)

    def to_json(self) -> List[dict]:
        return [cl.to_json() for cl in self.classes]

    @classmethod
    def from_json(cls, payload: List[dict], symmetric_closed: bool = False) -> 'ClassSet':
        return cls(tuple(Class.of(item['facilities'], [tuple(p) for p in item['assignments']])
                         for item in payload), symmetric_closed)


def class_var(k: int) -> str:
    return f"cl[{k}]"


def constellation_lp(instance, class_set: ClassSet) -> LinearProgram:
    inst = base_of(instance)
    if not len(class_set):
        raise InvalidInstanceError("class set is empty")
    variables = [Variable(class_var(k), Fraction(0), None) for k in range(len(class_set))]
    objective = {}
    cover: Dict[int, Dict[str, Fraction]] = {j: {} for j in inst.clients}
    budget_rows: Dict[int, Dict[str, Fraction]] = {i: {} for i in inst.facilities}
    for k, cl in enumerate(class_set):
        c = cl.cost(inst)
        if c:
            objective[class_var(k)] = c
        for i in cl.open_facilities:
            budget_rows[i][class_var(k)] = Fraction(1)
        for _, j in cl.assignments:
            cover[j][class_var(k)] = Fraction(1)
    constraints = [Constraint(coeffs, EQ, Fraction(1), f"cover[{j}]") for j, coeffs in cover.items()]
    constraints += [Constraint(coeffs, LE, Fraction(1), f"facility[{i}]") for i, coeffs in budget_rows.items()
                    if coeffs]
    return LinearProgram(variables, constraints, objective, name='constellation')


def project_constellation(class_set: ClassSet, class_weights) -> Tuple[Dict[int, Fraction],
                                                                      Dict[Tuple[int, int], Fraction]]:
    """y_i = sum of weights of classes opening i; x_ij = sum over classes assigning j to i."""
    if isinstance(class_weights, dict):
        items = [(cl, class_weights.get(cl, Fraction(0))) for cl in class_set]
    else:
        items = list(zip(class_set, class_weights))
    y: Dict[int, Fraction] = {}
    x: Dict[Tuple[int, int], Fraction] = {}
    for cl, w in items:
        if not w:
            continue
        for i in cl.open_facilities:
            y[i] = y.get(i, Fraction(0)) + w
        for pair in cl.assignments:
            x[pair] = x.get(pair, Fraction(0)) + w
    return y, x


def orbit_size_estimate(cl: Class, instance) -> int:
    """Upper bound on the orbit size: facility placements times client placements."""
    inst = base_of(instance)
    sizes = [len(cl.clients_of(i)) for i in sorted(cl.open_facilities)]
    placements = math.perm(inst.n_facilities, len(sizes))
    remaining, clients = inst.n_clients, 1
    for k in sizes:
        clients *= math.comb(remaining, k)
        remaining -= k
    return placements * clients


def class_orbit(cl: Class, instance) -> List[Class]:
    inst = base_of(instance)
    opened = sorted(cl.open_facilities)
    sizes = [len(cl.clients_of(i)) for i in opened]
    orbit = set()

    def place(k, used, chosen):
        if k == len(opened):
            yield chosen
            return
        free = [j for j in inst.clients if j not in used]
        for combo in itertools.combinations(free, sizes[k]):
            yield from place(k + 1, used | set(combo), chosen + [combo])

    for image in itertools.permutations(inst.facilities, len(opened)):
        for groups in place(0, set(), []):
            pairs = [(image[k], j) for k, combo in enumerate(groups) for j in combo]
            orbit.add(Class.of(image, pairs))
    return sorted(orbit, key=lambda c: (sorted(c.open_facilities), sorted(c.assignments)))


def symmetry_closure(class_set: ClassSet, instance, budget: Optional[int] = None) -> ClassSet:
    budget = config.ORBIT_BUDGET if budget is None else budget
    estimate = sum(orbit_size_estimate(cl, instance) for cl in class_set)
    check_budget("class orbit", estimate, budget)
    closed: Dict[Class, None] = {}
    for cl in class_set:
        if cl in closed:
            continue
        for member in class_orbit(cl, instance):
            closed.setdefault(member, None)
    return ClassSet(tuple(closed), symmetric_closed=True)


def max_openable(instance) -> int:
    """|F'|: largest facility count that some integral solution opens."""
    inst = base_of(instance)
    m, bound = inst.n_clients, inst.capacity_or_bound
    for k in range(inst.n_facilities, 0, -1):
        if inst.mode == CFL and k * bound >= m:
            return k
        if inst.mode == LBFL and k * bound <= m:
            return k
    raise InfeasibleInputError("instance has no integral solution")


def complexity(class_set: ClassSet, instance) -> Fraction:
    """max |F(cl)| / |F'| (a max, since class sets are finite)."""
    largest = max((len(cl.open_facilities) for cl in class_set), default=0)
    return Fraction(largest, max_openable(instance))


def integral_solution_count(instance) -> int:
    inst = base_of(instance)
    return sum(math.comb(inst.n_facilities, k) * k ** inst.n_clients for k in range(1, inst.n_facilities + 1))


def integral_solutions(instance, budget: Optional[int] = None) -> Iterator[Tuple[FrozenSet[int], Tuple[int, ...]]]:
    """
    Every integral solution as (open set, client -> facility tuple).
    In CFL an open facility may serve nobody; in LBFL each serves at least B.
    """
    inst = base_of(instance)
    check_budget("integral solutions", integral_solution_count(inst),
                 config.ENUM_BUDGET if budget is None else budget)
    bound = inst.capacity_or_bound
    for k in range(1, inst.n_facilities + 1):
        for opened in itertools.combinations(inst.facilities, k):
            for assignment in itertools.product(opened, repeat=inst.n_clients):
                loads = [assignment.count(i) for i in opened]
                if inst.mode == CFL and any(load > bound for load in loads):
                    continue
                if inst.mode == LBFL and any(load < bound for load in loads):
                    continue
                yield frozenset(opened), assignment


def solution_class(opened: FrozenSet[int], assignment: Sequence[int]) -> Class:
    return Class(frozenset(opened), frozenset((i, j) for j, i in enumerate(assignment)))


def projection_feasibility_lp(class_set: ClassSet, y: Dict[int, Fraction],
                              x: Dict[Tuple[int, int], Fraction]) -> LinearProgram:
    """
    Weights on the classes whose support fits inside (y, x) that project onto
    (y, x) exactly; classes outside the support must carry zero weight anyway.
    """
    y_support = {i for i, v in y.items() if v}
    x_support = {p for p, v in x.items() if v}
    eligible = [k for k, cl in enumerate(class_set)
                if cl.open_facilities <= y_support and cl.assignments <= x_support]
    rows_y: Dict[int, Dict[str, Fraction]] = {i: {} for i in y_support}
    rows_x: Dict[Tuple[int, int], Dict[str, Fraction]] = {p: {} for p in x_support}
    for k in eligible:
        cl = class_set.classes[k]
        for i in cl.open_facilities:
            rows_y[i][class_var(k)] = Fraction(1)
        for p in cl.assignments:
            rows_x[p][class_var(k)] = Fraction(1)
    constraints = [Constraint(c, EQ, y[i], f"proj_y[{i}]") for i, c in sorted(rows_y.items())]
    constraints += [Constraint(c, EQ, x[p], f"proj_x[{p[0]},{p[1]}]") for p, c in sorted(rows_x.items())]
    variables = [Variable(class_var(k), Fraction(0), None) for k in eligible]
    return LinearProgram(variables, constraints, {}, name='projection')


def validity_check(class_set: ClassSet, instance, budget: Optional[int] = None):
    """
    Every integral solution must be a projection of a feasible LP(C) point.

    Returns:
        tuple: (valid: bool, witness: first failing (open set, assignment) or None)
    """
    for opened, assignment in integral_solutions(instance, budget):
        y = {i: Fraction(1) for i in opened}
        x = {(i, j): Fraction(1) for j, i in enumerate(assignment)}
        feasible, _ = is_feasible(projection_feasibility_lp(class_set, y, x))
        if not feasible:
            logger.info("class set misses integral solution opening %s", sorted(opened))
            return False, {'open_facilities': sorted(opened), 'assignment': list(assignment)}
    return True, None
