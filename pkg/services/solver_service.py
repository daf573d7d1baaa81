"""
Solver Service Module - exact rational simplex, feasibility checks,
brute-force integral optimum and integrality gaps.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import networkx as nx

import config
from .errors import BudgetExceededError, InfeasibleInputError, MalformedLPError, check_budget
from .instance_service import CFL, FacilityLocationInstance, base_of
from .lp_model import EQ, GE, LE, Constraint, LinearProgram, Variable, x_var, y_var
from .rational import jsonable, rational_field

logger = logging.getLogger(__name__)

OPTIMAL = 'Optimal'
INFEASIBLE = 'Infeasible'
UNBOUNDED = 'Unbounded'

# consecutive degenerate pivots before switching to Bland's rule
DEGENERATE_STREAK = 8


@dataclass
class LpSolution:
    status: str
    values: Dict[str, Fraction] = field(default_factory=dict)
    objective_value: Optional[Fraction] = None
    duals: Dict[str, Fraction] = field(default_factory=dict)
    certificate_verified: bool = False
    pivots: int = 0

    def to_json(self) -> dict:
        return {
            'status': self.status,
            'objective_value': None if self.objective_value is None else rational_field(self.objective_value),
            'values': jsonable({k: v for k, v in self.values.items() if v != 0}),
            'duals': jsonable({k: v for k, v in self.duals.items() if v != 0}),
            'certificate_verified': self.certificate_verified,
            'pivots': self.pivots,
        }


@dataclass
class GapReport:
    lp_value: Fraction
    integral_value: Optional[Fraction]
    lp_kind: str
    certificate: Optional[dict] = None
    integral_skipped: bool = False

    @property
    def infinite(self) -> bool:
        return self.integral_value is not None and self.lp_value == 0 and self.integral_value > 0

    @property
    def gap(self) -> Optional[Fraction]:
        if self.integral_value is None or self.infinite:
            return None
        if self.lp_value == 0:
            return Fraction(1)
        return self.integral_value / self.lp_value

    def to_json(self) -> dict:
        return {
            'lp_kind': self.lp_kind,
            'lp_value': rational_field(self.lp_value),
            'integral_value': None if self.integral_value is None else rational_field(self.integral_value),
            'gap': 'infinite' if self.infinite else (None if self.gap is None else rational_field(self.gap)),
            'integral_skipped': self.integral_skipped,
            'certificate': jsonable(self.certificate) if self.certificate else None,
        }


class _StandardForm:
    """
    min c.x  s.t.  A x = b, x >= 0, b >= 0, built from a LinearProgram.

    Every original variable is offset + sum(sign * column).
    """

    def __init__(self, lp: LinearProgram):
        self.columns: List[str] = []
        self.cost: List[Fraction] = []
        self.expansion: Dict[str, Tuple[Fraction, List[Tuple[int, int]]]] = {}
        rows: List[Tuple[Dict[int, Fraction], str, Fraction, str]] = []

        for v in lp.variables:
            if v.lo is not None:
                col = self._new_column(v.name)
                self.expansion[v.name] = (v.lo, [(col, 1)])
                if v.hi is not None:
                    rows.append(({col: Fraction(1)}, LE, v.hi - v.lo, f"bound[{v.name}]"))
            elif v.hi is not None:
                col = self._new_column(v.name)
                self.expansion[v.name] = (v.hi, [(col, -1)])
            else:
                plus = self._new_column(v.name + '+')
                minus = self._new_column(v.name + '-')
                self.expansion[v.name] = (Fraction(0), [(plus, 1), (minus, -1)])

        self.constant = lp.objective_constant
        for name, coef in lp.objective.items():
            offset, parts = self.expansion[name]
            self.constant += coef * offset
            for col, sign in parts:
                self.cost[col] += sign * coef

        for con in lp.constraints:
            coeffs: Dict[int, Fraction] = {}
            rhs = con.rhs
            for name, coef in con.coeffs.items():
                offset, parts = self.expansion[name]
                rhs -= coef * offset
                for col, sign in parts:
                    coeffs[col] = coeffs.get(col, Fraction(0)) + sign * coef
            rows.append(({k: v for k, v in coeffs.items() if v != 0}, con.relation, rhs, con.name))

        self.n_structural = len(self.columns)
        self.row_names: List[str] = []
        self.row_sign: List[int] = []
        self.unit_col: List[int] = []
        self.artificial: List[bool] = [False] * self.n_structural
        self.A: List[Dict[int, Fraction]] = []
        self.b: List[Fraction] = []
        needs_artificial: List[int] = []
        for coeffs, rel, rhs, name in rows:
            coeffs = dict(coeffs)
            slack = None
            if rel != EQ:
                slack = self._new_column(f"slack[{name}]")
                self.artificial.append(False)
                coeffs[slack] = Fraction(1) if rel == LE else Fraction(-1)
            sign = 1
            if rhs < 0:
                sign = -1
                coeffs = {k: -v for k, v in coeffs.items()}
                rhs = -rhs
            r = len(self.A)
            self.A.append(coeffs)
            self.b.append(rhs)
            self.row_names.append(name)
            self.row_sign.append(sign)
            if slack is not None and coeffs[slack] == 1:
                self.unit_col.append(slack)
            else:
                self.unit_col.append(-1)
                needs_artificial.append(r)
        for r in needs_artificial:
            col = self._new_column(f"art[{self.row_names[r]}]")
            self.artificial.append(True)
            self.A[r][col] = Fraction(1)
            self.unit_col[r] = col

    def _new_column(self, name: str) -> int:
        self.columns.append(name)
        self.cost.append(Fraction(0))
        return len(self.columns) - 1


class SimplexTableau:
    """Dense tableau over a _StandardForm; reduced-cost row kept in `d`."""

    def __init__(self, form: _StandardForm):
        self.form = form
        n = len(form.columns)
        self.n = n
        self.rows: List[List[Fraction]] = []
        for coeffs in form.A:
            row = [Fraction(0)] * n
            for k, v in coeffs.items():
                row[k] = v
            self.rows.append(row)
        self.rhs = list(form.b)
        self.basis = list(form.unit_col)
        self.blocked = set()
        self.d: List[Fraction] = []
        self.value = Fraction(0)
        self.pivots = 0

    def set_cost(self, cost: List[Fraction]) -> None:
        d = list(cost)
        value = Fraction(0)
        for r, bcol in enumerate(self.basis):
            cb = cost[bcol]
            if cb:
                row = self.rows[r]
                for k, v in enumerate(row):
                    if v:
                        d[k] -= cb * v
                value += cb * self.rhs[r]
        self.d = d
        self.value = value

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        p = prow[c]
        if p != 1:
            prow = [v / p if v else v for v in prow]
            self.rows[r] = prow
            self.rhs[r] = self.rhs[r] / p
        nz = [k for k, v in enumerate(prow) if v]
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[c]
                if f:
                    for k in nz:
                        row[k] -= f * prow[k]
                    self.rhs[i] -= f * prhs
        f = self.d[c]
        if f:
            for k in nz:
                self.d[k] -= f * prow[k]
            self.value += f * prhs
        self.basis[r] = c
        self.pivots += 1

    def _entering(self, bland: bool) -> Optional[int]:
        best, best_val = None, Fraction(0)
        for k, v in enumerate(self.d):
            if v < 0 and k not in self.blocked:
                if bland:
                    return k
                if v < best_val:
                    best, best_val = k, v
        return best

    def _leaving(self, c: int) -> Optional[int]:
        best, best_key = None, None
        for r, row in enumerate(self.rows):
            a = row[c]
            if a > 0:
                key = (self.rhs[r] / a, self.basis[r])
                if best_key is None or key < best_key:
                    best, best_key = r, key
        return best

    def run(self) -> str:
        streak = 0
        while True:
            c = self._entering(bland=streak >= DEGENERATE_STREAK)
            if c is None:
                return OPTIMAL
            r = self._leaving(c)
            if r is None:
                return UNBOUNDED
            streak = streak + 1 if self.rhs[r] == 0 else 0
            self.pivot(r, c)

    def drive_out_artificials(self) -> None:
        art = self.form.artificial
        for r, bcol in enumerate(self.basis):
            if art[bcol]:
                row = self.rows[r]
                for k in range(self.n):
                    if not art[k] and row[k] != 0:
                        self.pivot(r, k)
                        break


def solve_lp(lp: LinearProgram) -> LpSolution:
    """
    Two-phase exact simplex.

    Dantzig pricing with a switch to Bland's rule after a run of degenerate
    pivots; ties in the ratio test go to the smallest basic column, so the
    pivot sequence is deterministic.
    """
    if not isinstance(lp, LinearProgram):
        raise MalformedLPError("solve_lp expects a LinearProgram")
    form = _StandardForm(lp)
    tab = SimplexTableau(form)

    phase1 = [Fraction(1) if a else Fraction(0) for a in form.artificial]
    if any(form.artificial):
        tab.set_cost(phase1)
        tab.run()
        if tab.value > 0:
            logger.debug("%s infeasible after %d pivots", lp.name, tab.pivots)
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        tab.drive_out_artificials()
    tab.blocked = {k for k, a in enumerate(form.artificial) if a}
    tab.set_cost(form.cost)
    status = tab.run()
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)

    col_value = [Fraction(0)] * tab.n
    for r, bcol in enumerate(tab.basis):
        col_value[bcol] = tab.rhs[r]
    values = {}
    for name, (offset, parts) in form.expansion.items():
        values[name] = offset + sum((sign * col_value[col] for col, sign in parts), Fraction(0))
    objective = lp.evaluate(values)

    row_duals = [-tab.d[form.unit_col[r]] for r in range(len(form.A))]
    verified = _verify_dual(form, row_duals, objective)
    duals = {form.row_names[r]: form.row_sign[r] * row_duals[r] for r in range(len(form.A))}

    ok, violations = check_feasible(values, lp)
    if not ok:
        raise MalformedLPError(f"simplex returned a point violating {violations[0]['constraint']}")
    if not verified:
        raise MalformedLPError(f"dual certificate of {lp.name} failed feasibility or strong duality")
    logger.debug("%s optimal %s after %d pivots", lp.name, objective, tab.pivots)
    return LpSolution(OPTIMAL, values, objective, duals, verified, tab.pivots)


def _verify_dual(form: _StandardForm, y: List[Fraction], objective: Fraction) -> bool:
    """Dual feasibility on the original columns and strong duality."""
    reduced = list(form.cost)
    for r, coeffs in enumerate(form.A):
        if y[r]:
            for k, v in coeffs.items():
                reduced[k] -= y[r] * v
    for k, v in enumerate(reduced):
        if not form.artificial[k] and v < 0:
            return False
    dual_value = form.constant + sum((y[r] * form.b[r] for r in range(len(form.b))), Fraction(0))
    return dual_value == objective


def check_feasible(point: Dict[str, Fraction], lp: LinearProgram,
                   default_zero: bool = False) -> Tuple[bool, List[dict]]:
    """
    Exact check of every bound and constraint.

    Returns:
        tuple: (feasible: bool, violations: list of {constraint, lhs, rhs, slack})
    """
    if default_zero:
        point = {v.name: point.get(v.name, Fraction(0)) for v in lp.variables}
    missing = [v.name for v in lp.variables if v.name not in point]
    if missing:
        raise MalformedLPError(f"point has no value for {missing[0]}")
    violations = []
    for v in lp.variables:
        val = point[v.name]
        if v.lo is not None and val < v.lo:
            violations.append({'constraint': f"bound[{v.name}]", 'lhs': val, 'rhs': v.lo, 'slack': val - v.lo})
        if v.hi is not None and val > v.hi:
            violations.append({'constraint': f"bound[{v.name}]", 'lhs': val, 'rhs': v.hi, 'slack': v.hi - val})
    for con in lp.constraints:
        if not con.satisfied(point):
            violations.append({'constraint': con.name, 'lhs': con.lhs(point), 'rhs': con.rhs,
                               'slack': con.slack(point)})
    return not violations, violations


def _bound_rows(lp: LinearProgram) -> List[Constraint]:
    rows = list(lp.constraints)
    for v in lp.variables:
        if v.lo is not None:
            rows.append(Constraint({v.name: Fraction(1)}, GE, v.lo, f"bound[{v.name}]"))
        if v.hi is not None:
            rows.append(Constraint({v.name: Fraction(1)}, LE, v.hi, f"bound[{v.name}]"))
    return rows


def farkas_system(lp: LinearProgram) -> LinearProgram:
    """
    The alternative system: feasible exactly when `lp` is infeasible.

    Rows a.x <= b get multipliers u >= 0, equalities free multipliers v;
    u.A + v.A_eq = 0 and u.b + v.b_eq = -1.
    """
    variables, per_var = [], {v.name: [] for v in lp.variables}
    normal = []
    for k, con in enumerate(_bound_rows(lp)):
        sign = -1 if con.relation == GE else 1
        mult = f"u{k}"
        variables.append(Variable(mult, None if con.relation == EQ else Fraction(0), None))
        for name, coef in con.coeffs.items():
            per_var[name].append((mult, sign * coef))
        if con.rhs:
            normal.append((mult, sign * con.rhs))
    constraints = [Constraint(dict(terms), EQ, Fraction(0), f"zero[{name}]")
                   for name, terms in per_var.items() if terms]
    constraints.append(Constraint(dict(normal), EQ, Fraction(-1), 'normalize'))
    return LinearProgram(variables, constraints, {}, name=f"farkas[{lp.name}]")


def is_feasible(lp: LinearProgram) -> Tuple[bool, Optional[Dict[str, Fraction]]]:
    """
    Exact feasibility.

    Returns:
        tuple: (feasible, point or None). When infeasible and the Farkas route was
        taken, the second item is the certificate (multipliers keyed 'u<k>').
    """
    rows = len(lp.constraints) + sum((v.lo is not None) + (v.hi is not None) for v in lp.variables)
    if rows > 2 * len(lp.variables) + 2:
        alt = solve_lp(farkas_system(lp))
        if alt.status == OPTIMAL:
            return False, alt.values
        return True, None
    sol = solve_lp(LinearProgram(lp.variables, lp.constraints, {}, name=lp.name))
    if sol.status == INFEASIBLE:
        return False, None
    return True, sol.values


def solve_lp_float(lp: LinearProgram) -> dict:
    """Floating-point fast mode (HiGHS); exploratory only."""
    import numpy as np
    from scipy.optimize import linprog

    names = lp.variable_names
    index = {n: k for k, n in enumerate(names)}
    c = np.zeros(len(names))
    for v, coef in lp.objective.items():
        c[index[v]] = float(coef)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for con in lp.constraints:
        row = np.zeros(len(names))
        for v, coef in con.coeffs.items():
            row[index[v]] = float(coef)
        if con.relation == EQ:
            A_eq.append(row)
            b_eq.append(float(con.rhs))
        elif con.relation == LE:
            A_ub.append(row)
            b_ub.append(float(con.rhs))
        else:
            A_ub.append(-row)
            b_ub.append(-float(con.rhs))
    bounds = [(None if v.lo is None else float(v.lo), None if v.hi is None else float(v.hi))
              for v in lp.variables]
    res = linprog(c, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                  bounds=bounds, method='highs',
                  options={'primal_feasibility_tolerance': config.FLOAT_TOL})
    status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, f"status-{res.status}")
    value = None if res.status != 0 else float(res.fun) + float(lp.objective_constant)
    return {'status': status, 'objective_value': value}


@dataclass
class IntegralResult:
    value: Fraction
    open_facilities: Tuple[int, ...]
    # client -> facility
    assignment: Dict[int, int]
    subsets_examined: int = 0

    def to_point(self, instance) -> Dict[str, Fraction]:
        inst = base_of(instance)
        point = {}
        for i in inst.facilities:
            point[y_var(i)] = Fraction(1 if i in self.open_facilities else 0)
            for j in inst.clients:
                point[x_var(i, j)] = Fraction(0)
        for j, i in self.assignment.items():
            point[x_var(i, j)] = Fraction(1)
        return point


def _facility_types(inst: FacilityLocationInstance, profiles) -> List[List[int]]:
    types: Dict[tuple, List[int]] = {}
    for i in inst.facilities:
        column = tuple(row[i] for row in profiles)
        types.setdefault((inst.opening_cost[i], column), []).append(i)
    return list(types.values())


def integral_optimum(instance, budget: Optional[int] = None) -> IntegralResult:
    """
    Brute force over facility subsets, up to swapping facilities with equal
    opening cost and equal cost column; each subset's assignment is a
    min-cost flow, which has integral optima.
    """
    inst = base_of(instance)
    budget = config.SUBSET_BUDGET if budget is None else budget
    profiles = inst.client_profiles()
    rows = list(profiles)
    groups = [profiles[row] for row in rows]
    types = _facility_types(inst, rows)
    combos = math.prod(len(t) + 1 for t in types) - 1
    check_budget("facility subsets", combos, budget)

    scale = 1
    for row in rows:
        for c in row:
            scale = math.lcm(scale, c.denominator)

    best: Optional[Tuple[Fraction, Tuple[int, ...], dict]] = None
    examined = 0
    for counts in itertools.product(*(range(len(t) + 1) for t in types)):
        opened = tuple(sorted(i for t, k in zip(types, counts) for i in t[:k]))
        if not opened:
            continue
        examined += 1
        flow = _assignment_flow(inst, rows, groups, opened, scale)
        if flow is None:
            continue
        cost, flow_dict = flow
        total = sum((inst.opening_cost[i] for i in opened), Fraction(0)) + cost
        if best is None or total < best[0]:
            best = (total, opened, flow_dict)
    if best is None:
        raise InfeasibleInputError("instance has no integral solution")

    total, opened, flow_dict = best
    assignment = {}
    for g, members in enumerate(groups):
        queue = list(members)
        for i in opened:
            take = flow_dict.get(('g', g), {}).get(('f', i), 0)
            for j in queue[:take]:
                assignment[j] = i
            queue = queue[take:]
    logger.info("integral optimum %s opening %s (%d subsets)", total, opened, examined)
    return IntegralResult(total, opened, assignment, examined)


def _assignment_flow(inst, rows, groups, opened, scale):
    m, bound = inst.n_clients, inst.capacity_or_bound
    if inst.mode == CFL and len(opened) * bound < m:
        return None
    if inst.mode != CFL and len(opened) * bound > m:
        return None
    G = nx.DiGraph()
    for g, members in enumerate(groups):
        G.add_node(('g', g), demand=-len(members))
    sink_demand = m
    for i in opened:
        if inst.mode == CFL:
            G.add_node(('f', i), demand=0)
            G.add_edge(('f', i), 'sink', weight=0, capacity=bound)
        else:
            G.add_node(('f', i), demand=bound)
            G.add_edge(('f', i), 'sink', weight=0)
            sink_demand -= bound
    G.add_node('sink', demand=sink_demand)
    for g, row in enumerate(rows):
        for i in opened:
            G.add_edge(('g', g), ('f', i), weight=int(row[i] * scale))
    try:
        flow_dict = nx.min_cost_flow(G)
    except nx.NetworkXUnfeasible:
        return None
    return Fraction(nx.cost_of_flow(G, flow_dict), scale), flow_dict


def integrality_gap(instance, lp: LinearProgram, lp_kind: str = 'classic',
                    budget: Optional[int] = None) -> GapReport:
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise InfeasibleInputError(f"relaxation is {sol.status.lower()}")
    try:
        integral = integral_optimum(instance, budget)
    except BudgetExceededError as exc:
        logger.warning("integral optimum skipped: %s", exc)
        return GapReport(sol.objective_value, None, lp_kind, integral_skipped=True)
    certificate = {'lp_duals_verified': sol.certificate_verified,
                   'open_facilities': list(integral.open_facilities)}
    return GapReport(sol.objective_value, integral.value, lp_kind, certificate)
