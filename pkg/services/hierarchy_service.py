"""
Hierarchy Service Module - the Lovasz-Schrijver N operator: cone vectors,
protection matrices, witness checks, membership oracles and the PSD test.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import config
from .errors import (BudgetExceededError, InfeasibleInputError, IntegralVariableError, MissingWitnessError,
                     check_budget)
from .lp_model import EQ, GE, LE, Constraint, LinearProgram, Variable
from .rational import jsonable
from .solver_service import INFEASIBLE, check_feasible, is_feasible, solve_lp

logger = logging.getLogger(__name__)

TYPE1 = 1
TYPE2 = 2
ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class ConeVector:
    """(z0, z) with sparse coordinates; absent coordinates are 0."""
    z0: Fraction
    coords: Dict[str, Fraction] = field(default_factory=dict)

    def value(self, var: str) -> Fraction:
        return self.coords.get(var, ZERO)

    def variables(self) -> List[str]:
        return list(self.coords)

    def scaled(self, factor: Fraction) -> 'ConeVector':
        return ConeVector(self.z0 * factor, {k: v * factor for k, v in self.coords.items()})

    def minus(self, other: 'ConeVector') -> 'ConeVector':
        keys = list(self.coords) + [k for k in other.coords if k not in self.coords]
        return ConeVector(self.z0 - other.z0, {k: self.value(k) - other.value(k) for k in keys})

    def to_json(self) -> dict:
        return {'z0': jsonable(self.z0), 'coords': jsonable({k: v for k, v in self.coords.items() if v})}


@dataclass(frozen=True)
class WitnessPair:
    variable: str
    type1: Optional[object] = None
    type2: Optional[object] = None


@dataclass(frozen=True)
class ProtectionMatrixView:
    """
    Rows of Y by variable; row 0 is the base vector itself.
    Rows listed in zero_rows are 0; a variable at value 1 has row equal to base.
    """
    base: ConeVector
    rows: Dict[str, ConeVector]
    zero_rows: FrozenSet[str] = frozenset()

    def row(self, var: str) -> ConeVector:
        if var in self.zero_rows:
            return ConeVector(ZERO, {})
        if var in self.rows:
            return self.rows[var]
        if self.base.value(var) == 1:
            return self.base
        raise MissingWitnessError(f"no row for {var}")


def twin_type2(z, type1, t: str) -> ConeVector:
    """
    The type-2 witness from the type-1 one: coordinate q becomes
    (z_q - z_t * type1_q) / (1 - z_t), i.e. z_q(1 - z_t*eps_q/(1 - z_t)).
    """
    zt = z.value(t)
    if zt == 1:
        raise IntegralVariableError(f"{t} is 1; its type-2 witness is undefined")
    keys = list(z.variables()) + [k for k in type1.variables() if k not in set(z.variables())]
    coords = {q: (z.value(q) - zt * type1.value(q)) / (1 - zt) for q in keys}
    coords[t] = ZERO
    return ConeVector((z.z0 - zt * type1.z0) / (1 - zt), coords)


def twin_identity_holds(z, type1, type2, t: str, variables: Optional[Iterable[str]] = None) -> Tuple[bool, Optional[str]]:
    """z_t * type1 + (1 - z_t) * type2 == z coordinate-wise."""
    zt = z.value(t)
    for q in (z.variables() if variables is None else variables):
        if zt * type1.value(q) + (1 - zt) * type2.value(q) != z.value(q):
            return False, q
    return True, None


def symmetry_factor_check(z, witnesses, variables: Optional[Sequence[str]] = None) -> Tuple[bool, Optional[dict]]:
    """
    For fractional q, t: the factor by which t changes in q's type-1 witness
    equals the factor by which q changes in t's, i.e. z_q*W_q[t] == z_t*W_t[q].
    Integral coordinates must be unchanged in every witness.

    Returns:
        tuple: (ok, violation or None)
    """
    if isinstance(witnesses, dict):
        by_var = witnesses
    else:
        by_var = {w.variable: w for w in witnesses}
    names = list(z.variables() if variables is None else variables)
    fractional = [v for v in names if z.value(v) not in (ZERO, ONE)]
    integral = [v for v in names if z.value(v) in (ZERO, ONE)]
    for q in fractional:
        pair = by_var.get(q)
        if pair is None or pair.type1 is None:
            raise MissingWitnessError(f"no type-1 witness for {q}")
        if pair.type1.value(q) != 1:
            return False, {'condition': 'self-coordinate', 'indices': [q, q], 'lhs': pair.type1.value(q), 'rhs': ONE}
        for i in integral:
            if pair.type1.value(i) != z.value(i):
                return False, {'condition': 'integral-unchanged', 'indices': [q, i],
                               'lhs': pair.type1.value(i), 'rhs': z.value(i)}
    for a, q in enumerate(fractional):
        wq = by_var[q].type1
        zq = z.value(q)
        for t in fractional[a + 1:]:
            lhs = zq * wq.value(t)
            rhs = z.value(t) * by_var[t].type1.value(q)
            if lhs != rhs:
                return False, {'condition': 'symmetry', 'indices': [q, t], 'lhs': lhs, 'rhs': rhs}
    return True, None


def protection_matrix_check(view: ProtectionMatrixView, prev_level_oracle: Callable[[ConeVector], bool],
                            variables: Optional[Sequence[str]] = None) -> Tuple[bool, List[dict]]:
    """
    Conditions of one LS round for a given matrix: Y e_0 = diag(Y) = z, zero and
    unit rows, symmetry, and both quotients of every fractional row accepted
    by the previous-level oracle.
    """
    z = view.base
    names = list(z.variables() if variables is None else variables)
    violations: List[dict] = []
    for v in names:
        zv = z.value(v)
        if zv == 0:
            if v not in view.zero_rows and v in view.rows and any(view.rows[v].value(k) for k in names):
                violations.append({'condition': 'zero-row', 'indices': [v], 'lhs': None, 'rhs': ZERO})
            continue
        if zv == 1:
            row = view.row(v)
            if row.z0 != 1 or any(row.value(k) != z.value(k) for k in names):
                violations.append({'condition': 'unit-row', 'indices': [v], 'lhs': None, 'rhs': ONE})
            continue
        if v not in view.rows:
            raise MissingWitnessError(f"no row for fractional variable {v}")
        row = view.rows[v]
        if row.z0 != zv:
            violations.append({'condition': 'first-column', 'indices': [v, '0'], 'lhs': row.z0, 'rhs': zv})
        if row.value(v) != zv:
            violations.append({'condition': 'diagonal', 'indices': [v, v], 'lhs': row.value(v), 'rhs': zv})
    for a, q in enumerate(names):
        for t in names[a + 1:]:
            lhs, rhs = view.row(q).value(t), view.row(t).value(q)
            if lhs != rhs:
                violations.append({'condition': 'symmetry', 'indices': [q, t], 'lhs': lhs, 'rhs': rhs})
    for v in names:
        zv = z.value(v)
        if zv in (ZERO, ONE):
            continue
        row = view.rows[v]
        if not prev_level_oracle(row.scaled(1 / zv)):
            violations.append({'condition': 'type1-quotient', 'indices': [v], 'lhs': None, 'rhs': None})
        if not prev_level_oracle(z.minus(row).scaled(1 / (1 - zv))):
            violations.append({'condition': 'type2-quotient', 'indices': [v], 'lhs': None, 'rhs': None})
    return not violations, violations


def polytope_oracle(K: LinearProgram) -> Callable[[ConeVector], bool]:
    """Level-0 membership: z0 == 1 and the point satisfies K."""
    def oracle(vec: ConeVector) -> bool:
        if vec.z0 != 1:
            return False
        ok, _ = check_feasible({v.name: vec.value(v.name) for v in K.variables}, K)
        return ok
    return oracle


# Affine expressions are dicts var -> coefficient with the constant under ''.
Affine = Dict[str, Fraction]


def _const(value) -> Affine:
    return {'': Fraction(value)}


def _axpy(*terms: Tuple[Fraction, Affine]) -> Affine:
    out: Affine = {}
    for coef, expr in terms:
        if coef == 0:
            continue
        for k, v in expr.items():
            out[k] = out.get(k, ZERO) + coef * v
    return {k: v for k, v in out.items() if v != 0}


class _System:
    """Collects unknowns and affine rows; tracks rows that are constant and false."""

    def __init__(self):
        self.unknowns: List[str] = []
        self.rows: List[Constraint] = []
        self.contradiction = False

    def unknown(self, name: str) -> Affine:
        self.unknowns.append(name)
        return {name: ONE}

    def add(self, expr: Affine, relation: str, name: str) -> None:
        const = expr.get('', ZERO)
        coeffs = {k: v for k, v in expr.items() if k}
        if not coeffs:
            ok = (const <= 0) if relation == LE else (const >= 0) if relation == GE else const == 0
            if not ok:
                self.contradiction = True
            return
        self.rows.append(Constraint(coeffs, relation, -const, name))

    def feasible(self) -> bool:
        if self.contradiction:
            return False
        if not self.rows:
            return True
        lp = LinearProgram([Variable(u, None, None) for u in self.unknowns], self.rows, {}, name='lift')
        ok, _ = is_feasible(lp)
        return ok


def _cone_rows(system: _System, K: LinearProgram, lam: Affine, w: Dict[str, Affine], tag: str) -> None:
    """(lam, w) in cone(K): every row of K homogenized by lam, lam >= 0."""
    system.add(lam, GE, f"{tag}:lam")
    for con in K.constraints:
        expr = _axpy(*[(c, w[v]) for v, c in con.coeffs.items()], (-con.rhs, lam))
        system.add(expr, con.relation, f"{tag}:{con.name}")
    for v in K.variables:
        if v.lo is not None:
            system.add(_axpy((ONE, w[v.name]), (-v.lo, lam)), GE, f"{tag}:lo[{v.name}]")
        if v.hi is not None:
            system.add(_axpy((ONE, w[v.name]), (-v.hi, lam)), LE, f"{tag}:hi[{v.name}]")


def _lifted_rows(system: _System, K: LinearProgram, lam: Affine, w: Dict[str, Affine],
                 rounds: int, tag: str) -> None:
    """(lam, w) in the cone of N^rounds(K), with fresh matrix unknowns per level."""
    if rounds == 0:
        _cone_rows(system, K, lam, w, tag)
        return
    names = [v.name for v in K.variables]
    Y: Dict[Tuple[str, str], Affine] = {}
    for a, p in enumerate(names):
        Y[(p, p)] = w[p]
        for q in names[a + 1:]:
            Y[(p, q)] = Y[(q, p)] = system.unknown(f"{tag}Y[{p};{q}]")
    for p in names:
        column = {q: Y[(q, p)] for q in names}
        _lifted_rows(system, K, w[p], column, rounds - 1, f"{tag}{p}+")
        complement = {q: _axpy((ONE, w[q]), (-ONE, Y[(q, p)])) for q in names}
        _lifted_rows(system, K, _axpy((ONE, lam), (-ONE, w[p])), complement, rounds - 1, f"{tag}{p}-")


def integral_points(K: LinearProgram) -> List[Dict[str, Fraction]]:
    names = [v.name for v in K.variables]
    points = []
    for bits in itertools.product((ZERO, ONE), repeat=len(names)):
        point = dict(zip(names, bits))
        if check_feasible(point, K)[0]:
            points.append(point)
    return points


def in_integral_hull(K: LinearProgram, z: ConeVector) -> bool:
    points = integral_points(K)
    if not points:
        return False
    lam = [f"lam[{k}]" for k in range(len(points))]
    rows = [Constraint({name: ONE for name in lam}, EQ, ONE, 'convex')]
    for v in K.variables:
        coeffs = {lam[k]: ONE for k, p in enumerate(points) if p[v.name]}
        rows.append(Constraint(coeffs, EQ, z.value(v.name), f"match[{v.name}]"))
    ok, _ = is_feasible(LinearProgram([Variable(n) for n in lam], rows, {}, name='hull'))
    return ok


def brute_membership(K: LinearProgram, z: ConeVector, rounds: int) -> bool:
    """
    Decide z in N^rounds(K) by one exact feasibility system over all matrix
    entries of every level. For two rounds or more, integral-hull members are
    accepted and points failing the previous level rejected before the large
    system is built.
    """
    d = len(K.variables)
    if d > config.ORACLE_MAX_VARIABLES or rounds > config.ORACLE_MAX_ROUNDS:
        raise BudgetExceededError("membership oracle size", max(d, rounds), config.ORACLE_MAX_VARIABLES)
    if rounds >= 2 and d > config.ORACLE_MAX_NESTED_VARIABLES:
        raise BudgetExceededError("nested membership variables", d, config.ORACLE_MAX_NESTED_VARIABLES)
    if z.z0 != 1:
        raise InfeasibleInputError("membership expects z0 = 1")
    if not polytope_oracle(K)(z):
        return False
    if rounds == 0:
        return True
    if rounds >= 2:
        if in_integral_hull(K, z):
            return True
        if not brute_membership(K, z, rounds - 1):
            return False
    system = _System()
    w = {v.name: _const(z.value(v.name)) for v in K.variables}
    _lifted_rows(system, K, _const(1), w, rounds, '')
    return system.feasible()


def _protection_system(K: LinearProgram, z: ConeVector, rounds: int = 1):
    names = [v.name for v in K.variables]
    frac_vars = [v for v in names if z.value(v) not in (ZERO, ONE)]
    system = _System()
    Y: Dict[Tuple[str, str], Affine] = {}
    for p in names:
        for q in names:
            zp, zq = z.value(p), z.value(q)
            if p == q:
                Y[(p, q)] = _const(zp)
            elif zp == 0 or zq == 0:
                Y[(p, q)] = _const(0)
            elif zp == 1:
                Y[(p, q)] = _const(zq)
            elif zq == 1:
                Y[(p, q)] = _const(zp)
            elif (q, p) in Y:
                Y[(p, q)] = Y[(q, p)]
            else:
                Y[(p, q)] = system.unknown(f"Y[{p};{q}]")
    for p in frac_vars:
        zp = z.value(p)
        row = {q: Y[(p, q)] for q in names}
        # row / z_p in N^(rounds-1)(K)
        _lifted_rows(system, K, _const(zp), row, rounds - 1, f"{p}+")
        # (z - row) / (1 - z_p) likewise
        comp = {q: _axpy((ONE, _const(z.value(q))), (-ONE, row[q])) for q in names}
        _lifted_rows(system, K, _const(1 - zp), comp, rounds - 1, f"{p}-")
    return system, Y, frac_vars


def protection_matrix_exists(K: LinearProgram, z: ConeVector, construct: bool = False, rounds: int = 1):
    """
    Second oracle: is there a protection matrix, with the entries forced by
    integral coordinates fixed, whose quotients lie in N^(rounds-1)(K)?
    With construct=True also returns the view built from a feasible matrix.
    """
    if rounds < 1 or rounds > config.ORACLE_MAX_ROUNDS:
        raise BudgetExceededError("protection matrix rounds", rounds, config.ORACLE_MAX_ROUNDS)
    if not polytope_oracle(K)(z):
        return (False, None) if construct else False
    system, Y, frac_vars = _protection_system(K, z, rounds)
    if not construct:
        return system.feasible()
    if system.contradiction:
        return False, None
    lp = LinearProgram([Variable(u, None, None) for u in system.unknowns], system.rows, {}, name='protection')
    sol = solve_lp(lp)
    if sol.status == INFEASIBLE:
        return False, None
    names = [v.name for v in K.variables]

    def evaluate(expr: Affine) -> Fraction:
        return expr.get('', ZERO) + sum((c * sol.values[k] for k, c in expr.items() if k), ZERO)

    rows = {p: ConeVector(z.value(p), {q: evaluate(Y[(p, q)]) for q in names}) for p in frac_vars}
    zero_rows = frozenset(p for p in names if z.value(p) == 0)
    return True, ProtectionMatrixView(z, rows, zero_rows)


def ldlt_factor(M: List[List[Fraction]]) -> Tuple[bool, List[Fraction]]:
    """
    Exact LDL^T with symmetric pivoting on the largest remaining diagonal.
    PSD iff every pivot is >= 0 and a zero pivot leaves a zero block.
    """
    A = [list(row) for row in M]
    n = len(A)
    remaining = list(range(n))
    pivots: List[Fraction] = []
    while remaining:
        p = max(remaining, key=lambda k: (A[k][k], -k))
        piv = A[p][p]
        if piv < 0:
            return False, pivots + [piv]
        if piv == 0:
            ok = all(A[r][s] == 0 for r in remaining for s in remaining)
            return ok, pivots + [ZERO] * len(remaining)
        pivots.append(piv)
        remaining.remove(p)
        for r in remaining:
            f = A[r][p] / piv
            if f:
                for s in remaining:
                    A[r][s] -= f * A[p][s]
    return True, pivots


def psd_restriction_check(y: Sequence[Fraction]) -> bool:
    """M = y y^T + Diag(y - y^2) is PSD."""
    y = [Fraction(v) for v in y]
    if any(v < 0 or v > 1 for v in y):
        raise InfeasibleInputError("entries must lie in [0, 1]")
    n = len(y)
    M = [[y[r] * y[s] + (y[r] - y[r] * y[r] if r == s else ZERO) for s in range(n)] for r in range(n)]
    ok, _ = ldlt_factor(M)
    return ok


def oracle_grid(K: LinearProgram, step: Fraction, budget: Optional[int] = None) -> List[ConeVector]:
    """Every point with coordinates in {0, step, 2*step, ..., 1}, as (1, z)."""
    step = Fraction(step)
    if step <= 0 or step > 1 or (1 / step).denominator != 1:
        raise InfeasibleInputError(f"grid step {step} must be 1/k")
    values = [k * step for k in range(int(1 / step) + 1)]
    names = [v.name for v in K.variables]
    budget = config.ENUM_BUDGET if budget is None else budget
    check_budget("grid points", len(values) ** len(names), budget)
    return [ConeVector(ONE, dict(zip(names, point))) for point in itertools.product(values, repeat=len(names))]


@dataclass
class CrosscheckReport:
    rounds: int
    points: int
    inside_k: int
    members: int
    disagreements: List[dict] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return not self.disagreements

    def to_json(self) -> dict:
        return {'rounds': self.rounds, 'points': self.points, 'inside_k': self.inside_k,
                'members': self.members, 'agree': self.agree, 'disagreements': self.disagreements}


def oracle_crosscheck(K: LinearProgram, rounds: int, points: Iterable[ConeVector]) -> CrosscheckReport:
    """Run both membership oracles on every point and collect the points where they differ."""
    report = CrosscheckReport(rounds, 0, 0, 0)
    inside = polytope_oracle(K)
    for z in points:
        report.points += 1
        if not inside(z):
            # both oracles reject points outside K outright
            continue
        report.inside_k += 1
        brute = brute_membership(K, z, rounds)
        matrix = brute if rounds == 0 else protection_matrix_exists(K, z, rounds=rounds)
        report.members += brute
        if brute != matrix:
            report.disagreements.append({'point': z.to_json(), 'brute': brute, 'protection': matrix})
    if report.disagreements:
        logger.warning("oracles disagree on %d of %d points", len(report.disagreements), report.points)
    return report
