"""
Exact linear program model shared by the relaxation builders and the solver,
plus the one-constraint-per-line text format.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import MalformedLPError
from .rational import frac, to_text

LE, EQ, GE = '<=', '=', '>='
RELATIONS = (LE, EQ, GE)


def y_var(i: int) -> str:
    return f"y[{i}]"


def x_var(i: int, j: int) -> str:
    return f"x[{i},{j}]"


_VAR_RE = re.compile(r"^(y)\[(\d+)\]$|^(x)\[(\d+),(\d+)\]$")


@lru_cache(maxsize=None)
def parse_var(name: str) -> Tuple:
    """'y[3]' -> ('y', 3); 'x[1,7]' -> ('x', 1, 7)."""
    match = _VAR_RE.match(name)
    if not match:
        raise MalformedLPError(f"not a facility-location variable: {name}")
    if match.group(1):
        return ('y', int(match.group(2)))
    return ('x', int(match.group(4)), int(match.group(5)))


@dataclass(frozen=True)
class Variable:
    name: str
    lo: Optional[Fraction] = Fraction(0)
    hi: Optional[Fraction] = None


@dataclass(frozen=True)
class Constraint:
    coeffs: Dict[str, Fraction]
    relation: str
    rhs: Fraction
    name: str = ''

    def lhs(self, point: Dict[str, Fraction]) -> Fraction:
        return sum((c * point[v] for v, c in self.coeffs.items()), Fraction(0))

    def slack(self, point: Dict[str, Fraction]) -> Fraction:
        """Nonnegative when satisfied (for '=' the signed difference, zero when satisfied)."""
        lhs = self.lhs(point)
        if self.relation == LE:
            return self.rhs - lhs
        if self.relation == GE:
            return lhs - self.rhs
        return self.rhs - lhs

    def satisfied(self, point: Dict[str, Fraction]) -> bool:
        s = self.slack(point)
        return s == 0 if self.relation == EQ else s >= 0


@dataclass
class LinearProgram:
    """Minimize `objective` over `variables` subject to `constraints`."""
    variables: List[Variable]
    constraints: List[Constraint]
    objective: Dict[str, Fraction] = field(default_factory=dict)
    objective_constant: Fraction = Fraction(0)
    name: str = 'lp'
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        names = set()
        for v in self.variables:
            if v.name in names:
                raise MalformedLPError(f"duplicate variable {v.name}")
            names.add(v.name)
            if v.lo is not None and v.hi is not None and v.lo > v.hi:
                raise MalformedLPError(f"variable {v.name} has lo > hi")
        for con in self.constraints:
            if con.relation not in RELATIONS:
                raise MalformedLPError(f"constraint {con.name} has relation {con.relation!r}")
            unknown = [v for v in con.coeffs if v not in names]
            if unknown:
                raise MalformedLPError(f"constraint {con.name} references undeclared {unknown[0]}")
        unknown = [v for v in self.objective if v not in names]
        if unknown:
            raise MalformedLPError(f"objective references undeclared {unknown[0]}")

    @property
    def variable_names(self) -> List[str]:
        return [v.name for v in self.variables]

    def evaluate(self, point: Dict[str, Fraction]) -> Fraction:
        return self.objective_constant + sum(
            (c * point.get(v, Fraction(0)) for v, c in self.objective.items()), Fraction(0))

    def constraint(self, name: str) -> Constraint:
        for con in self.constraints:
            if con.name == name:
                return con
        raise KeyError(name)


def make_constraint(terms: Iterable[Tuple[str, Fraction]], relation: str, rhs, name: str = '') -> Constraint:
    coeffs: Dict[str, Fraction] = {}
    for var, coef in terms:
        coeffs[var] = coeffs.get(var, Fraction(0)) + frac(coef)
    return Constraint({v: c for v, c in coeffs.items() if c != 0}, relation, frac(rhs), name)


def lp_to_text(lp: LinearProgram) -> str:
    """One line per item: objective, bounds, then 'coef*var ... REL rhs'."""
    def terms(coeffs):
        return " ".join(f"{to_text(c)}*{v}" for v, c in coeffs.items()) or "0"

    lines = [f"min: {terms(lp.objective)} + {to_text(lp.objective_constant)}"]
    for v in lp.variables:
        lo = '-inf' if v.lo is None else to_text(v.lo)
        hi = 'inf' if v.hi is None else to_text(v.hi)
        lines.append(f"var {v.name} {lo} {hi}")
    for con in lp.constraints:
        lines.append(f"{con.name}: {terms(con.coeffs)} {con.relation} {to_text(con.rhs)}")
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"^([-+]?\d+(?:/\d+)?)\*(\S+)$")


def _parse_terms(text: str) -> Dict[str, Fraction]:
    coeffs: Dict[str, Fraction] = {}
    for token in text.split():
        if token == '0':
            continue
        match = _TERM_RE.match(token)
        if not match:
            raise MalformedLPError(f"bad term {token!r}")
        coeffs[match.group(2)] = coeffs.get(match.group(2), Fraction(0)) + Fraction(match.group(1))
    return coeffs


def lp_from_text(text: str) -> LinearProgram:
    objective: Dict[str, Fraction] = {}
    constant = Fraction(0)
    variables: List[Variable] = []
    constraints: List[Constraint] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        try:
            if line.startswith('min:'):
                body, _, const = line[4:].rpartition(' + ')
                objective = _parse_terms(body)
                constant = Fraction(const)
            elif line.startswith('var '):
                _, name, lo, hi = line.split()
                variables.append(Variable(
                    name,
                    None if lo == '-inf' else Fraction(lo),
                    None if hi == 'inf' else Fraction(hi)))
            else:
                name, _, body = line.partition(': ')
                for rel in (LE, GE, EQ):
                    left, sep, right = body.rpartition(f" {rel} ")
                    if sep:
                        constraints.append(Constraint(_parse_terms(left), rel, Fraction(right), name))
                        break
                else:
                    raise MalformedLPError(f"no relation in {line!r}")
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedLPError(f"cannot parse {line!r}: {exc}") from exc
    return LinearProgram(variables, constraints, objective, constant)
