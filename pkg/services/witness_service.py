"""
Witness Service Module - the evolution tree of the capacitated LS instance.

Node solutions are stored by client orbit: one pool of clients that share an
assignment profile, plus singleton clients split off when one of their
variables is touched.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import config
from .errors import (BudgetExceededError, DepthBudgetError, InfeasibleInputError, IntegralVariableError,
                     InvalidInstanceError, check_budget)
from .hierarchy_service import (TYPE1, TYPE2, ConeVector, ProtectionMatrixView, WitnessPair,
                                symmetry_factor_check, twin_identity_holds)
from .instance_service import CHEAP, COSTLY, LabeledInstance
from .lp_model import parse_var, x_var, y_var
from .rational import jsonable, rational_field, to_text

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

Profile = Dict[int, Fraction]


@dataclass(frozen=True)
class OrbitSolution:
    """
    A node solution (y, x). `pool` is the assignment profile shared by every
    client that is not in `singles`; profiles omit zero entries.
    """
    y: Dict[int, Fraction]
    pool: Profile
    pool_size: int
    singles: Dict[int, Profile]
    n_clients: int
    cheap: Tuple[int, ...]
    costly: Tuple[int, ...]
    touched_history: Tuple[Tuple[str, int], ...] = ()
    depth: int = 0

    def profile(self, j: int) -> Profile:
        return self.singles.get(j, self.pool)

    def value(self, var: str) -> Fraction:
        parsed = parse_var(var)
        if parsed[0] == 'y':
            return self.y.get(parsed[1], ZERO)
        return self.profile(parsed[2]).get(parsed[1], ZERO)

    @property
    def z0(self) -> Fraction:
        return ONE

    @property
    def facilities(self) -> Tuple[int, ...]:
        return self.cheap + self.costly

    def pool_members(self, count: int) -> List[int]:
        """The `count` smallest client ids still in the pool."""
        out, j = [], 0
        while len(out) < min(count, self.pool_size) and j < self.n_clients:
            if j not in self.singles:
                out.append(j)
            j += 1
        return out

    def sample_clients(self) -> List[int]:
        """Singletons plus two pool members, enough to see every client pair up to symmetry."""
        return sorted(self.singles) + self.pool_members(2)

    def variables(self) -> List[str]:
        names = [y_var(i) for i in self.facilities]
        for j in self.sample_clients():
            names += [x_var(i, j) for i in self.facilities]
        return names

    @property
    def x_orbits(self) -> List[Tuple[dict, Profile]]:
        orbits = [({'client': j}, prof) for j, prof in sorted(self.singles.items())]
        if self.pool_size:
            orbits.append(({'pool': self.pool_size}, self.pool))
        return orbits

    def orbit_weights(self) -> List[Tuple[int, Profile]]:
        return [(1, prof) for _, prof in sorted(self.singles.items())] + (
            [(self.pool_size, self.pool)] if self.pool_size else [])

    def to_json(self) -> dict:
        return {
            'depth': self.depth,
            'touched_history': [[var, wtype] for var, wtype in self.touched_history],
            'y': jsonable(self.y),
            'pool': {'size': self.pool_size, 'profile': jsonable(self.pool)},
            'singles': {str(j): jsonable(p) for j, p in sorted(self.singles.items())},
        }


def root_solution(inst: LabeledInstance) -> OrbitSolution:
    if not isinstance(inst, LabeledInstance) or 'l' not in inst.params:
        raise InvalidInstanceError("root_solution needs an instance built by build_ls_instance")
    cheap, costly = inst.with_label(CHEAP), inst.with_label(COSTLY)
    if not cheap or not costly:
        raise InvalidInstanceError("instance needs Cheap and Costly facilities")
    n, l, a, b = inst.param('n'), inst.param('l'), inst.param('a'), inst.param('b')
    y = {i: ONE for i in cheap}
    y.update({i: b for i in costly})
    pool = {i: (1 - a) / n for i in cheap}
    pool.update({i: a / l for i in costly})
    return OrbitSolution(y, pool, inst.base.n_clients, {}, inst.base.n_clients, tuple(cheap), tuple(costly))


def depth_cap(inst: LabeledInstance) -> int:
    return int(inst.param('l')) // 10


def _cheap_support(prof: Profile, cheap: Sequence[int]) -> List[int]:
    return [c for c in cheap if prof.get(c, ZERO) != 0]


def _clean(prof: Profile) -> Profile:
    return {i: v for i, v in prof.items() if v != 0}


def touch(node: OrbitSolution, variable: str, wtype: int, max_depth: Optional[int] = None) -> OrbitSolution:
    """
    The type-1 or type-2 child of `node` for `variable`.

    Touching an integral variable follows the forced rule: the type-1 child of
    a 1 and the type-2 child of a 0 are the node itself; the other two are
    undefined. `max_depth` is the depth cap; None disables it.
    """
    if wtype not in (TYPE1, TYPE2):
        raise ValueError(f"unknown witness type {wtype!r}")
    if max_depth is not None and node.depth >= max_depth:
        raise DepthBudgetError("tree depth", node.depth + 1, max_depth)
    value = node.value(variable)
    history = node.touched_history + ((variable, wtype),)
    if value in (ZERO, ONE):
        if (value == 1) == (wtype == TYPE1):
            return OrbitSolution(node.y, node.pool, node.pool_size, node.singles, node.n_clients,
                                 node.cheap, node.costly, history, node.depth + 1)
        raise IntegralVariableError(f"{variable} = {to_text(value)} has no type-{wtype} witness")

    y = dict(node.y)
    pool = dict(node.pool)
    singles = {j: dict(p) for j, p in node.singles.items()}
    pool_size = node.pool_size
    parsed = parse_var(variable)
    costly = set(node.costly)

    if parsed[0] == 'y':
        i = parsed[1]
        if i not in costly:
            raise InvalidInstanceError(f"{variable} is not a Costly opening variable")
        yi = y[i]
        profiles = [pool] + list(singles.values())
        for prof in profiles:
            xij = prof.get(i, ZERO)
            if not xij:
                continue
            support = _cheap_support(prof, node.cheap)
            t = len(support)
            if not t:
                raise InfeasibleInputError(f"{variable}: a client served by it has no Cheap facility left")
            if wtype == TYPE1:
                prof[i] = xij / yi
                shift = (1 / yi - 1) * xij / t
                for c in support:
                    prof[c] -= shift
            else:
                del prof[i]
                for c in support:
                    prof[c] += xij / t
        y[i] = ONE if wtype == TYPE1 else ZERO
        pool = _clean(pool)
        singles = {j: _clean(p) for j, p in singles.items()}
    else:
        i, j = parsed[1], parsed[2]
        if j not in singles:
            singles[j] = dict(pool)
            pool_size -= 1
        prof = singles[j]
        xk = prof[i]
        support = _cheap_support(prof, node.cheap)
        t = len(support)
        f = xk / (1 - xk)
        if i in costly:
            if wtype == TYPE1:
                y[i] = ONE
                singles[j] = {i: ONE}
            else:
                y[i] = y[i] * (1 - f * (1 / y[i] - 1))
                singles[j] = _clean({c: (ZERO if c == i else v * (1 + f)) for c, v in prof.items()})
        else:
            for c in node.costly:
                yc = y[c]
                if yc in (ZERO, ONE):
                    continue
                share = (1 / yc - 1) * prof.get(c, ZERO) / (xk * t)
                y[c] = yc * (1 - share) if wtype == TYPE1 else yc * (1 + f * share)
            if wtype == TYPE1:
                singles[j] = {i: ONE}
            else:
                singles[j] = _clean({c: (ZERO if c == i else v * (1 + f)) for c, v in prof.items()})
    return OrbitSolution(y, pool, pool_size, singles, node.n_clients, node.cheap, node.costly,
                         history, node.depth + 1)


def touch_case(node: OrbitSolution, variable: str, wtype: int) -> str:
    """Name of the construction case ('1a' .. '2c') a touch dispatches to."""
    parsed = parse_var(variable)
    letter = 'a' if parsed[0] == 'y' else ('b' if parsed[1] in node.costly else 'c')
    return f"{wtype}{letter}"


def verify_node_feasibility(node: OrbitSolution, inst: LabeledInstance) -> Tuple[bool, List[dict]]:
    """
    Bounds, links x <= y, coverage and capacity, checked per orbit.

    Returns:
        tuple: (feasible, violations as {constraint, lhs, rhs})
    """
    U = inst.base.capacity_or_bound
    violations: List[dict] = []
    for i in node.facilities:
        yi = node.y.get(i, ZERO)
        if yi < 0 or yi > 1:
            violations.append({'constraint': f"bound[{y_var(i)}]", 'lhs': yi, 'rhs': ONE if yi > 1 else ZERO})
    load: Dict[int, Fraction] = {i: ZERO for i in node.facilities}
    for desc, prof in node.x_orbits:
        j = desc.get('client', None)
        label = str(j) if j is not None else f"pool:{node.pool_members(1)[0]}"
        total = sum(prof.values(), ZERO)
        if total != 1:
            violations.append({'constraint': f"cover[{label}]", 'lhs': total, 'rhs': ONE})
        for i, v in prof.items():
            if v < 0 or v > 1:
                violations.append({'constraint': f"bound[x[{i},{label}]]", 'lhs': v, 'rhs': ONE if v > 1 else ZERO})
            if v > node.y.get(i, ZERO):
                violations.append({'constraint': f"link[{i},{label}]", 'lhs': v, 'rhs': node.y.get(i, ZERO)})
    for size, prof in node.orbit_weights():
        for i, v in prof.items():
            load[i] += size * v
    for i in node.facilities:
        if load[i] > U * node.y.get(i, ZERO):
            violations.append({'constraint': f"capacity[{i}]", 'lhs': load[i], 'rhs': U * node.y.get(i, ZERO)})
    if len(node.singles) > node.depth:
        violations.append({'constraint': 'orbits', 'lhs': len(node.singles), 'rhs': node.depth})
    return not violations, violations


@dataclass
class InvariantCheck:
    name: str
    holds: bool = True
    variable: Optional[str] = None
    slack: Optional[Fraction] = None

    def offer(self, variable: str, slack: Fraction) -> None:
        if self.slack is None or slack < self.slack:
            self.variable, self.slack = variable, slack
        if slack < 0:
            self.holds = False

    def to_json(self) -> dict:
        return {'holds': self.holds, 'variable': self.variable,
                'slack': None if self.slack is None else rational_field(self.slack)}


@dataclass
class InvariantReport:
    depth: int
    checks: Dict[str, InvariantCheck]
    # '2a' with the cheap assignment also held at or above its upper bound; reported only
    strict_2a_holds: bool = True
    zeroed_cheap: int = 0

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks.values())

    def failures(self) -> List[str]:
        return [name for name, c in self.checks.items() if not c.holds]

    def to_json(self) -> dict:
        return {'depth': self.depth, 'passed': self.passed,
                'checks': {k: c.to_json() for k, c in self.checks.items()},
                'strict_2a_holds': self.strict_2a_holds, 'zeroed_cheap': self.zeroed_cheap}


def invariant_bounds(inst: LabeledInstance, k: int) -> Dict[str, Fraction]:
    """The closed-form bounds at depth k."""
    n, l, a, b, delta = (inst.param(p) for p in ('n', 'l', 'a', 'b', 'delta'))
    m = inst.base.n_clients
    costly_cap = (a / l + 2 * k * a * (1 - a) / (n * l))
    return {
        'y_lo': b - 2 * k * a / l,
        'y_hi': b + 2 * k * a / l,
        'cheap_lo': (1 - a) / n - 2 * k * a / (n * l) / b,
        'cheap_hi': (1 - a) / n + 2 * k * (1 - a) / n * max(1 / l, 1 / n),
        'costly_lo': a / l,
        'costly_hi': costly_cap,
        'opened_hi': costly_cap * (1 + delta) / b,
        'cheap_load': m * (1 - a) / n + 2 * k * m * a / (n * l),
        'costly_load': m * a / l + k,
        'opened_load': (m * a / l + k) * (1 + delta) / b,
    }


def verify_invariants(node: OrbitSolution, inst: LabeledInstance) -> InvariantReport:
    k = node.depth
    bd = invariant_bounds(inst, k)
    checks = {name: InvariantCheck(name) for name in ('1', '2a', '2b', '2c', '3', '4a', '4b', 'zeroing')}
    strict_2a = True
    for i in node.costly:
        yi = node.y[i]
        if yi not in (ZERO, ONE):
            checks['1'].offer(y_var(i), min(yi - bd['y_lo'], bd['y_hi'] - yi))

    load: Dict[int, Fraction] = {i: ZERO for i in node.facilities}
    zeroed = 0
    for desc, prof in node.x_orbits:
        size = desc.get('pool', 1)
        j = desc.get('client', None)
        if j is None:
            j = node.pool_members(1)[0]
        for i, v in prof.items():
            load[i] += size * v
        if ONE not in prof.values():
            zeroed += size * sum(1 for c in node.cheap if prof.get(c, ZERO) == 0)
        for i in node.cheap:
            v = prof.get(i, ZERO)
            if v not in (ZERO, ONE):
                checks['2a'].offer(x_var(i, j), min(v - bd['cheap_lo'], bd['cheap_hi'] - v))
                strict_2a = strict_2a and v >= bd['cheap_hi']
        for i in node.costly:
            v, yi = prof.get(i, ZERO), node.y[i]
            if yi not in (ZERO, ONE) and v != 0:
                checks['2b'].offer(x_var(i, j), min(v - bd['costly_lo'], bd['costly_hi'] - v))
            if yi == 1 and v not in (ZERO, ONE):
                checks['2c'].offer(x_var(i, j), min(v - bd['costly_lo'], bd['opened_hi'] - v))
    for i in node.cheap:
        checks['3'].offer(f"load[{i}]", bd['cheap_load'] - load[i])
    for i in node.costly:
        if node.y[i] != 1:
            checks['4a'].offer(f"load[{i}]", bd['costly_load'] - load[i])
        else:
            checks['4b'].offer(f"load[{i}]", bd['opened_load'] - load[i])
    # zeroed <= k, tight at the root where k = 0
    checks['zeroing'].offer('zeroed_cheap', Fraction(k - zeroed))
    return InvariantReport(k, checks, strict_2a, zeroed)


def fractional_touches(node: OrbitSolution, representatives_only: bool = True) -> List[str]:
    """
    Fractional variables to touch: Costly openings and the assignments of one
    client per orbit (all sampled clients when representatives_only is False).
    """
    names = [y_var(i) for i in node.costly if node.y[i] not in (ZERO, ONE)]
    clients = sorted(node.singles) + node.pool_members(1 if representatives_only else 2)
    for j in clients:
        prof = node.profile(j)
        names += [x_var(i, j) for i in node.facilities if prof.get(i, ZERO) not in (ZERO, ONE)]
    return names


def witness_pairs(node: OrbitSolution, variables: Optional[Iterable[str]] = None) -> Dict[str, WitnessPair]:
    names = fractional_touches(node, representatives_only=False) if variables is None else variables
    return {v: WitnessPair(v, touch(node, v, TYPE1), touch(node, v, TYPE2)) for v in names}


def check_sibling_set(node: OrbitSolution, pairs: Dict[str, WitnessPair]) -> Tuple[bool, Optional[dict]]:
    """Symmetry over the type-1 children, then the twin identity per pair."""
    checked_vars = node.variables()
    ok, violation = symmetry_factor_check(node, pairs, checked_vars)
    if not ok:
        return False, violation
    for var, pair in pairs.items():
        holds, where = twin_identity_holds(node, pair.type1, pair.type2, var, checked_vars)
        if not holds:
            return False, {'condition': 'twin', 'indices': [var, where], 'lhs': None, 'rhs': node.value(where)}
    return True, None


@dataclass(frozen=True)
class AllChildrenPerNode:
    name: str = 'all'


@dataclass(frozen=True)
class Paths:
    paths: Tuple[Tuple[Tuple[str, int], ...], ...]
    name: str = 'paths'


@dataclass(frozen=True)
class RandomSample:
    seed: int
    width: int
    name: str = 'sample'


@dataclass
class TreeNode:
    depth: int
    touched_history: Tuple[Tuple[str, int], ...]
    feasible: bool
    violations: List[dict] = field(default_factory=list)
    invariants: Optional[InvariantReport] = None
    symmetry_ok: Optional[bool] = None
    diagnostic: Optional[dict] = None
    solution: Optional[OrbitSolution] = None

    @property
    def passed(self) -> bool:
        return self.feasible and self.invariants is not None and self.invariants.passed and self.symmetry_ok is not False

    def to_json(self) -> dict:
        return {
            'depth': self.depth,
            'touched_history': [[v, t] for v, t in self.touched_history],
            'feasible': self.feasible,
            'violations': jsonable(self.violations),
            'invariants': None if self.invariants is None else self.invariants.to_json(),
            'symmetry_ok': self.symmetry_ok,
            'diagnostic': jsonable(self.diagnostic) if self.diagnostic else None,
            'passed': self.passed,
        }


@dataclass
class TreeReport:
    strategy: str
    depth: int
    nodes: List[TreeNode]

    @property
    def failures(self) -> List[TreeNode]:
        return [node for node in self.nodes if not node.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            'strategy': self.strategy,
            'depth': self.depth,
            'node_count': len(self.nodes),
            'failure_count': len(self.failures),
            'passed': self.passed,
            'nodes': [node.to_json() for node in self.nodes],
        }


def _node_bytes(node: OrbitSolution) -> int:
    entries = len(node.y) + len(node.pool) + sum(len(p) for p in node.singles.values())
    return entries * config.BYTES_PER_RATIONAL


def _verify(node: OrbitSolution, inst: LabeledInstance) -> TreeNode:
    """Feasibility first, then invariants; the first failure stops the checks."""
    ok, violations = verify_node_feasibility(node, inst)
    entry = TreeNode(node.depth, node.touched_history, ok, violations)
    if not ok:
        entry.diagnostic = {'stage': 'feasibility', 'violations': violations[:10]}
        logger.warning("node %s infeasible: %s", node.touched_history, violations[0]['constraint'])
        return entry
    entry.invariants = verify_invariants(node, inst)
    if not entry.invariants.passed:
        entry.diagnostic = {'stage': 'invariants', 'failed': entry.invariants.failures()}
        logger.warning("node %s breaks invariants %s", node.touched_history, entry.invariants.failures())
    return entry


def build_tree(root: OrbitSolution, depth: int, strategy, inst: LabeledInstance,
               enforce_depth_cap: bool = True, budget: Optional[int] = None) -> TreeReport:
    """
    Construct and verify evolution-tree nodes.

    Each expanded node has its witness set checked for symmetry and the twin
    identity; the result is recorded on every child. AllChildrenPerNode takes
    one pool client per orbit, the others being isomorphic.
    """
    cap = depth_cap(inst)
    if enforce_depth_cap and depth > cap:
        raise DepthBudgetError("tree depth", depth, cap)
    budget = config.TREE_BUDGET if budget is None else budget
    memory_cap = config.BUDGET_MB * 1024 * 1024
    rng = random.Random(strategy.seed) if isinstance(strategy, RandomSample) else None

    root_entry = _verify(root, inst)
    root_entry.solution = root
    nodes = [root_entry]
    retained = _node_bytes(root)

    def expand(entry: TreeNode, node: OrbitSolution, choices: Optional[List[Tuple[str, int]]] = None):
        nonlocal retained
        if choices is None:
            touches = fractional_touches(node)
            choices = [(v, t) for v in touches for t in (TYPE1, TYPE2)]
            if rng is not None and len(choices) > strategy.width:
                choices = rng.sample(choices, strategy.width)
        fractional = {v for v, _ in choices if node.value(v) not in (ZERO, ONE)}
        pairs = witness_pairs(node, sorted(fractional | set(fractional_touches(node, False))))
        sym_ok, violation = check_sibling_set(node, pairs)
        if not sym_ok:
            entry.symmetry_ok = False
            entry.diagnostic = {'stage': 'symmetry', 'violation': violation}
            logger.warning("witness set of %s fails %s", node.touched_history, violation)
            return []
        children = []
        for var, wtype in choices:
            if var in pairs:
                child = pairs[var].type1 if wtype == TYPE1 else pairs[var].type2
            else:
                child = touch(node, var, wtype)
            child_entry = _verify(child, inst)
            child_entry.symmetry_ok = True
            nodes.append(child_entry)
            check_budget("tree nodes", len(nodes), budget)
            children.append((child_entry, child))
        return children

    if isinstance(strategy, Paths):
        for path in strategy.paths:
            entry, node = root_entry, root
            for var, wtype in list(path)[:depth]:
                if not entry.passed:
                    break
                produced = expand(entry, node, [(var, wtype)])
                if not produced:
                    break
                entry, node = produced[0]
    else:
        frontier = [(root_entry, root)]
        for _ in range(depth):
            next_frontier = []
            for entry, node in frontier:
                if not entry.passed:
                    continue
                for child_entry, child in expand(entry, node):
                    next_frontier.append((child_entry, child))
                    retained += _node_bytes(child)
            if retained > memory_cap:
                raise BudgetExceededError("retained bytes", retained, memory_cap)
            frontier = next_frontier
    report = TreeReport(strategy.name, depth, nodes)
    logger.info("tree %s depth %d: %d nodes, %d failures", strategy.name, depth, len(nodes), len(report.failures))
    return report


@dataclass
class ZeroingPath:
    nodes: List[OrbitSolution]
    infeasible_step: Optional[int] = None
    violations: List[dict] = field(default_factory=list)
    # every surviving variable of S grew by at most 1 / (1 - z_touched) per step
    growth_ok: bool = True

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    def to_json(self) -> dict:
        return {'length': self.length, 'infeasible_step': self.infeasible_step,
                'violations': jsonable(self.violations[:10]), 'growth_ok': self.growth_ok,
                'touched': [[v, t] for v, t in self.nodes[-1].touched_history]}


def zeroing_path(node: OrbitSolution, S: Sequence[str], inst: LabeledInstance) -> ZeroingPath:
    """
    Greedy type-2 path: touch the largest remaining variable of S until all
    of S is zero. Stops at the first infeasible node. The depth cap does not apply.
    """
    total = sum((node.value(v) for v in S), ZERO)
    if total >= 1:
        raise InfeasibleInputError(f"variables of S sum to {to_text(total)}, need < 1")
    path = ZeroingPath([node])
    order = {v: k for k, v in enumerate(S)}
    remaining = [v for v in S if node.value(v) != 0]
    current = node
    while remaining:
        pick = max(remaining, key=lambda v: (current.value(v), -order[v]))
        zj = current.value(pick)
        child = touch(current, pick, TYPE2)
        remaining = [v for v in remaining if v != pick and child.value(v) != 0]
        for v in remaining:
            if child.value(v) > current.value(v) / (1 - zj):
                path.growth_ok = False
        path.nodes.append(child)
        current = child
        ok, violations = verify_node_feasibility(child, inst)
        if not ok:
            path.infeasible_step = child.depth - node.depth
            path.violations = violations
            logger.info("zeroing path infeasible at step %d (%s)", path.infeasible_step,
                        violations[0]['constraint'])
            break
    return path


def dense_expansion(node: OrbitSolution, inst: Optional[LabeledInstance] = None,
                    budget: Optional[int] = None) -> ConeVector:
    """Every y and x coordinate of a node; micro instances only."""
    size = len(node.facilities) * (node.n_clients + 1)
    check_budget("dense coordinates", size, config.DENSE_BUDGET if budget is None else budget)
    coords = {y_var(i): node.y.get(i, ZERO) for i in node.facilities}
    for i in node.facilities:
        for j in range(node.n_clients):
            coords[x_var(i, j)] = node.profile(j).get(i, ZERO)
    return ConeVector(ONE, coords)


def protection_view_from_witnesses(node: OrbitSolution, inst: Optional[LabeledInstance] = None,
                                   budget: Optional[int] = None) -> ProtectionMatrixView:
    """Row v of the protection matrix is z_v times the dense type-1 child for v."""
    base = dense_expansion(node, inst, budget)
    rows: Dict[str, ConeVector] = {}
    zero_rows = set()
    for var, zv in base.coords.items():
        if zv == 0:
            zero_rows.add(var)
        elif zv != 1:
            rows[var] = dense_expansion(touch(node, var, TYPE1), inst, budget).scaled(zv)
    return ProtectionMatrixView(base, rows, frozenset(zero_rows))
