"""
Instance Service Module - facility location instances and the instance families
used by the gap constructions.
"""

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import InvalidInstanceError
from .rational import Number, frac, jsonable, to_text

logger = logging.getLogger(__name__)

CFL = 'CFL'
LBFL = 'LBFL'

CHEAP = 'Cheap'
COSTLY = 'Costly'
SIMPLEX = 'Simplex'
FAR_CLUSTER = 'FarCluster'
PLAIN = 'Plain'
LABELS = (CHEAP, COSTLY, SIMPLEX, FAR_CLUSTER, PLAIN)


@dataclass(frozen=True)
class FacilityLocationInstance:
    """
    Uniform CFL or LBFL instance.

    Connection costs are sparse: `connection_cost` holds the entries that differ
    from `default_distance`. Facilities and clients are indexed from 0.
    """
    mode: str
    n_facilities: int
    n_clients: int
    opening_cost: Tuple[Fraction, ...]
    capacity_or_bound: int
    connection_cost: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)
    default_distance: Fraction = Fraction(0)
    metric: bool = False
    integral_infeasible: bool = False

    def __post_init__(self):
        ok, problems = validate_instance(self)
        if not ok:
            raise InvalidInstanceError("; ".join(problems))

    @property
    def facilities(self) -> range:
        return range(self.n_facilities)

    @property
    def clients(self) -> range:
        return range(self.n_clients)

    def cost(self, i: int, j: int) -> Fraction:
        return self.connection_cost.get((i, j), self.default_distance)

    def client_profiles(self) -> Dict[Tuple[Fraction, ...], List[int]]:
        """Group clients by their connection-cost row, in client-index order."""
        touched = sorted({j for (_, j) in self.connection_cost})
        plain = self.n_clients - len(touched)
        groups: Dict[Tuple[Fraction, ...], List[int]] = {}
        touched_set = set(touched)
        if plain:
            default_row = tuple(self.default_distance for _ in self.facilities)
            groups[default_row] = [j for j in self.clients if j not in touched_set] if touched else list(self.clients)
        for j in touched:
            row = tuple(self.cost(i, j) for i in self.facilities)
            groups.setdefault(row, []).append(j)
        return groups


@dataclass(frozen=True)
class LabeledInstance:
    base: FacilityLocationInstance
    facility_labels: Tuple[str, ...]
    params: Dict[str, Fraction]

    def __post_init__(self):
        if len(self.facility_labels) != self.base.n_facilities:
            raise InvalidInstanceError("labels must cover every facility")
        unknown = [lab for lab in self.facility_labels if lab not in LABELS]
        if unknown:
            raise InvalidInstanceError(f"unknown facility labels: {sorted(set(unknown))}")

    def with_label(self, label: str) -> List[int]:
        return [i for i, lab in enumerate(self.facility_labels) if lab == label]

    def param(self, name: str) -> Fraction:
        try:
            return self.params[name]
        except KeyError:
            raise InvalidInstanceError(f"instance has no parameter '{name}'") from None


def validate_instance(instance: FacilityLocationInstance) -> Tuple[bool, List[str]]:
    """
    Check the instance invariants.

    Returns:
        tuple: (valid: bool, problems: list of messages)
    """
    problems = []
    if instance.mode not in (CFL, LBFL):
        problems.append(f"mode must be {CFL} or {LBFL}")
    if instance.n_facilities < 1 or instance.n_clients < 1:
        problems.append("need at least one facility and one client")
    if instance.capacity_or_bound < 1:
        problems.append("capacity/bound must be a positive integer")
    if len(instance.opening_cost) != instance.n_facilities:
        problems.append("one opening cost per facility is required")
    if any(f < 0 for f in instance.opening_cost):
        problems.append("opening costs must be nonnegative")
    if instance.default_distance < 0 or any(c < 0 for c in instance.connection_cost.values()):
        problems.append("connection costs must be nonnegative")
    for (i, j) in instance.connection_cost:
        if not (0 <= i < instance.n_facilities and 0 <= j < instance.n_clients):
            problems.append(f"connection cost for unknown pair ({i}, {j})")
            break
    if problems:
        return False, problems

    if instance.mode == CFL and instance.n_facilities * instance.capacity_or_bound < instance.n_clients:
        problems.append("CFL instance cannot serve all clients: n_facilities * U < n_clients")
    if instance.mode == LBFL and instance.n_clients < instance.capacity_or_bound and not instance.integral_infeasible:
        problems.append("LBFL instance has fewer clients than B and is not flagged integral-infeasible")
    if instance.metric:
        violation = find_metric_violation(instance)
        if violation is not None:
            problems.append(f"metric cross-inequality fails at {violation}")
    return not problems, problems


def find_metric_violation(instance: FacilityLocationInstance) -> Optional[Tuple[int, int, int, int]]:
    """
    Exhaustive check of c_ij <= c_ij' + c_i'j' + c_i'j.

    Clients with identical cost rows behave identically, so one representative
    per row is enough.
    """
    reps = [members[0] for members in instance.client_profiles().values()]
    facilities = list(instance.facilities)
    for j in reps:
        for jp in reps:
            for i in facilities:
                c_ij = instance.cost(i, j)
                c_ijp = instance.cost(i, jp)
                for ip in facilities:
                    if c_ij > c_ijp + instance.cost(ip, jp) + instance.cost(ip, j):
                        return (i, ip, j, jp)
    return None


def _check_positive(**values) -> None:
    for name, value in values.items():
        if value is None or value <= 0:
            raise InvalidInstanceError(f"{name} must be positive")


def build_ls_instance(n: int, l: int, H: Number) -> LabeledInstance:
    """n zero-cost Cheap facilities, l unit-cost Costly ones, U = n^3, nU+1 clients at distance 0."""
    H = frac(H)
    _check_positive(n=n, l=l, H=H)
    if n < 2:
        raise InvalidInstanceError("n must be at least 2")
    U = n ** 3
    base = FacilityLocationInstance(
        mode=CFL,
        n_facilities=n + l,
        n_clients=n * U + 1,
        opening_cost=tuple([Fraction(0)] * n + [Fraction(1)] * l),
        capacity_or_bound=U,
        metric=True,
    )
    params = {
        'n': Fraction(n), 'l': Fraction(l), 'H': H, 'U': Fraction(U),
        'a': Fraction(1, n ** 2), 'b': H / n ** 2, 'delta': 1 / H,
    }
    logger.info("built ls instance n=%d l=%d H=%s (%d clients)", n, l, to_text(H), base.n_clients)
    return LabeledInstance(base, tuple([CHEAP] * n + [COSTLY] * l), params)


def lbfl_far_distance(n: int, D: Fraction) -> Fraction:
    return 2 * n * D


def build_lbfl_gap_instance(n: int, c: int, D: Number) -> LabeledInstance:
    """
    n+1 facilities, B = n^2, n^3 clients.

    Facilities 0..n-2 sit on the vertices of a regular simplex with side D, each
    next to its B-1 exclusive clients; facilities n-1 and n share a far point
    with the remaining n^2+n-1 clients, at distance D' = 2nD from every vertex.
    """
    D = frac(D)
    _check_positive(n=n, D=D)
    if c < 2:
        raise InvalidInstanceError("c must be at least 2")
    if n - c - 1 <= 0:
        raise InvalidInstanceError("n - c - 1 must be positive")
    inst = lbfl_gap_geometry(n, D)
    params = dict(inst.params)
    params['c'] = Fraction(c)
    params['alpha'] = Fraction(n - c, n)
    return LabeledInstance(inst.base, inst.facility_labels, params)


def lbfl_gap_geometry(n: int, D: Number, metric: bool = True) -> LabeledInstance:
    """The geometric LBFL instance alone, without the c-dependent checks; also usable at n = 3."""
    D = frac(D)
    _check_positive(n=n, D=D)
    if n < 3:
        raise InvalidInstanceError("n must be at least 3")
    B = n ** 2
    far = lbfl_far_distance(n, D)
    block = B - 1
    far_start = (n - 1) * block
    m = n ** 3
    costs: Dict[Tuple[int, int], Fraction] = {}
    for i in range(n - 1):
        for j in range(far_start):
            if j // block != i:
                costs[(i, j)] = D
        for j in range(far_start, m):
            costs[(i, j)] = far
    for i in (n - 1, n):
        for j in range(far_start):
            costs[(i, j)] = far
    base = FacilityLocationInstance(
        mode=LBFL,
        n_facilities=n + 1,
        n_clients=m,
        opening_cost=tuple(Fraction(0) for _ in range(n + 1)),
        capacity_or_bound=B,
        connection_cost=costs,
        metric=metric,
    )
    params = {'n': Fraction(n), 'B': Fraction(B), 'D': D, 'D_far': far}
    labels = tuple([SIMPLEX] * (n - 1) + [FAR_CLUSTER] * 2)
    logger.info("built lbfl gap instance n=%d D=%s (%d clients)", n, to_text(D), m)
    return LabeledInstance(base, labels, params)


def build_cfl_proper_instance(n: int) -> LabeledInstance:
    if n < 3:
        raise InvalidInstanceError("n must be at least 3")
    U = n ** 2
    base = FacilityLocationInstance(
        mode=CFL,
        n_facilities=n,
        n_clients=(n - 1) * U + 1,
        opening_cost=tuple([Fraction(0)] * (n - 1) + [Fraction(1)]),
        capacity_or_bound=U,
        metric=True,
    )
    return LabeledInstance(base, tuple([PLAIN] * n), {'n': Fraction(n), 'U': Fraction(U)})


EXAMPLE1_BLOCKS = (13, 13, 9, 9)


def build_example1_instance() -> LabeledInstance:
    """4 facilities, B = 10, client sets S1, S2 of 13 and S3, S4 of 9, zero costs."""
    base = FacilityLocationInstance(
        mode=LBFL,
        n_facilities=4,
        n_clients=sum(EXAMPLE1_BLOCKS),
        opening_cost=tuple(Fraction(0) for _ in range(4)),
        capacity_or_bound=10,
        metric=True,
    )
    return LabeledInstance(base, tuple([PLAIN] * 4), {'B': Fraction(10)})


def example1_blocks() -> List[range]:
    blocks, start = [], 0
    for size in EXAMPLE1_BLOCKS:
        blocks.append(range(start, start + size))
        start += size
    return blocks


def generate_random_instance(n_facilities: int, n_clients: int, mode: str, bound: int,
                             seed: int, metric: bool = True) -> FacilityLocationInstance:
    """
    Seeded random instance with clients and facilities on a small integer grid.
    Manhattan distances make the costs metric.
    """
    mode = mode.upper()
    rng = random.Random(seed)
    if mode == CFL:
        bound = max(bound, math.ceil(n_clients / n_facilities))
    elif mode == LBFL:
        bound = min(bound, n_clients)
    else:
        raise InvalidInstanceError(f"unknown mode '{mode}'")
    points_f = [(rng.randint(0, 6), rng.randint(0, 6)) for _ in range(n_facilities)]
    points_c = [(rng.randint(0, 6), rng.randint(0, 6)) for _ in range(n_clients)]
    opening = tuple(Fraction(rng.randint(0, 5)) for _ in range(n_facilities))
    costs = {}
    for i, (fx, fy) in enumerate(points_f):
        for j, (cx, cy) in enumerate(points_c):
            d = abs(fx - cx) + abs(fy - cy)
            if d:
                costs[(i, j)] = Fraction(d)
    return FacilityLocationInstance(
        mode=mode,
        n_facilities=n_facilities,
        n_clients=n_clients,
        opening_cost=opening,
        capacity_or_bound=bound,
        connection_cost=costs,
        metric=metric,
    )


def rederive_params(inst: LabeledInstance) -> Dict[str, Fraction]:
    """Recompute the derived symbols from the primary ones stored in params."""
    p = inst.params
    derived = {}
    if 'l' in p:
        n, H = p['n'], p['H']
        derived.update(U=n ** 3, a=1 / n ** 2, b=H / n ** 2, delta=1 / H)
    elif 'D' in p:
        n = p['n']
        derived.update(B=n ** 2, D_far=2 * n * p['D'])
        if 'c' in p:
            derived['alpha'] = (n - p['c']) / n
    elif 'U' in p:
        derived['U'] = p['n'] ** 2
    return derived


def instance_to_json(instance, name: Optional[str] = None) -> dict:
    labels, params = None, {}
    base = instance
    if isinstance(instance, LabeledInstance):
        base, labels, params = instance.base, list(instance.facility_labels), instance.params
    payload = {
        'mode': base.mode,
        'n_facilities': base.n_facilities,
        'n_clients': base.n_clients,
        'capacity_or_bound': base.capacity_or_bound,
        'opening_cost': [to_text(f) for f in base.opening_cost],
        'default_distance': to_text(base.default_distance),
        'connection_cost': [[i, j, to_text(v)] for (i, j), v in sorted(base.connection_cost.items())],
        'metric': base.metric,
        'labels': labels,
        'params': jsonable(params),
    }
    if name:
        payload['name'] = name
    return payload


def instance_from_json(payload: dict):
    """Inverse of instance_to_json; returns a LabeledInstance when labels are present."""
    try:
        base = FacilityLocationInstance(
            mode=payload['mode'],
            n_facilities=int(payload['n_facilities']),
            n_clients=int(payload['n_clients']),
            opening_cost=tuple(frac(v) for v in payload['opening_cost']),
            capacity_or_bound=int(payload['capacity_or_bound']),
            connection_cost={(int(i), int(j)): frac(v) for i, j, v in payload.get('connection_cost', [])},
            default_distance=frac(payload.get('default_distance', '0')),
            # metric was checked when the file was written
            metric=False,
            integral_infeasible=bool(payload.get('integral_infeasible', False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInstanceError(f"malformed instance JSON: {exc}") from exc
    labels = payload.get('labels')
    if labels:
        params = {k: frac(v) for k, v in (payload.get('params') or {}).items()}
        return LabeledInstance(base, tuple(labels), params)
    return base


def base_of(instance) -> FacilityLocationInstance:
    return instance.base if isinstance(instance, LabeledInstance) else instance


GENERATORS = ('ls', 'lbfl-gap', 'cfl-proper', 'example1', 'random')


def generate_instance(generator: str, params: Optional[Dict] = None):
    """Build an instance from a generator name and its (possibly textual) parameters."""
    p = dict(params or {})

    def integer(name, default):
        return int(p.get(name, default))

    try:
        if generator == 'ls':
            return build_ls_instance(integer('n', 20), integer('l', 20), frac(str(p.get('H', 10))))
        if generator == 'lbfl-gap':
            return build_lbfl_gap_instance(integer('n', 5), integer('c', 2), frac(str(p.get('D', 1))))
        if generator == 'cfl-proper':
            return build_cfl_proper_instance(integer('n', 5))
        if generator == 'example1':
            return build_example1_instance()
        if generator == 'random':
            return generate_random_instance(integer('facilities', 3), integer('clients', 6),
                                            str(p.get('mode', CFL)), integer('bound', 3), integer('seed', 0))
    except (TypeError, ValueError) as exc:
        raise InvalidInstanceError(f"invalid parameters for {generator}: {exc}") from exc
    raise InvalidInstanceError(f"unknown generator '{generator}'")
