"""
Command-line front end: instance generation, gap computation, hierarchy
verification and the oracle cross-check. Every report embeds its RunConfig.

Exit codes: 0 all checks pass, 1 verification failure, 2 usage or budget error.
"""

import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import click

import config
from services.errors import LiftGapError
from services.hierarchy_service import oracle_crosscheck, oracle_grid
from services.instance_service import (GENERATORS, FacilityLocationInstance, base_of, generate_instance,
                                       instance_from_json, instance_to_json)
from services.lp_model import y_var
from services.proper_service import (example1_verify, gap_series, lbfl_round_enumeration, lbfl_round_fractions)
from services.rational import frac, jsonable, to_text
from services.relaxation_service import ClassSet, constellation_lp, standard_lp, star_lp
from services.solver_service import integrality_gap, solve_lp_float
from services.witness_service import (AllChildrenPerNode, Paths, RandomSample, build_tree, dense_expansion,
                                      root_solution, touch, zeroing_path)

logger = logging.getLogger(__name__)

EXIT_FAILED, EXIT_USAGE = 1, 2


@dataclass
class RunConfig:
    command: str
    instance_path: Optional[str] = None
    params: Dict[str, object] = field(default_factory=dict)
    budgets: Dict[str, int] = field(default_factory=config.budgets)
    out: Optional[str] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if any(v <= 0 for v in self.budgets.values()):
            raise click.UsageError("budgets must be positive")

    def to_json(self) -> dict:
        return jsonable(asdict(self))


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, 'w') as fh:
            fh.write(text)
    else:
        click.echo(text)


def _load_instance(path: str):
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def _abort(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_USAGE)


@click.group()
def cli():
    """Verification lab for LP relaxations of capacitated and lower-bounded facility location."""
    logging.basicConfig(level=config.LOG_LEVEL, format='%(levelname)s %(name)s: %(message)s')


@cli.command('gen')
@click.argument('generator', type=click.Choice(GENERATORS))
@click.option('--n', type=int, default=5)
@click.option('--l', 'l', type=int, default=20)
@click.option('--H', 'H', default='10')
@click.option('--c', type=int, default=2)
@click.option('--D', 'D', default='1')
@click.option('--facilities', type=int, default=3)
@click.option('--clients', type=int, default=6)
@click.option('--mode', type=click.Choice(['cfl', 'lbfl'], case_sensitive=False), default='cfl')
@click.option('--U', '--bound', 'bound', type=int, default=3)
@click.option('--seed', type=int, default=0)
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_gen(generator, n, l, H, c, D, facilities, clients, mode, bound, seed, out):
    """Generate an instance file."""
    params = {'n': n, 'l': l, 'H': H, 'c': c, 'D': D, 'facilities': facilities, 'clients': clients,
              'mode': mode, 'bound': bound, 'seed': seed}
    try:
        inst = generate_instance(generator, params)
    except LiftGapError as exc:
        _abort(exc)
    payload = instance_to_json(inst, name=generator)
    payload['run_config'] = RunConfig('gen', params=dict(params, generator=generator), out=out, seed=seed).to_json()
    base = base_of(inst)
    if out:
        _emit(payload, out)
        click.echo(f"{generator}: {base.mode} with {base.n_facilities} facilities, {base.n_clients} clients -> {out}")
    else:
        _emit(payload, None)


def relaxation_lp(inst, relaxation: str):
    """classic, star or constellation:<class set file>."""
    if relaxation == 'classic':
        return standard_lp(inst, aggregate_clients=True), 'classic'
    if relaxation == 'star':
        return star_lp(inst), 'star'
    if relaxation.startswith('constellation:'):
        with open(relaxation.split(':', 1)[1]) as fh:
            class_set = ClassSet.from_json(json.load(fh))
        return constellation_lp(inst, class_set), 'constellation'
    raise click.UsageError(f"unknown relaxation '{relaxation}'")


@cli.command('gap')
@click.argument('instance_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--relaxation', default='classic')
@click.option('--budget-subsets', type=int, default=None)
@click.option('--float', 'float_check', is_flag=True, help='also solve with HiGHS in floating point')
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_gap(instance_path, relaxation, budget_subsets, float_check, out):
    """Solve a relaxation exactly and compare with the brute-force integral optimum."""
    try:
        inst = _load_instance(instance_path)
        lp, kind = relaxation_lp(inst, relaxation)
        report = integrality_gap(inst, lp, kind, budget_subsets)
    except LiftGapError as exc:
        _abort(exc)
    payload = report.to_json()
    if float_check:
        # exploratory only; the exact value above is authoritative
        payload['float_check'] = solve_lp_float(lp)
    payload['run_config'] = RunConfig('gap', instance_path, {'relaxation': relaxation, 'float': float_check},
                                      out=out).to_json()
    _emit(payload, out)


def _parse_path(text: str):
    steps = []
    for part in text.split(';'):
        var, _, wtype = part.strip().rpartition(':')
        steps.append((var, int(wtype)))
    return tuple(steps)


@cli.command('ls-verify')
@click.argument('instance_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--depth', type=int, default=1)
@click.option('--strategy', type=click.Choice(['all', 'paths', 'sample']), default='all')
@click.option('--path', 'paths', multiple=True, help="touch sequence such as 'y[20]:1;x[0,0]:2'")
@click.option('--seed', type=int, default=0)
@click.option('--width', type=int, default=4)
@click.option('--zeroing', is_flag=True, help='greedy Type 2 path closing every Costly facility')
@click.option('--budget-tree', type=int, default=None)
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_ls_verify(instance_path, depth, strategy, paths, seed, width, zeroing, budget_tree, out):
    """Build and verify evolution-tree nodes of the bad CFL solution."""
    run = RunConfig('ls-verify', instance_path,
                    {'depth': depth, 'strategy': strategy, 'paths': list(paths), 'width': width,
                     'zeroing': zeroing}, out=out, seed=seed)
    try:
        inst = _load_instance(instance_path)
        root = root_solution(inst)
        if zeroing:
            S = [y_var(i) for i in root.costly]
            path = zeroing_path(root, S, inst)
            payload = path.to_json()
            passed = (path.infeasible_step is not None and path.infeasible_step <= len(S)
                      and path.growth_ok)
            payload['passed'] = passed
        else:
            if strategy == 'all':
                chosen = AllChildrenPerNode()
            elif strategy == 'paths':
                chosen = Paths(tuple(_parse_path(p) for p in paths))
            else:
                chosen = RandomSample(seed, width)
            report = build_tree(root, depth, chosen, inst, budget=budget_tree)
            payload = report.to_json()
            passed = report.passed
    except LiftGapError as exc:
        _abort(exc)
    payload['run_config'] = run.to_json()
    _emit(payload, out)
    if not passed:
        logger.warning("ls-verify failed")
        sys.exit(EXIT_FAILED)


@cli.command('ls-node')
@click.argument('instance_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--path', 'path', default='', help="touch sequence such as 'y[3]:1;x[0,0]:2'; empty for the root")
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_ls_node(instance_path, path, out):
    """Dump one evolution-tree node with its dense (y, x) expansion; micro instances only."""
    try:
        inst = _load_instance(instance_path)
        node = root_solution(inst)
        for var, wtype in (_parse_path(path) if path else ()):
            node = touch(node, var, wtype)
        dense = dense_expansion(node, inst)
    except (LiftGapError, ValueError) as exc:
        _abort(exc)
    payload = {'node': node.to_json(), 'dense': dense.to_json(),
               'run_config': RunConfig('ls-node', instance_path, {'path': path}, out=out).to_json()}
    _emit(payload, out)


@cli.command('oracle-crosscheck')
@click.option('--facilities', type=int, default=2)
@click.option('--clients', type=int, default=2)
@click.option('--mode', type=click.Choice(['cfl', 'lbfl'], case_sensitive=False), default='cfl')
@click.option('--bound', type=int, default=2)
@click.option('--rounds', type=int, default=1)
@click.option('--step', default='1/4')
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_oracle_crosscheck(facilities, clients, mode, bound, rounds, step, out):
    """Compare the two membership oracles on a grid of points of a micro instance."""
    run = RunConfig('oracle-crosscheck', params={'facilities': facilities, 'clients': clients, 'mode': mode,
                                                 'bound': bound, 'rounds': rounds, 'step': step}, out=out)
    try:
        micro = FacilityLocationInstance(mode=mode.upper(), n_facilities=facilities, n_clients=clients,
                                         opening_cost=tuple(Fraction(0) for _ in range(facilities)),
                                         capacity_or_bound=bound)
        K = standard_lp(micro)
        report = oracle_crosscheck(K, rounds, oracle_grid(K, frac(step)))
    except LiftGapError as exc:
        _abort(exc)
    payload = report.to_json()
    payload['run_config'] = run.to_json()
    _emit(payload, out)
    if not report.agree:
        sys.exit(EXIT_FAILED)


@cli.command('series')
@click.argument('family', type=click.Choice(['cfl-proper', 'lbfl-gap']))
@click.option('--ns', default='4,5,6', help='comma-separated values of n')
@click.option('--c', type=int, default=2)
@click.option('--D', 'D', default='1')
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_series(family, ns, c, D, out):
    """CSV of lp_value, integral_value and gap against n."""
    try:
        rows = gap_series(family, [int(n) for n in ns.split(',')], c=c, D=frac(D))
    except (LiftGapError, ValueError) as exc:
        _abort(exc)
    with click.open_file(out or '-', 'w') as fh:
        writer = csv.DictWriter(fh, fieldnames=['n', 'lp_value', 'integral_value', 'gap'], lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: to_text(v) if isinstance(v, Fraction) else v for k, v in row.items()})


@cli.command('example1')
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_example1(out):
    """Star-feasible yet not a projection of the complexity-3/4 class set."""
    report = example1_verify()
    payload = report.to_json()
    payload['run_config'] = RunConfig('example1', out=out).to_json()
    _emit(payload, out)
    if not report.passed:
        sys.exit(EXIT_FAILED)


@cli.command('lbfl-rounds')
@click.option('--n', type=int, default=4)
@click.option('--c', type=int, default=2)
@click.option('--out', type=click.Path(dir_okay=False))
def cmd_lbfl_rounds(n, c, out):
    """Enumerate admissible classes and compare the role fractions with the closed forms."""
    try:
        closed = lbfl_round_fractions(n, c)
        enumerated = lbfl_round_enumeration(n, c)
    except LiftGapError as exc:
        _abort(exc)
    mismatches: List[str] = enumerated.mismatches(closed)
    payload = {'closed_form': closed.to_json(), 'enumerated': enumerated.fractions.to_json(),
               'class_counts': enumerated.class_counts, 'uniform': enumerated.uniform,
               'mismatches': mismatches, 'passed': not mismatches and enumerated.uniform,
               'run_config': RunConfig('lbfl-rounds', params={'n': n, 'c': c}, out=out).to_json()}
    _emit(payload, out)
    if not payload['passed']:
        sys.exit(EXIT_FAILED)


if __name__ == '__main__':
    cli()
