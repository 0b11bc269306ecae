# command line interface and experiment sweeps
"""
Scenario documents are JSON with the canonical keys

    nodes     list of node ids
    edges     [{id, tail, head, a, b, d}]
    stations  [{id, edge, sigma, k, g | ground: {type, ...}}]
    evs       [{id, s, t, b, b_lo, b_hi}]
    options   {skip_charging, path_cap, pt: {c, c1, c2, c3, pmf}}

Result tables are comma separated with a header row and floats written with
12 significant digits; wall times go to a separate timings.csv.
"""
import os
import sys
import json
import time
import logging
import argparse
import itertools
import dataclasses
from typing import List, Optional

import numpy as np
import pandas as pd

from evroute import analysis, equilibrium, prospect, stochastic
from evroute import costs
from evroute.model import Profile, validate_scenario
from evroute.utils import (EvrouteError, ValidationError, BudgetExceededError,
                           PathExplosionError, parallel_map)

LOG = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'
LATENCY = {'linear': 1.0, 'quadratic': 2.0}
MODES = ('ne', 'enumerate', 'optimum', 'poa', 'pos', 'balance', 'hoeffding',
         'monte-carlo', 'pt')
STOCHASTIC_MODES = ('monte-carlo', 'pt')
CELL_KEYS = ('n', 'pricing_k', 'latency', 'skip_charging', 'preset', 'c')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_CELL_FAILURES = 4


@dataclasses.dataclass
class ExperimentConfig:
    scenario: Optional[str] = None
    mode: str = 'poa'
    fleet: List[int] = dataclasses.field(default_factory=list)
    pricing: List[float] = dataclasses.field(default_factory=list)
    latency: List[str] = dataclasses.field(default_factory=list)
    skip: List[bool] = dataclasses.field(default_factory=list)
    presets: List[str] = dataclasses.field(default_factory=list)
    distortion: List[float] = dataclasses.field(default_factory=list)
    seed: Optional[int] = None
    out: str = 'results'
    eps: float = 1e-6
    max_rounds: int = 1000
    starts: int = 64
    budget: int = equilibrium.ENUMERATION_BUDGET
    max_cells: int = 1000
    workers: Optional[int] = None
    K: float = stochastic.DEFAULT_K
    points: int = 21
    trials: int = 10000
    fail_eps: float = 0.05

    def check(self):
        if self.mode not in MODES:
            raise ValidationError('mode', 'unknown mode %r' % self.mode)
        if self.mode in STOCHASTIC_MODES and self.seed is None:
            raise ValidationError('seed', 'mode %s needs a seed' % self.mode)
        for name in self.latency:
            if name not in LATENCY:
                raise ValidationError('latency', 'unknown latency %r' % name)
        for flag in self.skip:
            if not isinstance(flag, bool):
                raise ValidationError('skip', 'expected booleans, got %r' % flag)
        for name in self.presets:
            if name not in prospect.PRESETS:
                raise ValidationError('presets', 'unknown preset %r' % name)
        if not self.eps > 0.0:
            raise ValidationError('eps', 'must be > 0')
        if self.scenario is None and self.mode != 'hoeffding':
            raise ValidationError('scenario', 'missing scenario path')
        return self

    @classmethod
    def from_file(cls, path, **overrides):
        with open(path) as fh:
            doc = json.load(fh)
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - fields
        if unknown:
            raise ValidationError('config', 'unknown keys %s' % sorted(unknown))
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)


def load_scenario(path):
    try:
        with open(path) as fh:
            document = json.load(fh)
    except json.JSONDecodeError as err:
        raise ValidationError('$', 'invalid JSON: %s' % err)
    return validate_scenario(document)


def default_pmfs(scenario, K, points):
    """
    pmfs for the prospect game from the scenario's ground model, or a
    zero-mean normal with variance 10 when the ground loads are fixed
    """
    pt = scenario.pt or {}
    pmf = pt.get('pmf', 'auto')
    if isinstance(pmf, dict):
        out = []
        for st in scenario.stations[:scenario.m]:
            if st.id not in pmf:
                raise ValidationError('options.pt.pmf', 'no pmf for %s' % st.id)
            out.append(stochastic.Pmf(np.asarray(pmf[st.id]['support'], dtype=float),
                                      np.asarray(pmf[st.id]['probs'], dtype=float)))
        return out

    model = stochastic.GroundModel.from_document(scenario)
    if model.kind == 'fixed':
        model = stochastic.GroundModel.normal(np.zeros(scenario.m),
                                              np.repeat(10.0, scenario.m), K=K)
    return stochastic.discretize(model, K=K, points=points)


def has_params(scenario):
    pt = scenario.pt or {}
    return all(key in pt for key in ('c', 'c1', 'c2', 'c3'))


def scenario_params(scenario):
    if has_params(scenario):
        pt = scenario.pt
        return prospect.PTParams(pt['c'], pt['c1'], pt['c2'], pt['c3']).check()
    return prospect.PRESETS['E']


def cell_params(base, cell):
    """
    PTParams of a prospect cell: the named preset, or the scenario's own
    attitude for preset 'scenario', with the cell's distortion c
    """
    if cell['preset'] == 'scenario':
        params = scenario_params(base)
    else:
        params = prospect.PRESETS[cell['preset']]
    return params._replace(c=cell['c'])


# sweep cells
# -----------------------------------------------------------------------------
def _sized(scenario, n):
    return scenario if n is None or n == scenario.n else scenario.with_fleet(n)


def _balance_columns(scenario, profile):
    rep = analysis.balance_report(scenario, profile)
    return {'v0_all': rep.v0_all, 'vne_all': rep.vne_all,
            'v0_bad': rep.v0_bad, 'vne_bad': rep.vne_bad,
            'improvement_percent': rep.improvement_percent,
            'total_induced_load': rep.total_induced_load,
            'balance_bound_ok': rep.balance_bound_ok,
            'good_stay_good': rep.good_stay_good}


def _poa_cell(base, cell, config):
    n, k, lat = cell['n'], cell['pricing_k'], cell['latency']
    scenario = _sized(base, n).with_pricing(k).with_latency(LATENCY[lat])
    scenario = scenario.with_skip(cell['skip_charging'])
    mode = 'exact' if scenario.is_quadratic() else 'approximate'
    report = analysis.bound_report(scenario, mode=mode, starts=config.starts,
                                   seed=config.seed or 0, eps=config.eps,
                                   max_rounds=config.max_rounds,
                                   budget=config.budget, workers=1)
    row = {'ne_mode': mode, 'opt': report.opt, 'ne_worst': report.ne_worst,
           'ne_best': report.ne_best, 'num_ne': report.num_ne,
           'poa': report.poa_empirical, 'poa_bound': report.poa_bound,
           'pos': report.pos_empirical, 'pos_bound': report.pos_bound,
           'unit_cost': report.unit_cost_assumption_holds}
    row.update(_balance_columns(scenario, report.worst_profile))
    return row


def _balance_cell(base, cell, config):
    scenario = _sized(base, cell['n']).with_pricing(cell['pricing_k'])
    scenario = scenario.with_skip(cell['skip_charging'])
    trace = equilibrium.run_best_response_dynamics(Profile.initial(scenario),
                                                   eps=config.eps,
                                                   max_rounds=config.max_rounds)
    row = {'moves': trace.num_moves, 'rounds': trace.rounds,
           'social_cost': costs.social_cost(trace.profile)}
    row.update(_balance_columns(scenario, trace.profile))
    return row


def _ne_cell(base, cell, config):
    scenario = _sized(base, cell['n'])
    if config.mode == 'ne':
        trace = equilibrium.run_best_response_dynamics(
            Profile.initial(scenario), eps=config.eps,
            max_rounds=config.max_rounds)
        return {'moves': trace.num_moves, 'rounds': trace.rounds,
                'social_cost': costs.social_cost(trace.profile),
                'potential': costs.potential(trace.profile)}
    if config.mode == 'enumerate':
        ne = equilibrium.enumerate_ne(scenario, budget=config.budget, workers=1)
        social = [costs.social_cost(p) for p in ne]
        return {'num_ne': len(ne),
                'ne_worst': max(social) if social else np.nan,
                'ne_best': min(social) if social else np.nan}
    profile, opt = analysis.social_optimum(scenario, budget=config.budget,
                                           seed=config.seed or 0, workers=1)
    return {'opt': opt}


def _pt_cell(base, cell, config):
    scenario = _sized(base, cell['n'])
    params = cell_params(base, cell)
    pmfs = default_pmfs(scenario, config.K, config.points)
    trace = prospect.pt_best_response_dynamics(Profile.initial(scenario), pmfs,
                                               params, eps=config.eps,
                                               max_rounds=config.max_rounds,
                                               seed=config.seed)
    _, opt = analysis.social_optimum(scenario, budget=config.budget,
                                     seed=config.seed, workers=1)
    social = costs.social_cost(trace.profile)
    residual_sq, induced, abs_loads = prospect.induced_load_summary(trace.profile)
    return {'c1': params.c1, 'c2': params.c2, 'c3': params.c3,
            'moves': trace.num_moves, 'social_cost': social, 'opt': opt,
            'poa': social/opt if opt > 0.0 else np.nan,
            'residual_sq': residual_sq, 'total_induced_load': induced,
            'sum_abs_loads': abs_loads}


def _hoeffding_cell(base, cell, config):
    if base is None:
        moments = (np.zeros(3), np.repeat(10.0, 3))
    else:
        moments = stochastic.GroundModel.from_document(base).moments()
    n = stochastic.hoeffding_fleet_size(moments, config.K, config.fail_eps)
    return {'m': len(moments[0]), 'K': config.K, 'fail_eps': config.fail_eps,
            'fleet_size': n}


def _monte_carlo_cell(base, cell, config):
    model = stochastic.GroundModel.from_document(base)
    n = cell['n']
    if n is None:
        n = stochastic.hoeffding_fleet_size(model.moments(), model.K,
                                            config.fail_eps)
    report = stochastic.monte_carlo_guarantee(base, model, n,
                                              trials=config.trials,
                                              seed=config.seed,
                                              eps=config.fail_eps, workers=1)
    return {'fleet_size': n, 'trials': report.trials, 'exceed': report.exceed,
            'frequency': report.frequency, 'ci_low': report.ci_low,
            'ci_high': report.ci_high, 'fail_eps': config.fail_eps}


CELL_RUNNERS = {'poa': _poa_cell, 'pos': _poa_cell, 'balance': _balance_cell,
                'ne': _ne_cell, 'enumerate': _ne_cell, 'optimum': _ne_cell,
                'pt': _pt_cell, 'hoeffding': _hoeffding_cell,
                'monte-carlo': _monte_carlo_cell}


def sweep_cells(config, base):
    fleet = config.fleet or [None]
    skip = config.skip or ([base.skip_charging] if base is not None else [False])
    if config.mode in ('poa', 'pos'):
        pricing = config.pricing or [2.0]
        latency = config.latency or ['linear']
        return [{'n': n, 'pricing_k': float(k), 'latency': lat,
                 'skip_charging': bool(s)}
                for n, k, lat, s in itertools.product(fleet, pricing, latency,
                                                      skip)]
    if config.mode == 'balance':
        pricing = config.pricing or [2.0]
        return [{'n': n, 'pricing_k': float(k), 'skip_charging': bool(s)}
                for n, k, s in itertools.product(fleet, pricing, skip)]
    if config.mode == 'pt':
        # distortion sweeps keep the scenario's own attitude when it has one
        own = 'scenario' if has_params(base) else 'E'
        cells = []
        for n in fleet:
            for name in config.presets:
                cells.append({'n': n, 'preset': name,
                              'c': prospect.PRESETS[name].c})
            for c in config.distortion:
                cells.append({'n': n, 'preset': own, 'c': float(c)})
            if not config.presets and not config.distortion:
                cells.append({'n': n, 'preset': own,
                              'c': scenario_params(base).c})
        return cells
    if config.mode == 'hoeffding':
        return [{}]
    return [{'n': n} for n in fleet]


def _run_cell(task):
    base, cell, config = task
    row = dict(cell)
    if row.get('n') is None and base is not None and 'n' in row:
        row['n'] = base.n
    start = time.perf_counter()
    try:
        row.update(CELL_RUNNERS[config.mode](base, cell, config))
        row['status'] = 'OK'
    except EvrouteError as err:
        LOG.warning('cell %s failed: %s', cell, err)
        row['status'] = err.code
    return row, time.perf_counter() - start


def _cell_key(row):
    return tuple((k, str(row.get(k))) for k in CELL_KEYS)


def run_experiment(config):
    """
    Run every cell of the configured sweep and write results.csv,
    timings.csv and the plot files into config.out.

    Returns
    -------
    pandas.DataFrame
        one row per cell, sorted by cell key
    """
    config.check()
    base = load_scenario(config.scenario) if config.scenario else None

    cells = sweep_cells(config, base)
    if len(cells) > config.max_cells:
        raise BudgetExceededError('%d sweep cells exceed the limit %d'
                                  % (len(cells), config.max_cells))
    LOG.info('running %d cells in mode %s', len(cells), config.mode)

    outputs = parallel_map(_run_cell, [(base, cell, config) for cell in cells],
                           config.workers)
    order = sorted(range(len(outputs)), key=lambda k: _cell_key(outputs[k][0]))

    results = pd.DataFrame([dict(outputs[k][0], mode=config.mode) for k in order])
    timings = pd.DataFrame([dict({key: outputs[k][0].get(key)
                                  for key in CELL_KEYS
                                  if key in outputs[k][0]},
                                 seconds=outputs[k][1]) for k in order])

    os.makedirs(config.out, exist_ok=True)
    results.to_csv(os.path.join(config.out, 'results.csv'), index=False,
                   float_format=FLOAT_FORMAT)
    timings.to_csv(os.path.join(config.out, 'timings.csv'), index=False,
                   float_format='%.6f')
    emit_plot_data(results, config.out)
    return results


def _write_family(path, header, frame):
    with open(path, 'w') as fh:
        fh.write('# %s\n' % header)
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT)


def emit_plot_data(results, out):
    """
    one tidy file per figure family present in the results
    """
    written = []
    if 'poa' in results and 'latency' in results:
        path = os.path.join(out, 'poa_vs_n.csv')
        _write_family(path, 'x=n series=pricing_k,latency,skip_charging y=poa',
                      results[['n', 'pricing_k', 'latency', 'skip_charging',
                               'poa']])
        written.append(path)
    if 'improvement_percent' in results and 'pricing_k' in results:
        path = os.path.join(out, 'balance.csv')
        _write_family(path, 'x=n series=pricing_k y=improvement_percent '
                            '(100*(V0-VNE)/V0, all stations)',
                      results[['n', 'pricing_k', 'improvement_percent']])
        written.append(path)
    if 'preset' in results:
        path = os.path.join(out, 'pt.csv')
        _write_family(path, 'x=preset,c y=poa,total_induced_load '
                            '(sum |L_j|), residual_sq (sum (g-L)^2), '
                            'sum_abs_loads (sum |l_i|)',
                      results[['preset', 'c', 'poa', 'total_induced_load',
                               'residual_sq', 'sum_abs_loads']])
        written.append(path)
    return written


# single shot verbs
# -----------------------------------------------------------------------------
def _emit(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, 'result.json'), 'w') as fh:
            fh.write(text + '\n')
    else:
        print(text)


def _profile_doc(profile):
    return {'actions': profile.describe(),
            'social_cost': costs.social_cost(profile),
            'potential': costs.potential(profile)}


def _eps(args):
    return 1e-6 if args.eps is None else args.eps


def _flag(text):
    value = text.strip().lower()
    if value in ('yes', 'true', 'on', '1'):
        return True
    if value in ('no', 'false', 'off', '0'):
        return False
    raise argparse.ArgumentTypeError('expected yes or no, got %r' % text)


def _budget(args):
    return equilibrium.ENUMERATION_BUDGET if args.budget is None else args.budget


def cmd_validate(args):
    scenario = load_scenario(args.scenario)
    _emit({'nodes': len(scenario.nodes), 'edges': len(scenario.edges),
           'stations': scenario.m, 'evs': scenario.n,
           'paths': {ev.id: [list(scenario.path_ids(p))
                             for p in scenario.paths(i)]
                     for i, ev in enumerate(scenario.evs)}}, args.out)


def cmd_solve(args):
    scenario = load_scenario(args.scenario)
    trace = equilibrium.run_best_response_dynamics(
        Profile.initial(scenario), eps=_eps(args), max_rounds=args.max_rounds,
        order=args.order, seed=args.seed)
    doc = _profile_doc(trace.profile)
    doc.update({'moves': trace.num_moves, 'rounds': trace.rounds,
                'converged': trace.converged})
    _emit(doc, args.out)


def cmd_enumerate(args):
    scenario = load_scenario(args.scenario)
    ne = equilibrium.enumerate_ne(scenario, budget=_budget(args),
                                  workers=args.workers)
    _emit({'equilibria': [_profile_doc(p) for p in ne]}, args.out)


def cmd_optimum(args):
    scenario = load_scenario(args.scenario)
    profile, _ = analysis.social_optimum(scenario, budget=_budget(args),
                                         seed=args.seed or 0,
                                         workers=args.workers)
    _emit(_profile_doc(profile), args.out)


def cmd_report(args):
    scenario = load_scenario(args.scenario)
    report = analysis.bound_report(scenario, mode=args.mode,
                                   seed=args.seed or 0, eps=_eps(args),
                                   budget=_budget(args), workers=args.workers,
                                   check=False)
    doc = {key: getattr(report, key) for key in
           ('mode', 'n', 'opt', 'ne_worst', 'ne_best', 'num_ne',
            'poa_empirical', 'poa_bound', 'pos_empirical', 'pos_bound',
            'unit_cost_assumption_holds', 'fleet_poa_limit')}
    bal = analysis.balance_report(scenario, report.worst_profile)
    doc['balance'] = {'residuals': bal.residuals.tolist(),
                      'bad': bal.bad.tolist(), 'mu': bal.mu.tolist(),
                      'v0_all': bal.v0_all, 'vne_all': bal.vne_all,
                      'v0_bad': bal.v0_bad, 'vne_bad': bal.vne_bad,
                      'balance_bound_ok': bal.balance_bound_ok,
                      'good_stay_good': bal.good_stay_good}
    _emit(doc, args.out)


def _config_from_args(args, mode):
    overrides = {'scenario': args.scenario, 'mode': mode, 'seed': args.seed,
                 'out': args.out, 'eps': args.eps, 'budget': args.budget,
                 'workers': args.workers}
    for key in ('fleet', 'pricing', 'latency', 'skip', 'presets', 'distortion',
                'trials', 'K', 'fail_eps', 'max_rounds', 'starts'):
        overrides[key] = getattr(args, key, None)
    if getattr(args, 'config', None):
        return ExperimentConfig.from_file(args.config, **overrides)
    defaults = {k: v for k, v in overrides.items() if v is not None}
    return ExperimentConfig(**defaults)


def cmd_experiment(mode):
    def run(args):
        sweep_mode = getattr(args, 'sweep_mode', None) or mode
        config = _config_from_args(args, sweep_mode)
        results = run_experiment(config)
        failed = int(np.sum(results['status'] != 'OK')) if len(results) else 0
        if failed:
            LOG.warning('%d of %d cells failed', failed, len(results))
            return EXIT_CELL_FAILURES
        return EXIT_OK
    return run


# entry point
# -----------------------------------------------------------------------------
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--out', default=None)
    common.add_argument('--budget', type=int, default=None)
    common.add_argument('--eps', type=float, default=None)
    common.add_argument('--workers', type=int, default=None,
                        help='process pool size, EVROUTE_WORKERS otherwise')

    parser = argparse.ArgumentParser(
        prog='evroute',
        description='routing and charging game of electric vehicles')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    sub = parser.add_subparsers(dest='verb', required=True)

    p = sub.add_parser('validate', parents=[common])
    p.add_argument('scenario')
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('solve', parents=[common])
    p.add_argument('scenario')
    p.add_argument('--max-rounds', dest='max_rounds', type=int, default=1000)
    p.add_argument('--order', choices=['round-robin', 'random'],
                   default='round-robin')
    p.set_defaults(func=cmd_solve)

    for verb, func in (('enumerate', cmd_enumerate), ('optimum', cmd_optimum)):
        p = sub.add_parser(verb, parents=[common])
        p.add_argument('scenario')
        p.set_defaults(func=func)

    p = sub.add_parser('report', parents=[common])
    p.add_argument('scenario')
    p.add_argument('--mode', choices=['exact', 'approximate'], default='exact')
    p.set_defaults(func=cmd_report)

    p = sub.add_parser('sweep', parents=[common])
    p.add_argument('scenario', nargs='?')
    p.add_argument('--config')
    p.add_argument('--mode', dest='sweep_mode',
                   choices=['poa', 'pos', 'balance', 'ne', 'enumerate',
                            'optimum'], default=None)
    p.add_argument('--fleet', type=int, nargs='+')
    p.add_argument('--pricing', type=float, nargs='+')
    p.add_argument('--latency', nargs='+', choices=sorted(LATENCY))
    p.add_argument('--skip', type=_flag, nargs='+',
                   help='skip-charging option values, e.g. --skip no yes')
    p.add_argument('--starts', type=int)
    p.add_argument('--max-rounds', dest='max_rounds', type=int)
    p.set_defaults(func=cmd_experiment(None))

    p = sub.add_parser('hoeffding', parents=[common])
    p.add_argument('scenario', nargs='?')
    p.add_argument('--K', type=float)
    p.add_argument('--fail-eps', dest='fail_eps', type=float)
    p.set_defaults(func=cmd_experiment('hoeffding'))

    p = sub.add_parser('montecarlo', parents=[common])
    p.add_argument('scenario')
    p.add_argument('--config')
    p.add_argument('--fleet', type=int, nargs='+')
    p.add_argument('--trials', type=int)
    p.add_argument('--fail-eps', dest='fail_eps', type=float)
    p.set_defaults(func=cmd_experiment('monte-carlo'))

    p = sub.add_parser('pt', parents=[common])
    p.add_argument('scenario')
    p.add_argument('--config')
    p.add_argument('--fleet', type=int, nargs='+')
    p.add_argument('--presets', nargs='+')
    p.add_argument('--distortion', type=float, nargs='+')
    p.add_argument('--K', type=float)
    p.set_defaults(func=cmd_experiment('pt'))

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')

    try:
        code = args.func(args)
    except ValidationError as err:
        LOG.error('rejected: %s', err)
        return EXIT_VALIDATION
    except (BudgetExceededError, PathExplosionError) as err:
        LOG.error('%s: %s', err.code, err)
        return EXIT_BUDGET
    except EvrouteError as err:
        LOG.error('%s: %s', err.code, err)
        return EXIT_ERROR
    return EXIT_OK if code is None else code


if __name__ == '__main__':
    sys.exit(main())
