# prospect theoretic variant of the game
import math
import logging
from typing import NamedTuple

import numpy as np

from evroute import costs
from evroute.equilibrium import (DeviationContext, Move, improvement_dynamics,
                                 _better)
from evroute.model import Action
from evroute.utils import (minimize_bounded, ValidationError, NotConvergedError,
                           UnsupportedPricingError)

LOG = logging.getLogger(__name__)


class PTParams(NamedTuple):
    """probability distortion c, gain curvature c1, loss aversion c2, loss
    curvature c3"""
    c: float
    c1: float
    c2: float
    c3: float

    def check(self):
        if not 0.0 < self.c <= 1.0:
            raise ValidationError('pt.c', 'must lie in (0, 1]')
        if not 0.0 < self.c1 <= 1.0:
            raise ValidationError('pt.c1', 'must lie in (0, 1]')
        if not self.c2 > 0.0:
            raise ValidationError('pt.c2', 'must be > 0')
        if not 0.0 < self.c3 <= 1.0:
            raise ValidationError('pt.c3', 'must lie in (0, 1]')
        return self


PRESETS = {
    'A': PTParams(0.75, 0.68, 2.54, 0.74),
    'B': PTParams(0.75, 0.81, 1.07, 0.80),
    'C': PTParams(0.75, 0.71, 1.38, 0.72),
    'D': PTParams(0.75, 0.86, 1.61, 1.06),
    'E': PTParams(0.75, 0.88, 2.25, 0.88),
    'neutral': PTParams(1.0, 1.0, 1.0, 1.0),
}


def distortion_sweep(values, base='E'):
    """PTParams with c taken from values and the rest from a preset"""
    return [PRESETS[base]._replace(c=float(c)) for c in values]


def prelec_weight(p, c):
    """exp(-(-ln p)^c), with w(0) = 0"""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide='ignore'):
        w = np.exp(-(-np.log(p))**c)
    w = np.where(p <= 0.0, 0.0, w)
    return float(w) if w.ndim == 0 else w


def tversky_value(z, z_r, params):
    """
    (z - z_r)^c1 on gains, -c2 (z_r - z)^c3 on losses
    """
    x = np.asarray(z, dtype=float) - z_r
    mag = np.abs(x)
    v = np.where(x >= 0.0, mag**params.c1, -params.c2*mag**params.c3)
    return float(v) if v.ndim == 0 else v


def _params_for(params, i):
    return params if isinstance(params, PTParams) else params[i]


def reference_price(profile, i):
    """marginal price of EV i if its station had zero ground load"""
    action = profile.actions[i]
    station = profile.scenario.stations[action.station]
    if station.virtual:
        return 0.0
    rest = costs.others_load(profile, i)
    return float(costs.pricing(station, rest + action.load) -
                 costs.pricing(station, rest))


def price_outcome(profile, i, theta):
    """marginal price of EV i when its station's ground load is theta"""
    action = profile.actions[i]
    station = profile.scenario.stations[action.station]
    theta = np.asarray(theta, dtype=float)
    if station.virtual:
        return np.zeros_like(theta) if theta.ndim else 0.0
    base = costs.others_load(profile, i) - theta
    out = costs.pricing(station, base + action.load) - costs.pricing(station, base)
    return float(out) if np.ndim(out) == 0 else out


def prospect_displacement(l, theta):
    """price outcome minus reference price under quadratic pricing"""
    return -2.0*l*np.asarray(theta, dtype=float)


def _weighted_value(x, pmf, params):
    """sum over outcomes of w(h(theta)) v(x(theta)); x is (..., outcomes)"""
    w = prelec_weight(pmf.probs, params.c)
    return np.sum(w*tversky_value(x, 0.0, params), axis=-1)


def expected_prospect(profile, i, pmfs, params, reduced=True):
    """
    Prospect of EV i's energy price over its station's ground load pmf,
    relative to the reference price. reduced uses the quadratic pricing
    displacement; otherwise the price outcomes are evaluated directly.
    """
    action = profile.actions[i]
    station = profile.scenario.stations[action.station]
    if station.virtual:
        return 0.0
    params = _params_for(params, i)
    pmf = pmfs[action.station]

    if reduced:
        if station.k != 2.0:
            raise UnsupportedPricingError('reduced prospect needs quadratic '
                                          'pricing, got k=%g' % station.k)
        x = prospect_displacement(action.load, pmf.support)
    else:
        x = price_outcome(profile, i, pmf.support) - reference_price(profile, i)
    return float(_weighted_value(x, pmf, params))


def pt_cost(profile, i, pmfs, params, reduced=True):
    """
    congestion, queueing and battery risk of EV i plus its reference price
    and expected prospect
    """
    base = costs.ev_cost(profile, i)
    return (base.congestion + base.queueing + base.battery_risk +
            reference_price(profile, i) +
            expected_prospect(profile, i, pmfs, params, reduced))


def _check_quadratic(scenario):
    if not scenario.is_quadratic():
        raise UnsupportedPricingError('prospect potential needs quadratic '
                                      'pricing, got k in %s'
                                      % scenario.pricing_exponents())


def pt_potential(profile, pmfs, params):
    """
    Exact potential of the prospect game under quadratic pricing: the
    congestion and queueing parts of the plain potential, battery risk,
    squared station loads and every EV's expected prospect.
    """
    scenario = profile.scenario
    _check_quadratic(scenario)
    if scenario.n == 0:
        return 0.0

    real = slice(0, scenario.m)
    counts = profile.counts[real]
    val = costs._cumulative_latency(scenario, profile.n_e)
    val += np.sum(counts*(counts + 1)/(2.0*scenario.station_sigma[real]))
    val += np.sum(np.log(scenario.ev_hi/(scenario.ev_b + profile.load_vector())))
    val += np.sum(profile.loads[real]**2)
    val += sum(expected_prospect(profile, i, pmfs, params)
               for i in range(scenario.n))
    return float(val)


def pt_load_cost(station, others, l, b, b_hi, pmf, params, reduced=True):
    """
    load dependent part of the prospect cost, vectorized over l
    """
    l = np.asarray(l, dtype=float)
    z_r = costs.pricing(station, others + l) - costs.pricing(station, others)
    if reduced:
        x = prospect_displacement(l[..., None], pmf.support[None, :])
    else:
        base = others - pmf.support[None, :]
        z = (costs.pricing(station, base + l[..., None]) -
             costs.pricing(station, base))
        x = z - z_r[..., None]
    return np.log(b_hi/(b + l)) + z_r + _weighted_value(x, pmf, params)


def pt_best_response(profile, i, pmfs, params, reduced=True):
    """
    best (path, station, load) of EV i under the prospect cost; loads by
    grid search with golden section refinement, since the prospect term is
    not convex in l
    """
    scenario = profile.scenario
    ctx = DeviationContext(profile, i)
    p = _params_for(params, i)
    b, b_hi = scenario.ev_b[i], scenario.ev_hi[i]
    lo, hi = scenario.load_bounds(i)

    best_action = None
    best_cost = math.inf
    for path, j in scenario.options(i):
        station = scenario.stations[j]
        if station.virtual:
            load, energy = 0.0, float(np.log(b_hi/b))
        else:
            load, energy = minimize_bounded(
                lambda x: pt_load_cost(station, ctx.others[j], x, b, b_hi,
                                       pmfs[j], p, reduced),
                lo, hi)
        cost = ctx.fixed_cost(path, j) + energy
        if best_action is None or _better(cost, best_cost):
            best_action = Action(path, j, load)
            best_cost = cost
    return best_action, best_cost


def pt_is_nash(profile, pmfs, params, tol=1e-6):
    worst = None
    worst_gain = tol
    for i in range(profile.scenario.n):
        current = pt_cost(profile, i, pmfs, params)
        action, cost = pt_best_response(profile, i, pmfs, params)
        if current - cost > worst_gain:
            worst_gain = current - cost
            worst = Move(i, profile.actions[i], action, current, cost)
    return worst is None, worst


def pt_best_response_dynamics(initial, pmfs, params, eps=1e-6, max_rounds=1000,
                              order='round-robin', seed=None, strict=True):
    """
    best response dynamics of the prospect game; the prospect potential
    decreases with every move
    """
    _check_quadratic(initial.scenario)
    rng = np.random.default_rng(seed)
    trace = improvement_dynamics(
        initial,
        lambda p, i: pt_best_response(p, i, pmfs, params),
        lambda p, i: pt_cost(p, i, pmfs, params),
        lambda p: pt_potential(p, pmfs, params),
        eps, max_rounds, order, rng)

    LOG.info('prospect dynamics: %d moves in %d rounds, converged=%s',
             trace.num_moves, trace.rounds, trace.converged)
    if not trace.converged:
        LOG.warning('prospect dynamics stopped after %d rounds', trace.rounds)
        if strict:
            raise NotConvergedError(trace)
    return trace


def induced_load_summary(profile):
    """
    (sum of squared residual ground loads, sum of |L_j|, sum of |l_i|) at a
    profile
    """
    scenario = profile.scenario
    real = slice(0, scenario.m)
    residual = scenario.station_g[real] - profile.loads[real]
    return (float(np.sum(residual**2)),
            float(np.sum(np.abs(profile.loads[real]))),
            float(np.sum(np.abs(profile.load_vector()))))
