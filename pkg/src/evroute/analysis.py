# social optimum, efficiency of equilibria and load balance
import math
import logging
from typing import NamedTuple

import numpy as np

from evroute import costs
from evroute import equilibrium
from evroute.model import Action, Profile
from evroute.utils import (stationary_load, minimize_bounded, solve_multiplier,
                           parallel_map, num_workers,
                           NoEquilibriumError, BoundViolationError)

LOG = logging.getLogger(__name__)


class BoundReport(NamedTuple):
    mode: str
    n: int
    opt: float
    ne_worst: float
    ne_best: float
    num_ne: int
    poa_empirical: float
    poa_bound: float
    pos_empirical: float
    pos_bound: float
    unit_cost_assumption_holds: bool
    fleet_poa_limit: float
    opt_profile: Profile
    worst_profile: Profile
    best_profile: Profile


class BalanceReport(NamedTuple):
    residuals: np.ndarray
    bad: np.ndarray
    mu: np.ndarray
    threshold: float
    v0_all: float
    vne_all: float
    v0_bad: float
    vne_bad: float
    total_induced_load: float
    improvement_percent: float
    balance_bound_ok: bool
    good_stay_good: bool


# analytic bounds
# -----------------------------------------------------------------------------
def poa_bound(b_max, g, n):
    if n == 0:
        return math.inf
    return 3.0 + 12.0*b_max**2 + 4.5*float(np.sum(np.square(g)))/n


def pos_bound(b_max, g, n):
    if n == 0:
        return math.inf
    return 2.0*(1.0 + b_max**2) + 2.0*float(np.sum(np.square(g)))/n


def fleet_poa_limit(b_max):
    """PoA level guaranteed once the fleet outweighs the ground loads"""
    return 4.0 + 12.0*b_max**2


# social optimum
# -----------------------------------------------------------------------------
def _station_energy(station, b, b_hi, loads):
    """sum of the members' marginal prices and battery risks"""
    if station.virtual:
        return float(np.sum(np.log(b_hi/b)))
    base = np.sum(loads) - station.g
    price = np.sum(costs.pricing(station, base) -
                   costs.pricing(station, base - loads))
    return float(price + np.sum(np.log(b_hi/(b + loads))))


def _coordinate_descent(station, b, lo, hi, b_hi, loads, tol=1e-10,
                        max_sweeps=500):
    loads = loads.copy()
    g = station.g
    k = station.k
    for _ in range(max_sweeps):
        change = 0.0
        for i in range(loads.size):
            rest = np.delete(loads, i)
            others = np.sum(rest)
            if k == 2.0:
                l = stationary_load(2.0*others - g, b[i])
                l = min(max(l, lo[i]), hi[i])
            else:
                base = others - g

                def f(x, rest=rest, base=base, i=i):
                    x = np.asarray(x, dtype=float)
                    val = (rest.size + 1)*costs.pricing(station, base + x)
                    val -= np.sum(costs.pricing(station,
                                                base + x[:, None] - rest[None, :]),
                                  axis=1)
                    return val + np.log(b_hi[i]/(b[i] + x))

                l, _ = minimize_bounded(f, lo[i], hi[i])
            change = max(change, abs(l - loads[i]))
            loads[i] = l
        if change < tol:
            break
    return loads


def station_optimum(station, members, starts=16, seed=0):
    """
    Minimize the members' total energy cost at one station over their loads.

    The objective is not convex in general, so projected coordinate descent
    runs from both corners of the box, from zero, from the restricted
    equilibrium (quadratic pricing) and from seeded random points.

    Returns
    -------
    (ndarray, float)
        loads and the minimal energy cost
    """
    b = np.array([ev.b for ev in members])
    b_hi = np.array([ev.b_hi for ev in members])
    if station.virtual:
        loads = np.zeros(len(members))
        return loads, _station_energy(station, b, b_hi, loads)

    lo = np.array([ev.b_lo for ev in members]) - b
    hi = b_hi - b

    inits = [lo.copy(), hi.copy(), np.zeros(len(members))]
    if station.k == 2.0:
        inits.append(solve_multiplier(station.g, b, lo, hi))
    rng = np.random.default_rng(seed)
    while len(inits) < starts:
        inits.append(rng.uniform(lo, hi))

    best_loads = None
    best_val = math.inf
    for init in inits:
        loads = _coordinate_descent(station, b, lo, hi, b_hi, init)
        val = _station_energy(station, b, b_hi, loads)
        if val < best_val:
            best_loads, best_val = loads, val
    return best_loads, best_val


def _assignment_cost(scenario, assignment, cache, starts, seed):
    n_e = np.zeros(len(scenario.edges))
    for i, pick in enumerate(assignment):
        for e in scenario.options(i)[pick][0]:
            n_e[e] += 1

    val = float(np.sum(n_e*(scenario.edge_a*n_e**scenario.edge_d +
                            scenario.edge_b)))
    loads = np.zeros(scenario.n)
    for j, mem in enumerate(equilibrium.station_members(scenario, assignment)):
        if not mem:
            continue
        if not scenario.station_virtual[j]:
            val += len(mem)**2/scenario.station_sigma[j]
        order = sorted(mem, key=lambda i: scenario.ev_class[i])
        key = (j, tuple(int(scenario.ev_class[i]) for i in order))
        if key not in cache:
            cache[key] = station_optimum(scenario.stations[j],
                                         [scenario.evs[i] for i in order],
                                         starts, seed)
        station_loads, energy = cache[key]
        loads[order] = station_loads
        val += energy
    return val, loads


def _optimum_chunk(task):
    scenario, chunk, starts, seed = task
    cache = {}
    best = None
    for assignment in chunk:
        val, loads = _assignment_cost(scenario, assignment, cache, starts, seed)
        if best is None or val < best[0]:
            best = (val, assignment, loads)
    return best


def social_optimum(scenario, budget=equilibrium.ENUMERATION_BUDGET,
                   reduce_symmetry=True, starts=16, seed=0, workers=None):
    """
    Brute force social optimum: every discrete assignment with its
    per-station continuous optimum.

    Returns
    -------
    (Profile, float)
        optimal profile and its social cost
    """
    count = equilibrium.check_budget(scenario, budget, reduce_symmetry)
    LOG.info('social optimum over %d assignments', count)

    items = list(equilibrium.assignments(scenario, reduce_symmetry))
    chunks = equilibrium._chunks(items, 4*num_workers(workers))
    parts = parallel_map(_optimum_chunk,
                         [(scenario, c, starts, seed) for c in chunks], workers)

    best = None
    for part in parts:
        if part is not None and (best is None or part[0] < best[0]):
            best = part

    _, assignment, loads = best
    actions = [Action(*scenario.options(i)[pick], float(loads[i]))
               for i, pick in enumerate(assignment)]
    profile = Profile(scenario, actions, check=False)
    return profile, costs.social_cost(profile)


# price of anarchy and stability
# -----------------------------------------------------------------------------
def equilibrium_set(scenario, mode='exact', starts=64, seed=0, eps=1e-6,
                    max_rounds=1000, budget=equilibrium.ENUMERATION_BUDGET,
                    workers=None):
    if mode == 'exact':
        ne = equilibrium.enumerate_ne(scenario, budget=budget, workers=workers)
    elif mode == 'approximate':
        traces = equilibrium.multi_start_dynamics(scenario, starts=starts,
                                                  seed=seed, eps=eps,
                                                  max_rounds=max_rounds,
                                                  workers=workers)
        ne = equilibrium.distinct_terminals(traces)
    else:
        raise ValueError('unknown mode %r' % mode)
    if not ne:
        raise NoEquilibriumError('no equilibrium found in %s mode' % mode)
    return ne


def bound_report(scenario, mode='exact', starts=64, seed=0, eps=1e-6,
                 max_rounds=1000, budget=equilibrium.ENUMERATION_BUDGET,
                 opt_starts=16, workers=None, check=True):
    """
    Empirical price of anarchy and stability next to their analytic bounds.

    In 'approximate' mode the equilibria come from multi-start dynamics and
    the reported PoA is a lower bound on the true one. With check, a bound
    violation under linear latency, quadratic pricing and unit costs raises
    BoundViolationError.
    """
    opt_profile, opt = social_optimum(scenario, budget=budget,
                                      starts=opt_starts, seed=seed,
                                      workers=workers)
    ne = equilibrium_set(scenario, mode=mode, starts=starts, seed=seed,
                         eps=eps, max_rounds=max_rounds, budget=budget,
                         workers=workers)

    ne_costs = [costs.social_cost(p) for p in ne]
    worst = int(np.argmax(ne_costs))
    best = int(np.argmin(ne_costs))

    _, b_max = scenario.fleet_bounds()
    g = scenario.station_g[:scenario.m]
    n = scenario.n

    if opt > 0.0:
        poa = ne_costs[worst]/opt
        pos = ne_costs[best]/opt
    else:
        poa = pos = math.nan

    report = BoundReport(mode, n, opt, ne_costs[worst], ne_costs[best],
                         len(ne), poa, poa_bound(b_max, g, n),
                         pos, pos_bound(b_max, g, n), bool(opt >= n),
                         fleet_poa_limit(b_max),
                         opt_profile, ne[worst], ne[best])

    LOG.info('n=%d: OPT %.6g, %d equilibria, PoA %.6g (bound %.6g), '
             'PoS %.6g (bound %.6g)', n, opt, len(ne), poa,
             report.poa_bound, pos, report.pos_bound)
    if not report.unit_cost_assumption_holds:
        LOG.warning('unit cost assumption fails: OPT %.6g < n=%d', opt, n)

    if check and report.unit_cost_assumption_holds and \
            scenario.is_linear() and scenario.is_quadratic():
        if poa > report.poa_bound:
            raise BoundViolationError('PoA %.6g above bound %.6g'
                                      % (poa, report.poa_bound))
        if pos > report.pos_bound:
            raise BoundViolationError('PoS %.6g above bound %.6g'
                                      % (pos, report.pos_bound))
    return report


def price_of_anarchy(scenario, **kwargs):
    """worst equilibrium over the optimum, as a full BoundReport"""
    return bound_report(scenario, **kwargs)


def price_of_stability(scenario, **kwargs):
    """best equilibrium over the optimum, as a full BoundReport"""
    return bound_report(scenario, **kwargs)


# load balance
# -----------------------------------------------------------------------------
def balance_mu(g, size, b, b_min, b_max):
    """
    reference balance term of a bad station: clamp at the battery floor,
    clamp at the capacity, or half the ground load
    """
    if size == 0:
        return 0.0
    if g <= (2*size - 1)*(b_min - b) - 1.0/(2.0*b_min):
        return size*(b_min - b)
    if g >= (2*size - 1)*(b_max - b) + 1.0/(2.0*b_max):
        return size*(b_max - b)
    return 0.5*g


def balance_report(scenario, ne):
    """
    Residual imbalance g - L of every station at an equilibrium, the
    good/bad classification and the balance guarantees for both groups.
    """
    m = scenario.m
    g = scenario.station_g[:m]
    loads = ne.loads[:m]
    residuals = g - loads

    b_min, b_max = scenario.fleet_bounds()
    threshold = math.sqrt(5.0)/(2.0*b_min)
    bad = np.abs(g) > threshold

    mu = np.zeros(m)
    for j in np.flatnonzero(bad):
        mem = ne.members[j]
        if not mem:
            continue
        b = float(np.mean(scenario.ev_b[list(mem)]))
        mu[j] = balance_mu(g[j], len(mem), b, b_min, b_max)

    v0_all = float(np.sum(g**2))
    vne_all = float(np.sum(residuals**2))
    v0_bad = float(np.sum(g[bad]**2))
    vne_bad = float(np.sum(residuals[bad]**2))

    target = v0_bad - float(np.sum(mu**2))
    occupied = any(ne.members[j] for j in np.flatnonzero(bad))
    bound_ok = vne_bad < target if occupied else vne_bad <= target + 1e-12

    good_ok = bool(np.all(residuals[~bad]**2 <= 5.0/(4.0*b_min**2) + 1e-12))

    improvement = 100.0*(v0_all - vne_all)/v0_all if v0_all > 0.0 else 0.0

    return BalanceReport(residuals, bad, mu, threshold, v0_all, vne_all,
                         v0_bad, vne_bad, float(np.sum(np.abs(loads))),
                         improvement, bool(bound_ok), good_ok)
