# best response dynamics, Nash verification and equilibrium enumeration
import math
import logging
import itertools
from typing import NamedTuple

import numpy as np

from evroute import costs
from evroute.model import Action, Profile
from evroute.utils import (minimize_bounded, stationary_load, solve_multiplier,
                           parallel_map, num_workers,
                           NotConvergedError, NoConvergenceError,
                           BudgetExceededError, UnsupportedPricingError)

LOG = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10**7


class Move(NamedTuple):
    mover: int
    old: Action
    new: Action
    phi_before: float
    phi_after: float


class DynamicsTrace:
    """
    record of one best response run: improving moves in order, terminal
    profile and whether a full round passed without a move
    """
    def __init__(self, moves, profile, converged, eps, rounds):
        self.moves = moves
        self.profile = profile
        self.converged = converged
        self.eps = eps
        self.rounds = rounds

    @property
    def iterations(self):
        return self.moves

    @property
    def num_moves(self):
        return len(self.moves)


# best response
# -----------------------------------------------------------------------------
def optimize_load_1d(g, others, k, b, b_lo, b_hi):
    """
    Minimize the load dependent cost of one EV at a station.

    Parameters
    ----------
    g : float
        ground load of the station
    others : float
        aggregate load of the other members
    k : float
        pricing exponent
    b, b_lo, b_hi : float
        battery level, floor and capacity of the EV

    Returns
    -------
    float
        optimal load in [b_lo - b, b_hi - b]
    """
    lo = b_lo - b
    hi = b_hi - b
    assert lo <= hi

    if k == 2.0:
        l = stationary_load(others - g, b)
        return min(max(l, lo), hi)

    x, _ = minimize_bounded(lambda l: costs.load_cost(k, g, others, l, b, b_hi),
                            lo, hi)
    return x


class DeviationContext:
    """
    occupancy seen by EV i when everyone else keeps their action, used to
    price candidate actions without rebuilding the profile
    """
    def __init__(self, profile, i):
        scenario = profile.scenario
        action = profile.actions[i]

        self.scenario = scenario
        self.i = i
        self.n_e = profile.n_e.copy()
        for e in action.path:
            self.n_e[e] -= 1
        self.counts = profile.counts.copy()
        self.counts[action.station] -= 1

        self.others = np.zeros(len(scenario.stations))
        for k, a in enumerate(profile.actions):
            if k != i:
                self.others[a.station] += a.load

    def fixed_cost(self, path, j):
        """congestion and queueing after joining (path, j)"""
        scenario = self.scenario
        congestion = costs.path_latency(scenario, path, self.n_e + 1)
        return congestion + costs.queue_delay(scenario, j, self.counts[j] + 1)

    def energy_cost(self, j, load):
        scenario = self.scenario
        i = self.i
        st = scenario.stations[j]
        if st.virtual:
            return float(costs.battery_risk(scenario, i, 0.0))
        return float(costs.load_cost(st.k, st.g, self.others[j], load,
                                     scenario.ev_b[i], scenario.ev_hi[i]))

    def best_load(self, j):
        scenario = self.scenario
        i = self.i
        st = scenario.stations[j]
        if st.virtual:
            return 0.0
        return optimize_load_1d(st.g, self.others[j], st.k, scenario.ev_b[i],
                                scenario.ev_lo[i], scenario.ev_hi[i])


def _better(cost, best_cost):
    return cost < best_cost - 1e-12*max(1.0, abs(best_cost))


def best_response(profile, i):
    """
    Best (path, station, load) of EV i against the rest of the profile.

    Candidates are visited in lexicographic (path, station) order and only a
    strictly cheaper candidate replaces the incumbent.

    Returns
    -------
    (Action, float)
        best action and its cost
    """
    ctx = DeviationContext(profile, i)
    best_action = None
    best_cost = math.inf
    for path, j in profile.scenario.options(i):
        load = ctx.best_load(j)
        cost = ctx.fixed_cost(path, j) + ctx.energy_cost(j, load)
        if best_action is None or _better(cost, best_cost):
            best_action = Action(path, j, load)
            best_cost = cost
    return best_action, best_cost


# dynamics
# -----------------------------------------------------------------------------
def improvement_dynamics(initial, respond, current_cost, potential, eps,
                         max_rounds, order, rng):
    """
    Generic improvement loop shared by the plain and the prospect game:
    respond(profile, i) gives (action, cost), current_cost(profile, i) the
    cost of the current action.
    """
    assert eps > 0.0
    profile = initial
    moves = []
    converged = False
    rounds = 0
    n = profile.scenario.n

    while rounds < max_rounds:
        rounds += 1
        sequence = range(n) if order == 'round-robin' else rng.permutation(n)
        moved = False
        for i in sequence:
            i = int(i)
            action, cost = respond(profile, i)
            if current_cost(profile, i) - cost > eps:
                phi_before = potential(profile)
                old = profile.actions[i]
                profile = profile.replace(i, action)
                phi_after = potential(profile)
                moves.append(Move(i, old, action, phi_before, phi_after))
                LOG.debug('round %d: ev %d moved, potential %.10g -> %.10g',
                          rounds, i, phi_before, phi_after)
                moved = True
        if not moved:
            converged = True
            break

    return DynamicsTrace(moves, profile, converged, eps, rounds)


def run_best_response_dynamics(initial, eps=1e-6, max_rounds=1000,
                               order='round-robin', seed=None, strict=True):
    """
    Asynchronous best response dynamics: an EV moves only when its cost
    drops by more than eps; stops after a round without moves.
    """
    assert order in ('round-robin', 'random')
    rng = np.random.default_rng(seed)
    trace = improvement_dynamics(initial, best_response,
                                 lambda p, i: costs.ev_cost(p, i).total,
                                 costs.potential, eps, max_rounds, order, rng)

    LOG.info('dynamics: %d moves in %d rounds, converged=%s',
             trace.num_moves, trace.rounds, trace.converged)
    if not trace.converged:
        LOG.warning('dynamics stopped after %d rounds', trace.rounds)
        if strict:
            raise NotConvergedError(trace)
    return trace


def is_nash(profile, tol=1e-6, first_only=False):
    """
    Check that no EV gains more than tol by a unilateral deviation.

    Returns
    -------
    (bool, Move or None)
        verdict and the most profitable deviation found, phi fields holding
        the deviator's current and deviation cost
    """
    worst = None
    worst_gain = tol
    for i in range(profile.scenario.n):
        current = costs.ev_cost(profile, i).total
        action, cost = best_response(profile, i)
        gain = current - cost
        if gain > worst_gain:
            worst_gain = gain
            worst = Move(i, profile.actions[i], action, current, cost)
            if first_only:
                break
    return worst is None, worst


def multi_start_dynamics(scenario, starts=64, seed=0, eps=1e-6,
                         max_rounds=1000, order='round-robin', workers=None):
    """
    dynamics from seeded uniform initial (path, station) choices with zero
    loads; one derived generator per start
    """
    children = np.random.SeedSequence(seed).spawn(starts)
    tasks = [(scenario, child, eps, max_rounds, order) for child in children]
    traces = parallel_map(_run_start, tasks, workers)
    LOG.info('multi-start: %d runs, %d distinct terminals', len(traces),
             len(distinct_terminals(traces)))
    return traces


def _run_start(task):
    scenario, child, eps, max_rounds, order = task
    rng = np.random.default_rng(child)
    initial = Profile.random(scenario, rng)
    return run_best_response_dynamics(initial, eps=eps, max_rounds=max_rounds,
                                      order=order,
                                      seed=int(rng.integers(2**31)),
                                      strict=False)


def distinct_terminals(traces):
    """converged terminal profiles, deduplicated in start order"""
    seen = set()
    profiles = []
    for trace in traces:
        if not trace.converged:
            continue
        key = trace.profile.canonical_key()
        if key not in seen:
            seen.add(key)
            profiles.append(trace.profile)
    return profiles


# restricted station game
# -----------------------------------------------------------------------------
def symmetric_station_load(g, size, b, b_lo, b_hi):
    """
    Closed-form symmetric load of the restricted station game with identical
    members: the interior root, or a clamp at either battery bound.
    """
    if size == 0:
        return 0.0
    if g <= (2*size - 1)*(b_lo - b) - 1.0/(2.0*b_lo):
        return b_lo - b
    if g >= (2*size - 1)*(b_hi - b) - 1.0/(2.0*b_hi):
        return b_hi - b
    psi = (2*size - 1)*b + g
    return (2.0*g - psi + math.sqrt(psi**2 + 4*size - 2))/(4*size - 2)


def restricted_station_ne(station, members, closed_form=None, tol=1e-8):
    """
    Equilibrium loads of the members of one station when paths and station
    choices are held fixed.

    Parameters
    ----------
    station : Station
        quadratic pricing station
    members : list of EV
    closed_form : bool or None
        use the symmetric closed form (identical battery triples required);
        None picks it whenever the members are identical, False always
        returns the fixed point of the members' individual best responses

    Returns
    -------
    ndarray
        one load per member
    """
    if station.virtual:
        return np.zeros(len(members))
    if station.k != 2.0:
        raise UnsupportedPricingError('restricted station game needs quadratic '
                                      'pricing, got k=%g' % station.k)
    if not members:
        return np.zeros(0)

    b = np.array([ev.b for ev in members])
    b_lo = np.array([ev.b_lo for ev in members])
    b_hi = np.array([ev.b_hi for ev in members])
    identical = len({(ev.b, ev.b_lo, ev.b_hi) for ev in members}) == 1

    if closed_form is None:
        closed_form = identical
    if closed_form:
        if not identical:
            raise ValueError('closed form requires identical members')
        l = symmetric_station_load(station.g, len(members),
                                   b[0], b_lo[0], b_hi[0])
        return np.repeat(l, len(members))

    loads = solve_multiplier(station.g, b, b_lo - b, b_hi - b)

    # one sweep of individual best responses must leave the loads in place
    total = np.sum(loads)
    for idx in range(len(members)):
        others = total - loads[idx]
        l = optimize_load_1d(station.g, others, 2.0, b[idx], b_lo[idx], b_hi[idx])
        if abs(l - loads[idx]) > tol:
            raise NoConvergenceError('station %s: load %d moved by %.3g'
                                     % (station.id, idx, abs(l - loads[idx])))
    return loads


# enumeration
# -----------------------------------------------------------------------------
def count_assignments(scenario, reduce_symmetry=True):
    total = 1
    if reduce_symmetry:
        for cls, size in _classes(scenario):
            total *= math.comb(len(scenario.options(cls)) + size - 1, size)
    else:
        for i in range(scenario.n):
            total *= len(scenario.options(i))
    return total


def _classes(scenario):
    cls, size = np.unique(scenario.ev_class, return_counts=True)
    return list(zip(cls.tolist(), size.tolist()))


def assignments(scenario, reduce_symmetry=True):
    """
    Discrete assignments as tuples of option indices, one per EV. With
    reduce_symmetry, interchangeable EVs get non-decreasing option indices so
    that each multiset of choices is produced once.
    """
    n = scenario.n
    if not reduce_symmetry:
        yield from itertools.product(*[range(len(scenario.options(i)))
                                       for i in range(n)])
        return

    groups = [np.flatnonzero(scenario.ev_class == cls) for cls, _ in
              _classes(scenario)]
    choices = [itertools.combinations_with_replacement(
                   range(len(scenario.options(int(idx[0])))), len(idx))
               for idx in groups]
    for combo in itertools.product(*[list(c) for c in choices]):
        assignment = [0]*n
        for idx, picks in zip(groups, combo):
            for i, pick in zip(idx, picks):
                assignment[int(i)] = pick
        yield tuple(assignment)


def check_budget(scenario, budget, reduce_symmetry=True):
    count = count_assignments(scenario, reduce_symmetry)
    if count > budget:
        raise BudgetExceededError('%d assignments exceed the enumeration '
                                  'budget %d' % (count, budget))
    return count


def station_members(scenario, assignment):
    members = [[] for _ in scenario.stations]
    for i, pick in enumerate(assignment):
        members[scenario.options(i)[pick][1]].append(i)
    return members


def equilibrium_profile(scenario, assignment, cache=None):
    """
    profile of an assignment with the restricted equilibrium loads at every
    station
    """
    cache = {} if cache is None else cache
    loads = np.zeros(scenario.n)
    for j, mem in enumerate(station_members(scenario, assignment)):
        if not mem or scenario.station_virtual[j]:
            continue
        order = sorted(mem, key=lambda i: scenario.ev_class[i])
        key = (j, tuple(int(scenario.ev_class[i]) for i in order))
        if key not in cache:
            cache[key] = restricted_station_ne(
                scenario.stations[j], [scenario.evs[i] for i in order],
                closed_form=False)
        loads[order] = cache[key]

    actions = [Action(*scenario.options(i)[pick], float(loads[i]))
               for i, pick in enumerate(assignment)]
    return Profile(scenario, actions, check=False)


def _enumerate_chunk(task):
    scenario, chunk, tol = task
    cache = {}
    found = []
    for assignment in chunk:
        profile = equilibrium_profile(scenario, assignment, cache)
        ok, _ = is_nash(profile, tol=tol, first_only=True)
        if ok:
            found.append(profile)
    return found


def _chunks(items, num_chunks):
    size = max(1, -(-len(items)//num_chunks))
    return [items[k:k + size] for k in range(0, len(items), size)]


def enumerate_ne(scenario, budget=ENUMERATION_BUDGET, reduce_symmetry=True,
                 tol=1e-6, workers=None):
    """
    Every pure Nash equilibrium of a quadratic pricing instance: each
    discrete assignment gets its unique restricted equilibrium loads and is
    kept when no unilateral deviation pays more than tol.

    Returns
    -------
    list of Profile
        sorted by canonical key; with reduce_symmetry each profile stands for
        its permutations among interchangeable EVs
    """
    if not scenario.is_quadratic():
        raise UnsupportedPricingError('enumeration needs quadratic pricing, '
                                      'got k in %s' % scenario.pricing_exponents())
    count = check_budget(scenario, budget, reduce_symmetry)
    LOG.info('enumerating %d assignments of %d evs', count, scenario.n)

    items = list(assignments(scenario, reduce_symmetry))
    chunks = _chunks(items, 4*num_workers(workers))
    found = [p for part in parallel_map(_enumerate_chunk,
                                        [(scenario, c, tol) for c in chunks],
                                        workers)
             for p in part]

    unique = {}
    for profile in found:
        key = (profile.canonical_key() if reduce_symmetry
               else profile.assignment())
        unique.setdefault(key, profile)
    result = [unique[key] for key in sorted(unique)]

    if not result:
        LOG.warning('no pure equilibrium among %d assignments', count)
    LOG.info('found %d equilibria', len(result))
    return result
