# cost structure of the routing and charging game
import logging
from typing import NamedTuple

import numpy as np

LOG = logging.getLogger(__name__)


class CostBreakdown(NamedTuple):
    congestion: float
    queueing: float
    battery_risk: float
    energy_price: float
    total: float

    @classmethod
    def build(cls, congestion, queueing, battery_risk, energy_price):
        total = congestion + queueing + battery_risk + energy_price
        return cls(float(congestion), float(queueing), float(battery_risk),
                   float(energy_price), float(total))


def latency(edge, x):
    """a x^d + b"""
    return edge.a*x**edge.d + edge.b


def pricing(station, x):
    """|x|^k, zero for virtual stations"""
    if station.virtual:
        return np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0
    return np.abs(x)**station.k


def others_load(profile, i):
    """aggregate load of EV i's station without i, summed directly"""
    j = profile.actions[i].station
    return float(sum(profile.actions[k].load
                     for k in profile.members[j] if k != i))


def battery_risk(scenario, i, load):
    return np.log(scenario.ev_hi[i]/(scenario.ev_b[i] + load))


def marginal_energy_price(profile, i):
    """
    f(-g + L) - f(-g + L - l_i) at EV i's station
    """
    action = profile.actions[i]
    station = profile.scenario.stations[action.station]
    if station.virtual:
        return 0.0
    base = others_load(profile, i) - station.g
    return float(pricing(station, base + action.load) - pricing(station, base))


def path_latency(scenario, path, n_e):
    if not path:
        return 0.0
    p = np.asarray(path, dtype=int)
    return float(np.sum(scenario.edge_a[p]*n_e[p]**scenario.edge_d[p] +
                        scenario.edge_b[p]))


def queue_delay(scenario, j, count):
    if scenario.station_virtual[j]:
        return 0.0
    return count/scenario.station_sigma[j]


def ev_cost(profile, i):
    scenario = profile.scenario
    action = profile.actions[i]
    j = action.station

    congestion = path_latency(scenario, action.path, profile.n_e)
    queueing = queue_delay(scenario, j, profile.counts[j])
    risk = battery_risk(scenario, i, action.load)
    price = marginal_energy_price(profile, i)

    return CostBreakdown.build(congestion, queueing, risk, price)


def load_cost(k, g, others, l, b, b_hi):
    """
    load dependent part of an EV's cost at a station with pricing |x|^k,
    ground load g and aggregate load of the other members, vectorized over l
    """
    base = others - g
    return (np.abs(base + l)**k - np.abs(base)**k + np.log(b_hi/(b + l)))


def _cumulative_latency(scenario, n_e):
    total = 0.0
    for e, count in enumerate(n_e):
        if count == 0:
            continue
        x = np.arange(1, count + 1, dtype=float)
        total += np.sum(scenario.edge_a[e]*x**scenario.edge_d[e] +
                        scenario.edge_b[e])
    return total


def potential(profile):
    """
    Exact potential of the game: the cumulative latency over roads, the
    cumulative queueing over real stations, the station imbalance prices and
    the battery risk of every EV.
    """
    scenario = profile.scenario
    real = slice(0, scenario.m)

    phi1 = _cumulative_latency(scenario, profile.n_e)

    counts = profile.counts[real]
    phi2 = np.sum(counts*(counts + 1)/(2.0*scenario.station_sigma[real]))

    imbalance = profile.loads[real] - scenario.station_g[real]
    phi3 = sum(float(pricing(st, x))
               for st, x in zip(scenario.stations[:scenario.m], imbalance))
    phi3 += np.sum(np.log(scenario.ev_hi/(scenario.ev_b +
                                          profile.load_vector()))) \
        if scenario.n else 0.0

    return float(phi1 + phi2 + phi3)


def social_cost_closed_form(profile):
    """
    social cost under linear latency and quadratic pricing
    """
    scenario = profile.scenario
    real = slice(0, scenario.m)
    n_e = profile.n_e.astype(float)
    l = profile.load_vector()

    val = np.sum(scenario.edge_a*n_e**2 + scenario.edge_b*n_e)
    val += np.sum(profile.counts[real]**2/scenario.station_sigma[real])
    val -= np.sum(l**2)
    val += 2.0*np.sum(profile.loads[real]**2)
    val -= 2.0*np.sum(scenario.station_g[real]*profile.loads[real])
    if scenario.n:
        val += np.sum(np.log(scenario.ev_hi/(scenario.ev_b + l)))
    return float(val)


def social_cost(profile):
    scenario = profile.scenario
    val = sum(ev_cost(profile, i).total for i in range(scenario.n))

    if scenario.is_linear() and scenario.is_quadratic():
        closed = social_cost_closed_form(profile)
        assert abs(val - closed) <= 1e-9*max(1.0, abs(val)), \
            'social cost %.15g disagrees with closed form %.15g' % (val, closed)

    return float(val)


def sandwich_bounds(profile):
    """
    (C/2, Phi, C + n b_max^2 + sum(g^2)); under linear latency and quadratic
    pricing the last two are ordered, the first two only while congestion
    dominates the energy terms (several members at a station with g near L/2
    can break C/2 <= Phi)
    """
    scenario = profile.scenario
    c = social_cost(profile)
    phi = potential(profile)
    _, b_max = scenario.fleet_bounds()
    upper = c + (scenario.n*b_max**2 if scenario.n else 0.0) + \
        float(np.sum(scenario.station_g[:scenario.m]**2))
    return 0.5*c, phi, upper
