# test function ev_cost


def costs_evCost():
    import numpy as np
    from evroute.model import Scenario, Edge, Station, EV, Profile, Action
    from evroute.costs import ev_cost, marginal_energy_price, potential

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    nodes = ['s', 'u', 't']
    edges = [Edge('e1', 's', 'u', 5.0, 10.0), Edge('e2', 'u', 't', 5.0, 10.0)]
    stations = [Station('Q1', 'e1', 1.0, 2.0, 0.0)]
    evs = [EV('1', 's', 't', 3.0, 0.1, 5.0)]
    scenario = Scenario(nodes, edges, stations, evs, skip_charging=True)

    profile = Profile(scenario, [Action((0, 1), 0, 0.0)])
    cost = ev_cost(profile, 0)

    tr_total = 30.0 + 1.0 + np.log(5.0/3.0)
    tol = 1e-9
    ok = ok and abs(cost.total - tr_total) < tol
    ok = ok and abs(cost.congestion - 30.0) < tol
    ok = ok and abs(cost.queueing - 1.0) < tol
    ok = ok and cost.energy_price == 0.0
    # a lone ev pays exactly its own potential
    ok = ok and abs(potential(profile) - tr_total) < tol

    # passing through a virtual station costs congestion only when full
    full = Scenario(nodes, edges, stations, [EV('1', 's', 't', 5.0, 0.1, 5.0)],
                    skip_charging=True)
    passing = Profile(full, [Action((0, 1), full.station_index['~e2'], 0.0)])
    ok = ok and abs(ev_cost(passing, 0).total - 30.0) < tol

    # marginal prices at a single station
    parallel = Scenario(['s', 't'], [Edge('e1', 's', 't', 5.0, 10.0)],
                        [Station('Q1', 'e1', 1.0, 2.0, 0.0)],
                        [EV('1', 's', 't', 3.0, 0.1, 5.0)])
    alone = Profile(parallel, [Action((0,), 0, 2.0)])
    ok = ok and abs(marginal_energy_price(alone, 0) - 4.0) < tol

    shifted = parallel.with_ground([3.061])
    shifted_profile = Profile(shifted, [Action((0,), 0, 0.46)])
    tr_price = (0.46 - 3.061)**2 - 3.061**2
    ok = ok and abs(marginal_energy_price(shifted_profile, 0) - tr_price) < tol

    # battery risk at the fig2 single-ev equilibrium load
    fig2 = Scenario.fig2()
    opts = fig2.options(0)
    actions = [Action(*opts[1], 1.0602)] + [Action(*opts[2], 0.0)]*8
    risk = ev_cost(Profile(fig2, actions), 0).battery_risk
    ok = ok and abs(risk - np.log(5.0/4.0602)) < tol

    if not ok:
        print('cost', cost)

    return ok
