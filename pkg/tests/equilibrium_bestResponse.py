# test function best_response


def equilibrium_bestResponse():
    import numpy as np
    from evroute.model import Scenario, Edge, EV, Profile
    from evroute.equilibrium import best_response, DeviationContext

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    roads = Scenario(['s', 't'], [Edge('e1', 's', 't', 5.0, 10.0),
                                  Edge('e2', 's', 't', 6.0, 20.0)],
                     [], [EV('1', 's', 't', 3.0, 0.1, 5.0)], skip_charging=True)
    action, _ = best_response(Profile.initial(roads), 0)
    ok = ok and action.path == (0,) and action.station == 0
    ok = ok and action.load == 0.0

    # a lone fig2 ev discharges at the deficit station
    lone = Scenario.fig2(n=1)
    action, cost = best_response(Profile.initial(lone), 0)
    ok = ok and lone.stations[action.station].id == 'Q2' and action.load < 0.0

    # no sampled deviation beats the best response
    rng = np.random.default_rng(3)
    for trial in range(20):
        scenario = Scenario.testProblem(n=4, seed=trial, topology='fig2',
                                        pricing_k=[2.0, 4.0/3.0][trial % 2],
                                        skip_charging=trial % 3 == 0)
        profile = Profile.random(scenario, rng, random_loads=True)
        i = int(rng.integers(scenario.n))
        _, br_cost = best_response(profile, i)

        ctx = DeviationContext(profile, i)
        lo, hi = scenario.load_bounds(i)
        for path, j in scenario.options(i):
            loads = [0.0] if scenario.station_virtual[j] else \
                rng.uniform(lo, hi, size=200)
            for load in loads:
                cost = ctx.fixed_cost(path, j) + ctx.energy_cost(j, load)
                if cost < br_cost - 1e-7:
                    ok = False
                    print('trial', trial, 'deviation', path, j, load, cost,
                          'beats', br_cost)

    return ok
