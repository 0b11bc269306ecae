# test function potential


def costs_potential():
    import numpy as np
    from evroute.model import Scenario, Profile, Action
    from evroute.costs import potential, ev_cost

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    rng = np.random.default_rng(0)
    exponents = [2.0/3.0, 4.0/3.0, 2.0, 8.0/3.0]
    topologies = ['fig2', 'diamond', 'parallel']

    max_err = 0.0
    for trial in range(1000):
        scenario = Scenario.testProblem(n=4, seed=trial,
                                        topology=topologies[trial % 3],
                                        pricing_k=exponents[trial % 4],
                                        latency_d=1.0 + (trial//4) % 2,
                                        skip_charging=trial % 2 == 1)
        profile = Profile.random(scenario, rng, random_loads=True)

        i = int(rng.integers(scenario.n))
        opts = scenario.options(i)
        path, j = opts[int(rng.integers(len(opts)))]
        lo, hi = scenario.load_bounds(i)
        load = 0.0 if scenario.station_virtual[j] else float(rng.uniform(lo, hi))
        moved = profile.replace(i, Action(path, j, load))

        d_phi = potential(moved) - potential(profile)
        d_cost = ev_cost(moved, i).total - ev_cost(profile, i).total
        err = abs(d_phi - d_cost)/max(1.0, abs(d_cost))
        max_err = max(max_err, err)

    tol = 1e-9
    ok = ok and max_err < tol

    # empty fleet keeps only the ground imbalance
    empty = Scenario.fig2(n=0)
    tr_phi = 0.937**2 + 11.223**2 + 3.061**2
    ok = ok and abs(potential(Profile(empty, [])) - tr_phi) < tol

    if not ok:
        print('max_err', max_err)

    return ok
