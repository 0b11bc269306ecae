# test function derive_occupancy


def model_deriveOccupancy():
    import numpy as np
    from evroute.model import Scenario, Profile, Action, derive_occupancy

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    scenario = Scenario.fig2()
    # options: (e1,e4) at Q2, (e2,e3,e4) at Q1, (e2,e5) at Q3
    opts = scenario.options(0)
    ok = ok and [scenario.stations[j].id for _, j in opts] == ['Q2', 'Q1', 'Q3']

    actions = ([Action(*opts[0], -1.55)]*4 + [Action(*opts[2], 0.46)]*4 +
               [Action(*opts[1], 1.06)])
    profile = Profile(scenario, actions)
    occ = derive_occupancy(profile)

    tr_n_e = np.array([4, 5, 1, 5, 4])
    tr_counts = np.array([1, 4, 4])
    tr_loads = np.array([1.06, -6.2, 1.84])

    tol = 1e-12
    ok = ok and np.array_equal(occ.n_e, tr_n_e)
    ok = ok and np.array_equal(occ.counts, tr_counts)
    ok = ok and np.linalg.norm(occ.loads - tr_loads) < tol
    ok = ok and abs(np.sum(occ.loads) - np.sum(profile.load_vector())) < tol
    ok = ok and np.sum(occ.n_e) == sum(len(a.path) for a in actions)

    # two evs on one road, one charging at Q2 and one passing through
    skip = Scenario.fig2(n=2, skip_charging=True)
    virtual_e1 = skip.station_index['~e1']
    pair = Profile(skip, [Action((0, 3), 1, 0.5), Action((0, 3), virtual_e1, 0.0)])
    occ2 = derive_occupancy(pair)
    ok = ok and occ2.n_e[0] == 2 and occ2.counts[1] == 1
    ok = ok and abs(occ2.loads[1] - 0.5) < tol

    if not ok:
        print('n_e', occ.n_e, 'counts', occ.counts, 'loads', occ.loads)

    return ok
