# test function run_best_response_dynamics on random fleets


def equilibrium_dynamicsRandom():
    import numpy as np
    from evroute.model import Scenario, Profile
    from evroute.equilibrium import run_best_response_dynamics, is_nash
    from evroute.utils import EvrouteError

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    eps = 1e-6
    failures = []
    for seed in range(100):
        scenario = Scenario.testProblem(n=6, seed=seed,
                                        topology=('parallel', 'diamond',
                                                  'fig2')[seed % 3],
                                        pricing_k=(2.0, 4.0/3.0)[seed % 2])
        rng = np.random.default_rng(seed)
        initial = Profile.random(scenario, rng, random_loads=True)
        try:
            trace = run_best_response_dynamics(initial, eps=eps)
        except EvrouteError as err:
            failures.append((seed, str(err)))
            continue
        verdict, worst = is_nash(trace.profile, tol=10*eps)
        if not verdict:
            failures.append((seed, worst))

    # at least 99 of 100 terminals are equilibria
    ok = ok and len(failures) <= 1

    if not ok:
        print('failures', failures)

    return ok
