# test function run_best_response_dynamics


def equilibrium_runBestResponseDynamics():
    import numpy as np
    from evroute.model import Scenario, Profile
    from evroute.equilibrium import run_best_response_dynamics, is_nash

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    scenario = Scenario.fig2()
    eps = 1e-6
    trace = run_best_response_dynamics(Profile.initial(scenario), eps=eps)
    profile = trace.profile

    ok = ok and trace.converged
    ok = ok and list(profile.counts[:3]) == [1, 4, 4]
    ok = ok and profile.loads[0] > 0.0
    ok = ok and profile.loads[1] < 0.0
    ok = ok and profile.loads[2] > 0.0

    # the potential drops with every move
    ok = ok and all(m.phi_after < m.phi_before for m in trace.moves)

    verdict, _ = is_nash(profile, tol=10*eps)
    ok = ok and verdict

    # starting at the terminal nobody moves
    again = run_best_response_dynamics(profile, eps=eps)
    ok = ok and again.num_moves == 0 and again.rounds == 1

    # random order reaches an equilibrium as well
    shuffled = run_best_response_dynamics(Profile.initial(scenario), eps=eps,
                                          order='random', seed=5)
    ok = ok and is_nash(shuffled.profile, tol=10*eps)[0]

    if not ok:
        print('counts', profile.counts, 'loads', profile.loads)
        print('moves', trace.num_moves, 'rounds', trace.rounds)

    return ok
