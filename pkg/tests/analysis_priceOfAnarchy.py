# test functions price_of_anarchy and price_of_stability


def analysis_priceOfAnarchy():
    from evroute.model import Scenario
    from evroute.costs import social_cost
    from evroute.equilibrium import is_nash
    from evroute.analysis import price_of_anarchy, price_of_stability

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    scenario = Scenario.fig2(n=4)
    anarchy = price_of_anarchy(scenario)
    stability = price_of_stability(scenario)

    tol = 1e-9
    ok = ok and anarchy.unit_cost_assumption_holds
    ok = ok and abs(anarchy.poa_empirical - anarchy.ne_worst/anarchy.opt) < tol
    ok = ok and abs(stability.pos_empirical - stability.ne_best/stability.opt) < tol
    ok = ok and 1.0 - tol <= stability.pos_empirical <= anarchy.poa_empirical
    ok = ok and anarchy.poa_empirical <= anarchy.poa_bound
    ok = ok and stability.pos_empirical <= stability.pos_bound
    ok = ok and abs(anarchy.poa_empirical - 1.396) < 5e-3

    # the reported profiles carry the reported costs
    ok = ok and abs(social_cost(anarchy.worst_profile) - anarchy.ne_worst) < tol
    ok = ok and abs(social_cost(stability.best_profile) - stability.ne_best) < tol
    ok = ok and abs(social_cost(anarchy.opt_profile) - anarchy.opt) < tol
    ok = ok and is_nash(anarchy.worst_profile, tol=1e-6)[0]
    ok = ok and is_nash(stability.best_profile, tol=1e-6)[0]

    # dynamics mode only sees a subset of the equilibria
    sampled = price_of_anarchy(scenario, mode='approximate', starts=16, seed=2)
    ok = ok and sampled.poa_empirical <= anarchy.poa_empirical + 1e-4

    if not ok:
        print('poa', anarchy.poa_empirical, 'pos', stability.pos_empirical,
              'sampled', sampled.poa_empirical)

    return ok
