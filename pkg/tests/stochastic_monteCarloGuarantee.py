# test function monte_carlo_guarantee


def stochastic_monteCarloGuarantee():
    import numpy as np
    from evroute.model import Scenario
    from evroute.stochastic import (GroundModel, monte_carlo_guarantee,
                                    hoeffding_fleet_size)

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    scenario = Scenario.fig2()
    model = GroundModel.normal(np.zeros(3), np.repeat(10.0, 3), K=20.0)
    n = hoeffding_fleet_size(model.moments(), 20.0, 0.05)

    report = monte_carlo_guarantee(scenario, model, n, trials=10000, seed=0,
                                   eps=0.05)
    ok = ok and report.trials == 10000
    ok = ok and report.frequency <= 0.05
    ok = ok and report.ci_low <= report.frequency <= report.ci_high

    again = monte_carlo_guarantee(scenario, model, n, trials=10000, seed=0,
                                  eps=0.05, workers=2)
    ok = ok and again.exceed == report.exceed

    # no fleet at all never outweighs a random ground load
    empty = monte_carlo_guarantee(scenario, model, 0, trials=500, seed=1)
    ok = ok and empty.frequency == 1.0

    fixed = GroundModel.fixed([0.937, -11.223, 3.061])
    safe = monte_carlo_guarantee(scenario, fixed, 137, trials=200, seed=2)
    ok = ok and safe.exceed == 0

    if not ok:
        print('report', report)

    return ok
