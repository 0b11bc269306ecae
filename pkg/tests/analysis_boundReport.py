# test function bound_report


def analysis_boundReport():
    import numpy as np
    from evroute.model import Scenario
    from evroute.analysis import bound_report, poa_bound, pos_bound

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    g = np.array([0.937, -11.223, 3.061])
    tol = 1e-9
    ok = ok and abs(poa_bound(5.0, g, 9) -
                    (303.0 + 4.5*np.sum(g**2)/9)) < tol
    ok = ok and abs(pos_bound(5.0, g, 9) -
                    (52.0 + 2.0*np.sum(g**2)/9)) < tol

    fig2 = bound_report(Scenario.fig2())
    ok = ok and fig2.num_ne >= 1
    ok = ok and 1.0 <= fig2.poa_empirical <= 1.15
    ok = ok and fig2.pos_empirical <= fig2.poa_empirical
    ok = ok and fig2.unit_cost_assumption_holds

    # fleet sizes 2..9: a large drop from n=2, then a parity sawtooth
    measured = [3.692, 1.007, 1.396, 1.180, 1.108, 1.174, 1.135, 1.107]
    sequence = [bound_report(Scenario.fig2(n=n)).poa_empirical
                for n in range(2, 10)]
    ok = ok and all(abs(p - q) < 5e-3 for p, q in zip(sequence, measured))
    ok = ok and all(p >= 1.0 for p in sequence)
    ok = ok and sequence[0] == max(sequence)
    ok = ok and sequence[0] >= sequence[-1] - 0.01
    # odd fleets improve step by step from n=5 on
    ok = ok and sequence[3] >= sequence[5] >= sequence[7]

    # a lone ev is always efficient
    lone = bound_report(Scenario.fig2(n=1, g=(0.937, -1.0, 3.061)))
    ok = ok and abs(lone.poa_empirical - 1.0) < 1e-8

    if not ok:
        print('fig2', fig2.opt, fig2.ne_worst, fig2.poa_empirical)
        print('sequence', sequence, 'lone', lone.poa_empirical)

    return ok
