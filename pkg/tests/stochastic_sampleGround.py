# test function sample_ground


def stochastic_sampleGround():
    import numpy as np
    from evroute.stochastic import GroundModel, sample_ground
    from evroute.utils import ValidationError

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    size = 100000
    model = GroundModel.normal(np.zeros(size), np.repeat(10.0, size), K=20.0)
    g = sample_ground(model, seed=11)

    ok = ok and np.all(np.abs(g) <= 20.0)
    ok = ok and abs(np.mean(g)) < 0.1
    ok = ok and abs(np.var(g) - 10.0) < 0.5
    ok = ok and np.array_equal(g, sample_ground(model, seed=11))
    ok = ok and not np.array_equal(g, sample_ground(model, seed=12))

    # standard deviation parameterization
    std_model = GroundModel.normal([0.0], [2.0], scale='std')
    ok = ok and abs(std_model.variance[0] - 4.0) < 1e-12

    fixed = GroundModel.fixed([0.937, -11.223, 3.061])
    ok = ok and np.array_equal(sample_ground(fixed, seed=0),
                               np.array([0.937, -11.223, 3.061]))

    pmf = GroundModel.discrete([([-1.0, 1.0], [0.5, 0.5])])
    draw = sample_ground(pmf, seed=3)
    ok = ok and draw[0] in (-1.0, 1.0)

    # a truncated normal centred outside [-K, K] is rejected up front
    try:
        GroundModel.normal([0.0, -11.223, 3.061], [10.0, 0.0, 0.0], K=10.0)
        ok = False
    except ValidationError:
        pass
    edge = GroundModel.normal([0.0, -10.0], [10.0, 0.0], K=10.0)
    ok = ok and sample_ground(edge, seed=4)[1] == -10.0
    loose = GroundModel.normal([-11.223], [0.0], K=10.0, truncate=False)
    ok = ok and sample_ground(loose, seed=4)[0] == -11.223

    mean, var = model.moments(exact=True)
    ok = ok and abs(mean[0]) < 1e-12 and abs(var[0] - 10.0) < 1e-6

    if not ok:
        print('mean', np.mean(g), 'var', np.var(g))

    return ok
