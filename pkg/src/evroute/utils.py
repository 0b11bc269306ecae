# utility classes and functions
import os
import math
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.optimize import bisect

LOG = logging.getLogger(__name__)

GOLDEN_RATIO = 2.0/(1.0 + math.sqrt(5.0))


# errors
# -----------------------------------------------------------------------------
class EvrouteError(Exception):
    code = 'ERROR'


class ValidationError(EvrouteError):
    """Scenario or configuration rejected, `path` names the offending field."""
    code = 'REJECT'

    def __init__(self, path, message):
        super().__init__('%s: %s' % (path, message))
        self.path = path
        self.message = message


class PathExplosionError(EvrouteError):
    code = 'PATH_EXPLOSION'


class BudgetExceededError(EvrouteError):
    code = 'BUDGET_EXCEEDED'


class UnsupportedPricingError(EvrouteError):
    code = 'UNSUPPORTED_PRICING'


class NotConvergedError(EvrouteError):
    code = 'NOT_CONVERGED'

    def __init__(self, trace):
        super().__init__('best response dynamics stopped after %d rounds '
                         'without converging' % trace.rounds)
        self.trace = trace


class NoConvergenceError(EvrouteError):
    code = 'NO_CONVERGENCE'


class NoEquilibriumError(EvrouteError):
    code = 'NO_NE_FOUND'


class BoundViolationError(EvrouteError):
    code = 'BOUND_VIOLATION'


# scalar minimization
# -----------------------------------------------------------------------------
def golden_section(f, a, b, tol=1e-10, max_iter=200):
    """
    golden section search for the minimizer of a unimodal f on [a, b]
    """
    x1 = b - GOLDEN_RATIO*(b - a)
    x2 = a + GOLDEN_RATIO*(b - a)
    f1 = f(x1)
    f2 = f(x2)

    num_iter = 0
    while abs(b - a) > tol and num_iter < max_iter:
        if f2 > f1:
            b = x2
            x2 = x1
            f2 = f1
            x1 = b - GOLDEN_RATIO*(b - a)
            f1 = f(x1)
        else:
            a = x1
            x1 = x2
            f1 = f2
            x2 = a + GOLDEN_RATIO*(b - a)
            f2 = f(x2)
        num_iter += 1

    if f1 <= f2:
        return x1, f1
    return x2, f2


def minimize_bounded(f, lo, hi, num_grid=4096, tol=1e-10):
    """
    Minimize a scalar function over [lo, hi] with a dense grid followed by a
    golden section refinement on the bracket around the best grid point.

    Parameters
    ----------
    f : function
        vectorized objective, takes an ndarray and returns an ndarray
    lo, hi : float
        bounds of the interval, lo <= hi
    num_grid : int
        number of grid points, including both ends

    Returns
    -------
    x, fx : float
    """
    if hi - lo <= tol:
        x = 0.5*(lo + hi)
        return x, float(f(np.array([x]))[0])

    grid = np.linspace(lo, hi, num_grid)
    vals = f(grid)
    k = int(np.argmin(vals))
    best_x, best_f = float(grid[k]), float(vals[k])

    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, num_grid - 1)]

    def scalar_f(x):
        return float(f(np.array([x]))[0])

    x, fx = golden_section(scalar_f, a, b, tol=tol)
    if fx < best_f:
        return x, fx
    return best_x, best_f


def stationary_load(c, b):
    """
    root of 2 l + 2 c - 1/(b + l) = 0 on l > -b, i.e. the minimizer of
    l^2 + 2 c l + ln(1/(b + l))
    """
    return 0.5*(-(b + c) + math.sqrt((b - c)**2 + 2.0))


def solve_multiplier(g, b, lo, hi, xtol=1e-14):
    """
    Minimize (sum(l) - g)^2 + sum(ln(1/(b + l))) over the box lo <= l <= hi.

    The minimizer satisfies l_i = clip(1/lam - b_i, lo_i, hi_i) with the
    station multiplier lam = 2 (sum(l) - g); lam is found by bisection on the
    monotone residual, the same way the capped simplex projection is done.
    """
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def loads(lam):
        if lam <= 0.0:
            return hi.copy()
        return np.maximum(np.minimum(1.0/lam - b, hi), lo)

    def f(lam):
        return 2.0*(np.sum(loads(lam)) - g) - lam

    lam_lo = min(-1.0, 2.0*(np.sum(hi) - g)) - 1.0
    lam_hi = max(np.max(1.0/(b + lo)), 2.0*(np.sum(lo) - g)) + 1.0

    lam = bisect(f, lam_lo, lam_hi, xtol=xtol, maxiter=500)
    return loads(lam)


# workers
# -----------------------------------------------------------------------------
def num_workers(workers=None):
    if workers is not None:
        return max(int(workers), 1)
    return max(int(os.environ.get('EVROUTE_WORKERS', '1')), 1)


def parallel_map(func, items, workers=None):
    """
    ordered map over a process pool; falls back to a plain loop for one worker
    """
    items = list(items)
    workers = num_workers(workers)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    LOG.debug('mapping %d tasks over %d workers', len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
