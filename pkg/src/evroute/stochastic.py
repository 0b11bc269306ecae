# stochastic ground loads and fleet sizing
import math
import logging
from typing import NamedTuple

import numpy as np
from scipy import stats

from evroute.analysis import bound_report, fleet_poa_limit
from evroute.utils import ValidationError, EvrouteError, parallel_map

LOG = logging.getLogger(__name__)

DEFAULT_K = 20.0


class Pmf(NamedTuple):
    support: np.ndarray
    probs: np.ndarray


class GroundModel:
    """
    Independent per-station ground load distributions of one kind:
    'fixed' values, 'normal' with optional truncation to [-K, K] or a
    'discrete' pmf per station.
    """
    def __init__(self, kind, mean=None, variance=None, K=DEFAULT_K,
                 truncate=True, pmfs=None):
        self.kind = kind
        self.K = float(K)
        self.truncate = truncate
        self.mean = None if mean is None else np.asarray(mean, dtype=float)
        self.variance = (None if variance is None
                         else np.asarray(variance, dtype=float))
        self.pmfs = None if pmfs is None else [
            Pmf(np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float))
            for p in pmfs]
        self.check()

    def check(self):
        if self.kind not in ('fixed', 'normal', 'discrete'):
            raise ValidationError('ground.type', 'unknown kind %r' % self.kind)
        if not self.K > 0.0:
            raise ValidationError('ground.K', 'support bound must be > 0')
        if self.kind == 'fixed':
            if self.mean is None:
                raise ValidationError('ground.value', 'missing fixed values')
        elif self.kind == 'normal':
            if self.mean is None or self.variance is None or \
                    self.mean.shape != self.variance.shape:
                raise ValidationError('ground.variance',
                                      'mean and variance needed per station')
            if np.any(self.variance < 0.0):
                raise ValidationError('ground.variance', 'must be >= 0')
            # rejection sampling needs mass inside [-K, K]
            if self.truncate and np.any(np.abs(self.mean) > self.K):
                raise ValidationError('ground.mean',
                                      'mean outside [-K, K] under truncation')
        else:
            for j, pmf in enumerate(self.pmfs or []):
                if pmf.support.shape != pmf.probs.shape or np.any(pmf.probs < 0.0):
                    raise ValidationError('ground.pmf[%d]' % j, 'malformed pmf')
                if abs(np.sum(pmf.probs) - 1.0) > 1e-12:
                    raise ValidationError('ground.pmf[%d]' % j,
                                          'probabilities must sum to 1')
            if not self.pmfs:
                raise ValidationError('ground.pmf', 'missing pmfs')

    @property
    def m(self):
        if self.kind == 'discrete':
            return len(self.pmfs)
        return self.mean.size

    @classmethod
    def fixed(cls, g):
        return cls('fixed', mean=g)

    @classmethod
    def normal(cls, mean, variance, K=DEFAULT_K, truncate=True, scale='variance'):
        """
        scale='std' reads the second parameter as a standard deviation
        """
        variance = np.asarray(variance, dtype=float)
        if scale == 'std':
            variance = variance**2
        elif scale != 'variance':
            raise ValueError('scale must be variance or std')
        return cls('normal', mean=mean, variance=variance, K=K,
                   truncate=truncate)

    @classmethod
    def discrete(cls, pmfs, K=DEFAULT_K):
        return cls('discrete', pmfs=pmfs, K=K)

    @classmethod
    def from_document(cls, scenario):
        """
        per-station 'ground' entries of a scenario document; stations
        without one keep their fixed g
        """
        docs = scenario.ground or {}
        kinds = {doc.get('type', 'fixed') for doc in docs.values()}
        if len(kinds) > 1:
            raise ValidationError('stations.ground', 'mixed ground model kinds')
        kind = kinds.pop() if kinds else 'fixed'

        stations = scenario.stations[:scenario.m]
        if kind == 'fixed':
            return cls.fixed([float(docs.get(st.id, {}).get('value', st.g))
                              for st in stations])

        if kind == 'normal':
            mean, var, K = [], [], []
            for st in stations:
                doc = docs.get(st.id, {'mean': st.g, 'variance': 0.0})
                mean.append(float(doc.get('mean', 0.0)))
                if 'std' in doc:
                    var.append(float(doc['std'])**2)
                else:
                    var.append(float(doc.get('variance', 0.0)))
                K.append(float(doc.get('K', DEFAULT_K)))
            return cls.normal(mean, var, K=max(K),
                              truncate=all(docs.get(st.id, {}).get('truncate', True)
                                           for st in stations))

        pmfs = []
        for st in stations:
            doc = docs.get(st.id, {'support': [st.g], 'probs': [1.0]})
            pmfs.append((doc['support'], doc['probs']))
        return cls.discrete(pmfs)

    def moments(self, exact=False):
        """
        (mean, variance) per station; exact=True accounts for the truncation
        of normal models
        """
        if self.kind == 'fixed':
            return self.mean.copy(), np.zeros(self.m)
        if self.kind == 'discrete':
            mean = np.array([np.dot(p.probs, p.support) for p in self.pmfs])
            var = np.array([np.dot(p.probs, (p.support - mu)**2)
                            for p, mu in zip(self.pmfs, mean)])
            return mean, var
        if not (exact and self.truncate):
            return self.mean.copy(), self.variance.copy()

        std = np.sqrt(self.variance)
        mean = self.mean.copy()
        var = np.zeros(self.m)
        for j in np.flatnonzero(std > 0.0):
            a = (-self.K - self.mean[j])/std[j]
            b = (self.K - self.mean[j])/std[j]
            mean[j], var[j] = stats.truncnorm.stats(a, b, loc=self.mean[j],
                                                    scale=std[j], moments='mv')
        return mean, var


def _draw(model, rng):
    if model.kind == 'fixed':
        return model.mean.copy()
    if model.kind == 'discrete':
        return np.array([rng.choice(p.support, p=p.probs) for p in model.pmfs])

    std = np.sqrt(model.variance)
    g = rng.normal(model.mean, std)
    if model.truncate:
        outside = np.abs(g) > model.K
        while np.any(outside):
            g[outside] = rng.normal(model.mean[outside], std[outside])
            outside = np.abs(g) > model.K
    return g


def sample_ground(model, seed):
    """one independent draw per station, deterministic given the seed"""
    return _draw(model, np.random.default_rng(seed))


def hoeffding_fleet_size(moments, K, eps):
    """
    Smallest fleet size for which the sum of squared ground loads stays
    below the fleet size with probability at least 1 - eps.

    Parameters
    ----------
    moments : tuple of ndarray or list of (mean, variance)
    K : float
        support bound of the ground loads
    eps : float
        failure probability in (0, 1]
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError('eps', 'must lie in (0, 1]')
    if not K > 0.0:
        raise ValidationError('K', 'must be > 0')

    if isinstance(moments, tuple) and len(moments) == 2 and \
            np.ndim(moments[0]) == 1:
        mean, var = (np.asarray(x, dtype=float) for x in moments)
    else:
        arr = np.asarray(moments, dtype=float).reshape(-1, 2)
        mean, var = arr[:, 0], arr[:, 1]

    m = mean.size
    val = 4.5*np.sum(mean**2 + var) + 4.5*K*math.sqrt(m*math.log(1.0/eps))
    return int(math.ceil(val))


class MonteCarloReport(NamedTuple):
    n: int
    trials: int
    exceed: int
    frequency: float
    ci_low: float
    ci_high: float
    eps: float
    poa_trials: int
    poa_exceed_frequency: float
    poa_level: float


def _trial(task):
    model, children, n, template, num_poa, options = task
    out = []
    for idx, child in enumerate(children):
        g = _draw(model, np.random.default_rng(child))
        exceed = bool(np.sum(g**2) > n)
        poa_exceed = None
        if idx < num_poa:
            scenario = template.with_ground(g)
            _, b_max = scenario.fleet_bounds()
            try:
                report = bound_report(scenario, check=False, **options)
                poa_exceed = bool(report.poa_empirical > fleet_poa_limit(b_max))
            except EvrouteError as err:
                LOG.warning('trial poa failed: %s', err)
        out.append((exceed, poa_exceed))
    return out


def monte_carlo_guarantee(scenario, model, n, trials=10000, seed=0, eps=None,
                          poa_trials=0, poa_options=None, workers=None):
    """
    Frequency of the event sum(g^2) > n over seeded draws of the ground
    model, with a 99% binomial confidence interval. For the first poa_trials
    draws the scenario (fleet resized to n) is also solved and the frequency
    of a PoA above the guaranteed level is reported.
    """
    if trials < 100:
        raise ValidationError('trials', 'at least 100 trials needed')
    if model.m != scenario.m:
        raise ValidationError('ground', 'model has %d stations, scenario %d'
                              % (model.m, scenario.m))

    children = np.random.SeedSequence(seed).spawn(trials)
    template = None
    if poa_trials:
        template = scenario if scenario.n == n else scenario.with_fleet(n)

    tasks = []
    step = 1000
    for start in range(0, trials, step):
        part = children[start:start + step]
        tasks.append((model, part, n, template,
                      max(0, min(step, poa_trials - start)),
                      poa_options or {}))
    results = [r for chunk in parallel_map(_trial, tasks, workers) for r in chunk]

    exceed = sum(r[0] for r in results)
    poa_flags = [r[1] for r in results[:poa_trials] if r[1] is not None]

    test = stats.binomtest(exceed, trials, p=eps if eps is not None else 0.5)
    ci = test.proportion_ci(confidence_level=0.99)

    _, b_max = scenario.fleet_bounds()
    report = MonteCarloReport(n, trials, exceed, exceed/trials, ci.low, ci.high,
                              math.nan if eps is None else eps,
                              len(poa_flags),
                              (sum(poa_flags)/len(poa_flags)) if poa_flags
                              else math.nan,
                              4.0 + 12.0*b_max**2)
    LOG.info('monte carlo: %d of %d draws with sum(g^2) > %d', exceed, trials, n)
    return report


def discretize(model, K=None, points=21):
    """
    Per-station pmfs on an equal-width grid over [-K, K]; normal models put
    mass proportional to the density at each grid point, fixed models a point
    mass at the value.
    """
    K = model.K if K is None else float(K)
    if model.kind == 'discrete':
        return list(model.pmfs)
    if model.kind == 'fixed':
        return [Pmf(np.array([g]), np.ones(1)) for g in model.mean]

    grid = np.linspace(-K, K, points)
    pmfs = []
    for mu, var in zip(model.mean, model.variance):
        if var == 0.0:
            pmfs.append(Pmf(np.array([mu]), np.ones(1)))
            continue
        density = stats.norm.pdf(grid, loc=mu, scale=math.sqrt(var))
        pmfs.append(Pmf(grid.copy(), density/np.sum(density)))
    return pmfs
