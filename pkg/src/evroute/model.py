# game instance: road network, charging stations, fleet and action profiles
import math
import logging
from typing import NamedTuple, Tuple

import numpy as np
import networkx as nx

from evroute.utils import ValidationError, PathExplosionError

LOG = logging.getLogger(__name__)

PATH_CAP = 10000
VIRTUAL_PREFIX = '~'


class Edge(NamedTuple):
    id: str
    tail: str
    head: str
    a: float
    b: float
    d: float = 1.0


class Station(NamedTuple):
    id: str
    edge: str
    sigma: float
    k: float
    g: float
    virtual: bool = False


class EV(NamedTuple):
    id: str
    s: str
    t: str
    b: float
    b_lo: float
    b_hi: float


class Action(NamedTuple):
    """
    (path, station, load) of one EV; path is a tuple of edge indices and
    station a station index of the owning scenario
    """
    path: Tuple[int, ...]
    station: int
    load: float = 0.0


class Occupancy(NamedTuple):
    n_e: np.ndarray
    members: Tuple[Tuple[int, ...], ...]
    loads: np.ndarray

    @property
    def counts(self):
        return np.array([len(q) for q in self.members], dtype=int)


class Network:
    """
    directed road network, parallel roads allowed
    """
    def __init__(self, nodes, edges):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.edge_index = {e.id: idx for idx, e in enumerate(self.edges)}

        self.graph = nx.MultiDiGraph()
        self.graph.add_nodes_from(self.nodes)
        for e in self.edges:
            self.graph.add_edge(e.tail, e.head, key=e.id)

    def check(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValidationError('nodes', 'node ids must be unique')
        if len(self.edge_index) != len(self.edges):
            raise ValidationError('edges', 'edge ids must be unique')

        for idx, e in enumerate(self.edges):
            path = 'edges[%d]' % idx
            if e.tail not in node_set:
                raise ValidationError(path + '.tail', 'unknown node %r' % e.tail)
            if e.head not in node_set:
                raise ValidationError(path + '.head', 'unknown node %r' % e.head)
            if not (math.isfinite(e.a) and e.a >= 0.0):
                raise ValidationError(path + '.a', 'must be finite and >= 0')
            if not (math.isfinite(e.b) and e.b >= 0.0):
                raise ValidationError(path + '.b', 'must be finite and >= 0')
            if not (math.isfinite(e.d) and e.d >= 1.0):
                raise ValidationError(path + '.d', 'congestion exponent must be >= 1')

    def has_path(self, s, t):
        return nx.has_path(self.graph, s, t)


def enumerate_paths(network, s, t, cap=PATH_CAP):
    """
    all simple directed s-t paths as tuples of edge ids, sorted
    lexicographically by edge id sequence
    """
    assert cap >= 1
    if s not in network.graph or t not in network.graph:
        raise ValidationError('path', 'unknown endpoint %r -> %r' % (s, t))
    if s == t:
        return [()]

    paths = []
    for edge_path in nx.all_simple_edge_paths(network.graph, s, t):
        paths.append(tuple(key for _, _, key in edge_path))
        if len(paths) > cap:
            raise PathExplosionError(
                'more than %d simple paths from %r to %r' % (cap, s, t))

    paths.sort()
    return paths


class Scenario:
    """
    Full game instance: network, stations (real stations first, then one
    virtual station per road when skip charging is enabled) and fleet.
    Immutable after construction.
    """
    def __init__(self, nodes, edges, stations, evs,
                 skip_charging=False, path_cap=PATH_CAP,
                 ground=None, pt=None):
        self.network = Network(nodes, edges)
        self.nodes = self.network.nodes
        self.edges = self.network.edges
        self.skip_charging = bool(skip_charging)
        self.path_cap = path_cap
        self.ground = ground
        self.pt = pt

        real = tuple(st for st in stations if not st.virtual)
        if self.skip_charging:
            virtual = tuple(Station(VIRTUAL_PREFIX + e.id, e.id, math.inf,
                                    None, 0.0, True)
                            for e in self.edges)
        else:
            virtual = ()
        self.stations = real + virtual
        self.m = len(real)
        self.evs = tuple(evs)
        self.n = len(self.evs)

        self.check()
        self._process()

    def check(self):
        self.network.check()

        station_ids = [st.id for st in self.stations]
        if len(set(station_ids)) != len(station_ids):
            raise ValidationError('stations', 'station ids must be unique')

        for j, st in enumerate(self.stations[:self.m]):
            path = 'stations[%d]' % j
            if st.edge not in self.network.edge_index:
                raise ValidationError(path + '.edge', 'unknown edge %r' % st.edge)
            if not st.sigma > 0.0:
                raise ValidationError(path + '.sigma', 'service rate must be > 0')
            if st.k is None or not (math.isfinite(st.k) and st.k > 0.0):
                raise ValidationError(path + '.k', 'pricing exponent must be > 0')
            if not math.isfinite(st.g):
                raise ValidationError(path + '.g', 'ground load must be finite')

        ev_ids = [ev.id for ev in self.evs]
        if len(set(ev_ids)) != len(ev_ids):
            raise ValidationError('evs', 'ev ids must be unique')

        node_set = set(self.nodes)
        for i, ev in enumerate(self.evs):
            path = 'evs[%d]' % i
            if not ev.b_lo > 0.0:
                raise ValidationError(path + '.b_lo', 'battery floor must be positive')
            if not ev.b_lo < ev.b_hi:
                raise ValidationError(path + '.b_hi', 'capacity must exceed battery floor')
            if not ev.b_lo <= ev.b <= ev.b_hi:
                raise ValidationError(path + '.b', 'battery level outside [b_lo, b_hi]')
            if ev.s not in node_set:
                raise ValidationError(path + '.s', 'unknown node %r' % ev.s)
            if ev.t not in node_set:
                raise ValidationError(path + '.t', 'unknown node %r' % ev.t)
            if not self.network.has_path(ev.s, ev.t):
                raise ValidationError(path + '.t', 'destination unreachable from origin')

    def _process(self):
        edge_index = self.network.edge_index
        self.edge_a = np.array([e.a for e in self.edges], dtype=float)
        self.edge_b = np.array([e.b for e in self.edges], dtype=float)
        self.edge_d = np.array([e.d for e in self.edges], dtype=float)

        self.station_index = {st.id: j for j, st in enumerate(self.stations)}
        self.station_edge = np.array([edge_index[st.edge]
                                      for st in self.stations], dtype=int)
        self.station_sigma = np.array([st.sigma for st in self.stations])
        self.station_g = np.array([st.g for st in self.stations])
        self.station_virtual = np.array([st.virtual for st in self.stations],
                                        dtype=bool)

        self.stations_on_edge = [[] for _ in self.edges]
        for j, st in enumerate(self.stations):
            self.stations_on_edge[edge_index[st.edge]].append(j)

        self.ev_b = np.array([ev.b for ev in self.evs], dtype=float)
        self.ev_lo = np.array([ev.b_lo for ev in self.evs], dtype=float)
        self.ev_hi = np.array([ev.b_hi for ev in self.evs], dtype=float)

        # interchangeable EVs share origin, destination and battery triple
        first = {}
        self.ev_class = np.array(
            [first.setdefault((ev.s, ev.t, ev.b, ev.b_lo, ev.b_hi), i)
             for i, ev in enumerate(self.evs)], dtype=int)

        self._paths = {}
        self._options = {}

    # paths and discrete options
    # -------------------------------------------------------------------------
    def paths(self, i):
        ev = self.evs[i]
        key = (ev.s, ev.t)
        if key not in self._paths:
            edge_index = self.network.edge_index
            self._paths[key] = [tuple(edge_index[e] for e in p)
                                for p in enumerate_paths(self.network,
                                                         ev.s, ev.t,
                                                         self.path_cap)]
        return self._paths[key]

    def options(self, i):
        """
        (path, station) pairs open to EV i, ordered by path edge ids then
        station id
        """
        ev = self.evs[i]
        key = (ev.s, ev.t)
        if key not in self._options:
            opts = []
            for p in self.paths(i):
                on_path = [j for e in p for j in self.stations_on_edge[e]]
                on_path.sort(key=lambda j: self.stations[j].id)
                opts.extend((p, j) for j in on_path)
            self._options[key] = opts
        return self._options[key]

    def load_bounds(self, i):
        return self.ev_lo[i] - self.ev_b[i], self.ev_hi[i] - self.ev_b[i]

    def fleet_bounds(self):
        """
        (b_min, b_max) = (min of battery floors, max of capacities)
        """
        if self.n == 0:
            return math.nan, math.nan
        return float(np.min(self.ev_lo)), float(np.max(self.ev_hi))

    def pricing_exponents(self):
        return sorted({st.k for st in self.stations[:self.m]})

    def is_quadratic(self):
        return all(st.k == 2.0 for st in self.stations[:self.m])

    def is_linear(self):
        return bool(np.all(self.edge_d == 1.0))

    def path_ids(self, path):
        return tuple(self.edges[e].id for e in path)

    def describe(self, action):
        return {'path': list(self.path_ids(action.path)),
                'station': self.stations[action.station].id,
                'load': float(action.load)}

    def check_action(self, i, action):
        path = 'actions[%d]' % i
        if tuple(action.path) not in self.paths(i):
            raise ValidationError(path + '.path', 'not a simple origin-destination path')
        if self.station_edge[action.station] not in action.path:
            raise ValidationError(path + '.station', 'station is not on the chosen path')
        lo, hi = self.load_bounds(i)
        if not lo - 1e-12 <= action.load <= hi + 1e-12:
            raise ValidationError(path + '.load', 'load outside [b_lo - b, b_hi - b]')
        if self.station_virtual[action.station] and action.load != 0.0:
            raise ValidationError(path + '.load', 'virtual stations take no load')

    # derived scenarios
    # -------------------------------------------------------------------------
    def _rebuild(self, edges=None, stations=None, evs=None, skip_charging=None):
        return Scenario(self.nodes,
                        self.edges if edges is None else edges,
                        self.stations[:self.m] if stations is None else stations,
                        self.evs if evs is None else evs,
                        skip_charging=(self.skip_charging if skip_charging is None
                                       else skip_charging),
                        path_cap=self.path_cap,
                        ground=self.ground, pt=self.pt)

    def with_fleet(self, n):
        """
        fleet of n copies of the first EV
        """
        assert self.n > 0
        template = self.evs[0]
        evs = [template._replace(id=str(i + 1)) for i in range(n)]
        return self._rebuild(evs=evs)

    def with_pricing(self, k):
        return self._rebuild(stations=[st._replace(k=float(k))
                                       for st in self.stations[:self.m]])

    def with_latency(self, d):
        return self._rebuild(edges=[e._replace(d=float(d)) for e in self.edges])

    def with_ground(self, g):
        g = np.asarray(g, dtype=float)
        assert g.size == self.m
        return self._rebuild(stations=[st._replace(g=float(g[j]))
                                       for j, st in enumerate(self.stations[:self.m])])

    def with_skip(self, skip_charging):
        return self._rebuild(skip_charging=skip_charging)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.nodes == other.nodes and self.edges == other.edges and
                self.stations == other.stations and self.evs == other.evs and
                self.skip_charging == other.skip_charging and
                self.ground == other.ground and self.pt == other.pt)

    __hash__ = None

    # corpus and random instances
    # -------------------------------------------------------------------------
    @classmethod
    def fig2(cls, n=9, b=3.0, b_lo=0.1, b_hi=5.0, sigma=1.0, k=2.0, d=1.0,
             g=(0.937, -11.223, 3.061), skip_charging=False):
        """
        four-node, five-road scenario with three stations: Q1 on e3, Q2 on
        e1, Q3 on e5; paths (e1,e4), (e2,e5) and (e2,e3,e4)
        """
        nodes = ['s', 'v1', 'v2', 't']
        edges = [Edge('e1', 's', 'v1', 5.0, 15.0, d),
                 Edge('e2', 's', 'v2', 5.0, 10.0, d),
                 Edge('e3', 'v2', 'v1', 1.0, 1.0, d),
                 Edge('e4', 'v1', 't', 5.0, 10.0, d),
                 Edge('e5', 'v2', 't', 5.0, 10.0, d)]
        stations = [Station('Q1', 'e3', sigma, k, g[0]),
                    Station('Q2', 'e1', sigma, k, g[1]),
                    Station('Q3', 'e5', sigma, k, g[2])]
        evs = [EV(str(i + 1), 's', 't', b, b_lo, b_hi) for i in range(n)]
        return cls(nodes, edges, stations, evs, skip_charging=skip_charging)

    @classmethod
    def testProblem(cls, n=4, seed=0, topology='parallel', num_links=2,
                    pricing_k=2.0, latency_d=1.0, identical=False,
                    skip_charging=False, ground_scale=np.sqrt(10.0),
                    b_lo=0.1, b_hi=5.0, free_flow=(5.0, 15.0)):
        """
        seeded random instance on a small topology: 'parallel' (num_links
        roads s->t with one station each), 'diamond' or 'fig2'
        """
        rng = np.random.default_rng(seed)

        if topology == 'parallel':
            nodes = ['s', 't']
            edge_ends = [('s', 't')]*num_links
            station_edges = list(range(num_links))
        elif topology == 'diamond':
            nodes = ['s', 'u', 'v', 't']
            edge_ends = [('s', 'u'), ('s', 'v'), ('u', 't'), ('v', 't')]
            station_edges = [0, 3]
        elif topology == 'fig2':
            nodes = ['s', 'v1', 'v2', 't']
            edge_ends = [('s', 'v1'), ('s', 'v2'), ('v2', 'v1'),
                         ('v1', 't'), ('v2', 't')]
            station_edges = [2, 0, 4]
        else:
            raise ValueError('unknown topology %r' % topology)

        edges = [Edge('e%d' % (idx + 1), tail, head,
                      float(rng.uniform(1.0, 5.0)),
                      float(rng.uniform(*free_flow)),
                      float(latency_d))
                 for idx, (tail, head) in enumerate(edge_ends)]
        stations = [Station('Q%d' % (j + 1), edges[e].id,
                            float(rng.uniform(0.5, 2.0)), float(pricing_k),
                            float(rng.normal(0.0, ground_scale)))
                    for j, e in enumerate(station_edges)]

        if identical:
            b = np.repeat(3.0, n)
        else:
            b = rng.uniform(b_lo + 0.5, b_hi - 0.5, size=n)
        evs = [EV(str(i + 1), 's', 't', float(b[i]), b_lo, b_hi)
               for i in range(n)]

        return cls(nodes, edges, stations, evs, skip_charging=skip_charging)


class Profile:
    """
    one Action per EV together with the derived occupancy: EV count per
    road, member set per station and aggregate station load
    """
    def __init__(self, scenario, actions, check=True):
        self.scenario = scenario
        self.actions = tuple(Action(tuple(a.path), int(a.station), float(a.load))
                             for a in actions)
        assert len(self.actions) == scenario.n

        if check:
            for i, a in enumerate(self.actions):
                scenario.check_action(i, a)

        occ = _occupancy(scenario, self.actions)
        self.n_e = occ.n_e
        self.members = occ.members
        self.loads = occ.loads
        self.counts = occ.counts

    def replace(self, i, action):
        actions = list(self.actions)
        actions[i] = action
        return Profile(self.scenario, actions, check=False)

    def load_vector(self):
        return np.array([a.load for a in self.actions])

    def assignment(self):
        return tuple((a.path, a.station) for a in self.actions)

    def canonical_key(self):
        """
        assignment with the choices of interchangeable EVs sorted, so that
        permuted profiles share one key
        """
        cls = self.scenario.ev_class
        groups = {}
        for i, a in enumerate(self.actions):
            groups.setdefault(int(cls[i]), []).append((a.path, a.station))
        return tuple((c, tuple(sorted(groups[c]))) for c in sorted(groups))

    def describe(self):
        return [self.scenario.describe(a) for a in self.actions]

    @classmethod
    def initial(cls, scenario, choice=None):
        """
        profile with zero loads; choice[i] indexes scenario.options(i),
        default is each EV's first option
        """
        actions = []
        for i in range(scenario.n):
            opts = scenario.options(i)
            p, j = opts[0 if choice is None else choice[i]]
            actions.append(Action(p, j, 0.0))
        return cls(scenario, actions, check=False)

    @classmethod
    def random(cls, scenario, rng, random_loads=False):
        """
        uniform (path, station) choice per EV; zero loads unless random_loads
        """
        actions = []
        for i in range(scenario.n):
            opts = scenario.options(i)
            p, j = opts[int(rng.integers(len(opts)))]
            load = 0.0
            if random_loads and not scenario.station_virtual[j]:
                lo, hi = scenario.load_bounds(i)
                load = float(rng.uniform(lo, hi))
            actions.append(Action(p, j, load))
        return cls(scenario, actions, check=False)


def _occupancy(scenario, actions):
    n_e = np.zeros(len(scenario.edges), dtype=int)
    members = [[] for _ in scenario.stations]
    loads = np.zeros(len(scenario.stations))
    for i, a in enumerate(actions):
        for e in a.path:
            n_e[e] += 1
        members[a.station].append(i)
        loads[a.station] += a.load
    return Occupancy(n_e, tuple(tuple(q) for q in members), loads)


def derive_occupancy(profile):
    """
    (n_e, Q_j, L_j) recomputed from the action vector
    """
    return _occupancy(profile.scenario, profile.actions)


# scenario documents
# -----------------------------------------------------------------------------
def _field(doc, key, path, kind=float, default=None):
    if not isinstance(doc, dict):
        raise ValidationError(path, 'must be an object')
    if key not in doc:
        if default is not None:
            return default
        raise ValidationError(path + '.' + key, 'missing field')
    value = doc[key]
    try:
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ValidationError(path + '.' + key, 'invalid value %r' % (value,))


def validate_scenario(document):
    """
    Build a validated Scenario from a parsed scenario document.

    Canonical keys: nodes, edges[{id,tail,head,a,b,d}],
    stations[{id,edge,sigma,k,g | ground}], evs[{id,s,t,b,b_lo,b_hi}],
    options{skip_charging, path_cap, pt}.
    """
    if not isinstance(document, dict):
        raise ValidationError('$', 'scenario document must be an object')
    for key in ('nodes', 'edges', 'stations', 'evs'):
        if not isinstance(document.get(key), list):
            raise ValidationError(key, 'missing list')

    nodes = [str(v) for v in document['nodes']]
    edges = []
    for idx, doc in enumerate(document['edges']):
        path = 'edges[%d]' % idx
        edges.append(Edge(_field(doc, 'id', path, str),
                          _field(doc, 'tail', path, str),
                          _field(doc, 'head', path, str),
                          _field(doc, 'a', path),
                          _field(doc, 'b', path),
                          _field(doc, 'd', path, default=1.0)))

    stations = []
    ground = {}
    for j, doc in enumerate(document['stations']):
        path = 'stations[%d]' % j
        sid = _field(doc, 'id', path, str)
        if 'ground' in doc:
            if not isinstance(doc['ground'], dict):
                raise ValidationError(path + '.ground', 'must be an object')
            ground[sid] = dict(doc['ground'])
        if 'g' in doc:
            g = _field(doc, 'g', path)
        elif 'ground' in doc:
            g = float(doc['ground'].get('mean', doc['ground'].get('value', 0.0)))
        else:
            raise ValidationError(path + '.g', 'missing ground load')
        stations.append(Station(sid,
                                _field(doc, 'edge', path, str),
                                _field(doc, 'sigma', path),
                                _field(doc, 'k', path),
                                g))

    evs = []
    for i, doc in enumerate(document['evs']):
        path = 'evs[%d]' % i
        evs.append(EV(_field(doc, 'id', path, str),
                      _field(doc, 's', path, str),
                      _field(doc, 't', path, str),
                      _field(doc, 'b', path),
                      _field(doc, 'b_lo', path),
                      _field(doc, 'b_hi', path)))

    options = document.get('options', {})
    if not isinstance(options, dict):
        raise ValidationError('options', 'must be an object')
    path_cap = _field(options, 'path_cap', 'options', int, default=PATH_CAP)
    if path_cap < 1:
        raise ValidationError('options.path_cap', 'must be >= 1')
    if options.get('pt') is not None and not isinstance(options['pt'], dict):
        raise ValidationError('options.pt', 'must be an object')

    scenario = Scenario(nodes, edges, stations, evs,
                        skip_charging=bool(options.get('skip_charging', False)),
                        path_cap=path_cap,
                        ground=ground or None,
                        pt=options.get('pt'))
    LOG.debug('validated scenario: %d nodes, %d edges, %d stations, %d evs',
              len(scenario.nodes), len(scenario.edges), scenario.m, scenario.n)
    return scenario


def scenario_to_document(scenario):
    ground = scenario.ground or {}
    stations = []
    for st in scenario.stations[:scenario.m]:
        doc = {'id': st.id, 'edge': st.edge, 'sigma': st.sigma,
               'k': st.k, 'g': st.g}
        if st.id in ground:
            doc['ground'] = dict(ground[st.id])
        stations.append(doc)

    options = {'skip_charging': scenario.skip_charging,
               'path_cap': scenario.path_cap}
    if scenario.pt is not None:
        options['pt'] = scenario.pt

    return {'nodes': list(scenario.nodes),
            'edges': [e._asdict() for e in scenario.edges],
            'stations': stations,
            'evs': [ev._asdict() for ev in scenario.evs],
            'options': options}
