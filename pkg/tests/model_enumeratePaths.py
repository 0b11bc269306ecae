# test function enumerate_paths


def model_enumeratePaths():
    import numpy as np
    from evroute.model import Scenario, Network, Edge, enumerate_paths
    from evroute.utils import PathExplosionError

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    scenario = Scenario.fig2()
    tr_paths = [('e1', 'e4'), ('e2', 'e3', 'e4'), ('e2', 'e5')]
    my_paths = enumerate_paths(scenario.network, 's', 't')
    ok = ok and my_paths == tr_paths

    ok = ok and enumerate_paths(scenario.network, 'v1', 'v1') == [()]

    single = Network(['s', 't'], [Edge('e', 's', 't', 1.0, 1.0)])
    ok = ok and enumerate_paths(single, 's', 't') == [('e',)]

    try:
        enumerate_paths(scenario.network, 's', 't', cap=2)
        ok = False
    except PathExplosionError:
        pass

    # depth first search on random multigraphs
    rng = np.random.default_rng(123)
    nodes = ['n%d' % v for v in range(6)]
    for trial in range(20):
        edges = []
        for idx in range(10):
            tail, head = rng.choice(6, size=2, replace=False)
            edges.append(Edge('r%02d' % idx, nodes[tail], nodes[head], 1.0, 1.0))
        net = Network(nodes, edges)

        found = []

        def dfs(node, visited, path):
            if node == 'n5':
                found.append(tuple(path))
                return
            for e in edges:
                if e.tail == node and e.head not in visited:
                    dfs(e.head, visited | {e.head}, path + [e.id])

        dfs('n0', {'n0'}, [])
        if enumerate_paths(net, 'n0', 'n5') != sorted(found):
            ok = False
            print('trial', trial, 'paths disagree')

    if not ok:
        print('tr_paths', tr_paths)
        print('my_paths', my_paths)

    return ok
