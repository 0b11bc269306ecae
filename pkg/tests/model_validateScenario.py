# test function validate_scenario


def model_validateScenario():
    import copy
    from evroute.model import Scenario, validate_scenario, scenario_to_document
    from evroute.utils import ValidationError

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    doc = scenario_to_document(Scenario.fig2())

    def rejected_at(mutate, tr_path):
        bad = copy.deepcopy(doc)
        mutate(bad)
        try:
            validate_scenario(bad)
        except ValidationError as err:
            if err.path != tr_path:
                print('expected', tr_path, 'got', err.path)
            return err.path == tr_path
        print('accepted, expected rejection at', tr_path)
        return False

    def set_field(key, idx, field, value):
        def mutate(d):
            d[key][idx][field] = value
        return mutate

    def unreachable(d):
        d['nodes'].append('x')
        d['evs'][0]['t'] = 'x'

    ok = ok and rejected_at(set_field('evs', 0, 'b_lo', 0.0), 'evs[0].b_lo')
    ok = ok and rejected_at(set_field('evs', 2, 'b_lo', 5.0), 'evs[2].b_hi')
    ok = ok and rejected_at(set_field('evs', 1, 'b', 6.0), 'evs[1].b')
    ok = ok and rejected_at(set_field('stations', 0, 'edge', 'e9'),
                            'stations[0].edge')
    ok = ok and rejected_at(set_field('stations', 1, 'sigma', 0.0),
                            'stations[1].sigma')
    ok = ok and rejected_at(set_field('stations', 2, 'k', 0.0),
                            'stations[2].k')
    ok = ok and rejected_at(set_field('edges', 0, 'd', 0.5), 'edges[0].d')
    ok = ok and rejected_at(set_field('edges', 3, 'a', -1.0), 'edges[3].a')
    ok = ok and rejected_at(unreachable, 'evs[0].t')

    # malformed entries are rejected, never raised raw
    def replace_entry(key, idx, value):
        def mutate(d):
            d[key][idx] = value
        return mutate

    def set_option(field, value):
        def mutate(d):
            d['options'][field] = value
        return mutate

    ok = ok and rejected_at(replace_entry('evs', 1, ['1', 's', 't']), 'evs[1]')
    ok = ok and rejected_at(replace_entry('edges', 0, 'e1'), 'edges[0]')
    ok = ok and rejected_at(set_field('stations', 0, 'ground', [0.0, 10.0]),
                            'stations[0].ground')
    ok = ok and rejected_at(set_option('path_cap', 'many'), 'options.path_cap')
    ok = ok and rejected_at(set_option('path_cap', None), 'options.path_cap')
    ok = ok and rejected_at(set_option('path_cap', 0), 'options.path_cap')
    ok = ok and rejected_at(set_option('pt', [0.75, 0.88]), 'options.pt')

    good = copy.deepcopy(doc)
    good['options']['skip_charging'] = True
    scenario = validate_scenario(good)
    ok = ok and scenario.n == 9 and scenario.m == 3
    ok = ok and len(scenario.stations) == 3 + 5
    ok = ok and all(st.virtual for st in scenario.stations[3:])

    return ok
