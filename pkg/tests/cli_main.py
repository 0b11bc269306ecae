# test function main


def cli_main():
    import os
    import json
    import tempfile
    import pandas as pd
    from evroute.cli import main

    ok = True
    # setup test problem
    # -------------------------------------------------------------------------
    folder = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                          '..', 'scenarios')
    fig2 = os.path.join(folder, 'fig2.json')
    stochastic = os.path.join(folder, 'fig2_stochastic.json')

    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'hoeffding')
        code = main(['-q', 'hoeffding', stochastic, '--K', '20',
                     '--fail-eps', '0.05', '--out', out])
        ok = ok and code == 0
        results = pd.read_csv(os.path.join(out, 'results.csv'))
        ok = ok and int(results['fleet_size'][0]) == 405

        out = os.path.join(tmp, 'validate')
        ok = ok and main(['-q', 'validate', fig2, '--out', out]) == 0
        with open(os.path.join(out, 'result.json')) as fh:
            doc = json.load(fh)
        ok = ok and doc['evs'] == 9 and len(doc['paths']['1']) == 3

        bad = os.path.join(tmp, 'bad.json')
        with open(fig2) as fh:
            document = json.load(fh)
        document['evs'][0]['b_lo'] = 0.0
        with open(bad, 'w') as fh:
            json.dump(document, fh)
        ok = ok and main(['-q', 'validate', bad]) == 2

        for key, value in (('evs', ['1', 's', 't']), ('path_cap', 'many')):
            with open(fig2) as fh:
                document = json.load(fh)
            if key == 'evs':
                document['evs'][0] = value
            else:
                document.setdefault('options', {})['path_cap'] = value
            with open(bad, 'w') as fh:
                json.dump(document, fh)
            ok = ok and main(['-q', 'validate', bad]) == 2

        # stochastic modes need a seed
        ok = ok and main(['-q', 'montecarlo', stochastic, '--out', tmp]) == 2

        # enumeration over budget inside a sweep cell
        code = main(['-q', 'sweep', fig2, '--mode', 'enumerate', '--fleet', '3',
                     '--budget', '1', '--out', os.path.join(tmp, 'sweep')])
        ok = ok and code == 4

        # and outside of one
        ok = ok and main(['-q', 'enumerate', fig2, '--budget', '1']) == 3

    return ok
