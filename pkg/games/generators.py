"""
Game-spec generators: the named fixtures and seeded random families.

Every generator returns a JSON-ready spec dict accepted by `GameLoader.load_game`;
random families draw from `numpy.random.Generator(PCG64(seed))` only, so equal
arguments give equal specs.
"""
import numpy as np

from core.exceptions import InvalidArgument
from games.models import EdgeFunction, GameKind


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


def money(value):
    return round(float(value), 2)


def g1():
    """Two players share a road of cost 1 or each take a private road of cost 0.9."""
    return {
        'kind': GameKind.COST_SHARING.value,
        'payload': {
            'resources': [
                {'id': 'shared', 'cost': 1.0},
                {'id': 'own1', 'cost': 0.9},
                {'id': 'own2', 'cost': 0.9},
            ],
            'players': [
                {'strategies': [['shared'], ['own1']]},
                {'strategies': [['shared'], ['own2']]},
            ],
        },
    }


def g2():
    """Prisoner's dilemma; strategy 0 cooperates."""
    return {
        'kind': GameKind.NORMAL_FORM.value,
        'payload': {
            'players': 2,
            'strategies': [['C', 'D'], ['C', 'D']],
            'utilities': [
                [[3, 0], [4, 1]],
                [[3, 4], [0, 1]],
            ],
            'direction': 'utility',
        },
    }


def g3(H=10.0):
    """Line A-B-C-D: constant outer edges, a threshold edge worth H in the middle."""
    return {
        'kind': GameKind.NETWORK_CONTRIBUTION.value,
        'payload': {
            'nodes': [{'id': node, 'budget': 1.0} for node in 'ABCD'],
            'edges': [
                {'a': 'A', 'b': 'B', 'fn': EdgeFunction.CONSTANT.value, 'params': {'c': 1.0}},
                {'a': 'B', 'b': 'C', 'fn': EdgeFunction.THRESHOLD.value, 'params': {'H': float(H)}},
                {'a': 'C', 'b': 'D', 'fn': EdgeFunction.CONSTANT.value, 'params': {'c': 1.0}},
            ],
            'grid': 1,
        },
    }


def g4():
    """Two players, two resources with harmonic values 2 and 1."""
    return {
        'kind': GameKind.UTILITY_CONGESTION.value,
        'payload': {
            'resources': [{'id': 'r1', 'harmonic': 2.0}, {'id': 'r2', 'harmonic': 1.0}],
            'players': [
                {'strategies': [['r1'], ['r2']]},
                {'strategies': [['r1'], ['r2']]},
            ],
        },
    }


def g5(budget=1.0, grid=1):
    """One project valued x_1 * x_2 by two single-member skill groups."""
    return {
        'kind': GameKind.WELFARE_SHARING.value,
        'payload': {
            'projects': [{
                'id': 'P',
                'factors': {'g1': {'a': 1.0, 'cap': None}, 'g2': {'a': 1.0, 'cap': None}},
            }],
            'players': [
                {'budget': float(budget), 'group': 'g1', 'projects': ['P']},
                {'budget': float(budget), 'group': 'g2', 'projects': ['P']},
            ],
            'grid': grid,
        },
    }


def random_subsets(rng, r, count, max_size):
    """Up to `count` distinct nonempty resource subsets, in draw order."""
    subsets = []
    for _ in range(count):
        size = int(rng.integers(1, max_size + 1))
        subset = tuple(sorted(int(x) for x in rng.choice(r, size=size, replace=False)))
        if subset not in subsets:
            subsets.append(subset)
    return subsets


def check_sizes(n, r=1):
    if n < 1 or r < 1:
        raise InvalidArgument(f"Need at least one player and one resource, got n={n}, r={r}.")


def random_cost_sharing(n=3, r=4, seed=0):
    check_sizes(n, r)
    rng = rng_for(seed)
    ids = [f"r{k + 1}" for k in range(r)]
    costs = [money(c) for c in rng.uniform(0.5, 2.0, size=r)]
    players = []
    for _ in range(n):
        subsets = random_subsets(rng, r, int(rng.integers(1, 4)), min(2, r))
        players.append({'strategies': [[ids[k] for k in s] for s in subsets]})
    return {
        'kind': GameKind.COST_SHARING.value,
        'payload': {
            'resources': [{'id': i, 'cost': c} for i, c in zip(ids, costs)],
            'players': players,
        },
    }


def random_congestion(n=3, r=3, seed=0, increasing=False):
    """Per-occupancy tables, non-increasing unless `increasing` (then strictly increasing in k)."""
    check_sizes(n, r)
    rng = rng_for(seed)
    ids = [f"r{k + 1}" for k in range(r)]
    resources = []
    for resource in ids:
        base = money(rng.uniform(0.5, 3.0))
        if increasing:
            table = [money(base * k) for k in range(1, n + 1)]
        else:
            table = sorted((money(v) for v in rng.uniform(0.0, base, size=n - 1)), reverse=True)
            table = [base] + table
        resources.append({'id': resource, 'pi': table})
    players = []
    for _ in range(n):
        subsets = random_subsets(rng, r, int(rng.integers(1, 4)), min(2, r))
        players.append({'strategies': [[ids[k] for k in s] for s in subsets]})
    return {
        'kind': GameKind.UTILITY_CONGESTION.value,
        'payload': {'resources': resources, 'players': players},
    }


def random_contribution(n=4, seed=0, grid=1, density=0.6):
    check_sizes(n)
    rng = rng_for(seed)
    ids = [chr(ord('A') + k) if n <= 26 else f"v{k}" for k in range(n)]
    functions = [f.value for f in EdgeFunction]
    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() >= density:
                continue
            fn = functions[int(rng.integers(len(functions)))]
            key = 'H' if fn == EdgeFunction.THRESHOLD else 'c'
            edges.append({'a': ids[a], 'b': ids[b], 'fn': fn, 'params': {key: money(rng.uniform(0.5, 3.0))}})
    return {
        'kind': GameKind.NETWORK_CONTRIBUTION.value,
        'payload': {
            'nodes': [{'id': i, 'budget': 1.0} for i in ids],
            'edges': edges,
            'grid': grid,
        },
    }


def random_welfare_sharing(n=3, seed=0, projects=2, groups=2, grid=1, caps=True):
    """Random projects and skill groups; `caps=False` leaves every factor linear."""
    check_sizes(n, projects)
    rng = rng_for(seed)
    project_ids = [f"P{k + 1}" for k in range(projects)]
    group_ids = [f"g{k + 1}" for k in range(groups)]
    players = []
    for _ in range(n):
        joined = random_subsets(rng, projects, 1, projects)[0]
        players.append({
            'budget': 1.0,
            'group': group_ids[int(rng.integers(groups))],
            'projects': [project_ids[j] for j in joined],
        })
    specs = []
    for project in project_ids:
        factors = {}
        for group in group_ids:
            cap = money(rng.uniform(0.5, 2.0)) if rng.random() < 0.5 else None
            if not caps:
                cap = None
            factors[group] = {'a': money(rng.uniform(0.5, 2.0)), 'cap': cap}
        specs.append({'id': project, 'factors': factors})
    return {
        'kind': GameKind.WELFARE_SHARING.value,
        'payload': {'projects': specs, 'players': players, 'grid': grid},
    }


def random_normal_form(n=2, seed=0, strategies=2, direction='utility'):
    check_sizes(n)
    rng = rng_for(seed)
    shape = (strategies,) * n
    return {
        'kind': GameKind.NORMAL_FORM.value,
        'payload': {
            'players': n,
            'strategies': [[f"s{k}" for k in range(strategies)] for _ in range(n)],
            'utilities': [rng.integers(0, 10, size=shape).tolist() for _ in range(n)],
            'direction': direction,
        },
    }


FIXTURES = {
    'g1': g1,
    'g2': g2,
    'g3': g3,
    'g4': g4,
    'g5': g5,
    'random-cost-sharing': random_cost_sharing,
    'random-congestion': random_congestion,
    'random-contribution': random_contribution,
    'random-welfare-sharing': random_welfare_sharing,
    'random-normal-form': random_normal_form,
}
