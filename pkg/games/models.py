import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.conf import settings
from django.db import models

from core.exceptions import SpecError, StateSpaceTooLarge
from core.models import Direction, Game, OccupancyModel

GRID_TOL = 1e-9


class GameKind(models.TextChoices):
    NORMAL_FORM = 'normal_form', 'Normal form'
    COST_SHARING = 'cost_sharing', 'Cost sharing'
    NETWORK_CONTRIBUTION = 'network_contribution', 'Network contribution'
    WELFARE_SHARING = 'welfare_sharing', 'Welfare sharing'
    UTILITY_CONGESTION = 'utility_congestion', 'Utility congestion'


class EdgeFunction(models.TextChoices):
    CONSTANT = 'constant', 'c'
    PRODUCT = 'product', 'c * x_i * x_j'
    MIN = 'min', 'c * min(x_i, x_j)'
    THRESHOLD = 'threshold', 'H if both at full budget'
    SUM = 'sum', 'c * (x_i + x_j)'


def compositions(total, parts, exact=True):
    """Integer vectors of length `parts` summing to `total` (or at most `total`), lexicographic."""
    if parts == 0:
        # nothing to spend on: the budget stays idle
        yield ()
        return
    if parts == 1:
        for first in (range(total + 1) if not exact else (total,)):
            yield (first,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1, exact):
            yield (first,) + rest


def count_compositions(total, parts, exact=True):
    if parts == 0:
        return 1
    if exact:
        return math.comb(total + parts - 1, parts - 1)
    return math.comb(total + parts, parts)


def allocations(total, parts, exact):
    size = count_compositions(total, parts, exact)
    if size > settings.PROFILE_CAP:
        raise StateSpaceTooLarge(size, settings.PROFILE_CAP, 'allocations')
    return list(compositions(total, parts, exact))


def check_grid(effort, budget, grid, path):
    if effort < -GRID_TOL:
        raise SpecError({path: ['Effort must be non-negative.']})
    if budget == 0:
        if abs(effort) > GRID_TOL:
            raise SpecError({path: ['Effort exceeds a zero budget.']})
        return
    units = effort * grid / budget
    if abs(units - round(units)) > GRID_TOL:
        raise SpecError({path: [f"Effort {effort} is off the grid of step {budget / grid}."]})


class NormalForm:
    def __init__(self, names, utilities, direction, potential=None, out=None):
        self.names = names
        self.utilities = [np.asarray(u, dtype=float) for u in utilities]
        self.direction = direction
        self.potential_table = None if potential is None else np.asarray(potential, dtype=float)
        self.out = out

    def payoffs(self, s):
        return tuple(float(u[s]) for u in self.utilities)

    def potential(self, s):
        return float(self.potential_table[s])

    def to_game(self, label=''):
        return Game(
            [len(names) for names in self.names],
            self.payoffs,
            direction=self.direction,
            out_strategies=self.out,
            potential=self.potential if self.potential_table is not None else None,
            strategy_names=self.names,
            family=GameKind.NORMAL_FORM,
            label=label,
        )


class CostSharing:
    """Resources with costs shared equally among their live users."""

    def __init__(self, resource_ids, costs, strategies):
        self.resource_ids = tuple(resource_ids)
        self.costs = tuple(float(c) for c in costs)
        self.strategies = [tuple(tuple(s) for s in player) for player in strategies]

    def resources_of(self, i, k):
        if k == len(self.strategies[i]):
            return ()
        return self.strategies[i][k]

    def occupancy(self, s):
        counts = [0] * len(self.resource_ids)
        for i, k in enumerate(s):
            for r in self.resources_of(i, k):
                counts[r] += 1
        return counts

    def cost_share_cost(self, i, s):
        counts = self.occupancy(s)
        return sum(self.costs[r] / counts[r] for r in self.resources_of(i, s[i]))

    def payoffs(self, s):
        counts = self.occupancy(s)
        return tuple(
            sum(self.costs[r] / counts[r] for r in self.resources_of(i, k))
            for i, k in enumerate(s)
        )

    def rosenthal_potential(self, s):
        counts = self.occupancy(s)
        return sum(
            self.costs[r] * sum(1.0 / k for k in range(1, count + 1))
            for r, count in enumerate(counts)
        )

    def occupancy_model(self):
        universe = tuple(dict.fromkeys(s for player in self.strategies for s in player))
        return OccupancyModel(
            resources=self.resource_ids,
            unit_values=tuple((lambda k, c=c: c / k) for c in self.costs),
            strategies=universe,
        )

    def to_game(self, label=''):
        return Game(
            [len(player) for player in self.strategies],
            self.payoffs,
            direction=Direction.COST_MIN,
            out_strategies=[len(player) for player in self.strategies],
            potential=self.rosenthal_potential,
            strategy_names=[
                ['+'.join(self.resource_ids[r] for r in s) or 'none' for s in player]
                for player in self.strategies
            ],
            occupancy=self.occupancy_model(),
            family=GameKind.COST_SHARING,
            label=label,
        )


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    fn: str
    params: dict

    def value(self, xa, xb, budget_a, budget_b):
        if self.fn == EdgeFunction.CONSTANT:
            return self.params['c']
        if self.fn == EdgeFunction.PRODUCT:
            return self.params['c'] * xa * xb
        if self.fn == EdgeFunction.MIN:
            return self.params['c'] * min(xa, xb)
        if self.fn == EdgeFunction.SUM:
            return self.params['c'] * (xa + xb)
        full = abs(xa - budget_a) <= GRID_TOL and abs(xb - budget_b) <= GRID_TOL
        return self.params['H'] if full else 0.0


class NetworkContribution:
    """
    Nodes split an effort budget over incident edges; each edge's value is
    halved between its endpoints. An absent (out) node kills its edges.
    """

    def __init__(self, node_ids, budgets, edges, grid):
        self.node_ids = tuple(node_ids)
        self.budgets = tuple(float(b) for b in budgets)
        self.edges = tuple(edges)
        self.grid = grid
        self.incident = [
            tuple(e for e, edge in enumerate(self.edges) if i in (edge.a, edge.b))
            for i in range(len(self.node_ids))
        ]
        self.allocations = [
            [(0,) * len(self.incident[i])] if self.budgets[i] == 0
            else allocations(grid, len(self.incident[i]), exact=True)
            for i in range(len(self.node_ids))
        ]

    def efforts_of(self, s):
        """Per-node effort tuples aligned with incident edges; None for absent nodes."""
        efforts = []
        for i, k in enumerate(s):
            if k == len(self.allocations[i]):
                efforts.append(None)
            else:
                step = self.budgets[i] / self.grid
                efforts.append(tuple(units * step for units in self.allocations[i][k]))
        return efforts

    def validate_efforts(self, efforts):
        for i, x in enumerate(efforts):
            if x is None:
                continue
            path = f"efforts.{i}"
            if len(x) != len(self.incident[i]):
                raise SpecError({path: [f"Expected {len(self.incident[i])} edge efforts."]})
            for e, effort in enumerate(x):
                check_grid(effort, self.budgets[i], self.grid, f"{path}.{e}")
            if self.incident[i] and abs(sum(x) - self.budgets[i]) > GRID_TOL:
                raise SpecError({path: [f"Efforts must sum to the budget {self.budgets[i]}."]})

    def edge_values(self, efforts):
        values = []
        for e, edge in enumerate(self.edges):
            xa, xb = efforts[edge.a], efforts[edge.b]
            if xa is None or xb is None:
                values.append(0.0)
                continue
            values.append(edge.value(
                xa[self.incident[edge.a].index(e)], xb[self.incident[edge.b].index(e)],
                self.budgets[edge.a], self.budgets[edge.b],
            ))
        return values

    def contribution_utility(self, i, efforts):
        self.validate_efforts(efforts)
        if efforts[i] is None:
            return 0.0
        values = self.edge_values(efforts)
        return sum(values[e] / 2 for e in self.incident[i])

    def payoffs(self, s):
        efforts = self.efforts_of(s)
        values = self.edge_values(efforts)
        return tuple(
            0.0 if efforts[i] is None else sum(values[e] / 2 for e in self.incident[i])
            for i in range(len(self.node_ids))
        )

    def potential(self, s):
        return sum(self.payoffs(s)) / 2

    def edge_key(self, e):
        edge = self.edges[e]
        return f"{self.node_ids[edge.a]}-{self.node_ids[edge.b]}"

    def allocation_name(self, i, units):
        parts = [f"{self.edge_key(e)}:{u}" for e, u in zip(self.incident[i], units) if u]
        return ','.join(parts) or 'idle'

    def to_game(self, label=''):
        names = [
            [self.allocation_name(i, units) for units in self.allocations[i]]
            for i in range(len(self.node_ids))
        ]
        return Game(
            [len(a) for a in self.allocations],
            self.payoffs,
            direction=Direction.UTILITY_MAX,
            out_strategies=[len(a) for a in self.allocations],
            potential=self.potential,
            strategy_names=names,
            family=GameKind.NETWORK_CONTRIBUTION,
            label=label,
        )


@dataclass(frozen=True)
class Factor:
    a: float
    cap: Optional[float] = None

    def __call__(self, total_effort):
        value = self.a * total_effort
        return value if self.cap is None else min(self.cap, value)


class WelfareSharing:
    """
    Projects valued as a product of capped per-skill-group sums; each project's
    value is shared in proportion to participants' marginal contributions.
    """

    def __init__(self, project_ids, factors, budgets, groups, participation, grid):
        self.project_ids = tuple(project_ids)
        self.budgets = tuple(float(b) for b in budgets)
        self.groups = tuple(groups)
        self.participation = [tuple(p) for p in participation]
        self.grid = grid
        n = len(self.budgets)
        self.members = [
            tuple(i for i in range(n) if j in self.participation[i])
            for j in range(len(self.project_ids))
        ]
        self.skill_groups = [
            tuple(sorted({self.groups[i] for i in members})) for members in self.members
        ]
        self.factors = [
            {group: factors[j][group] for group in self.skill_groups[j]}
            for j in range(len(self.project_ids))
        ]
        self.allocations = [
            [(0,) * len(self.participation[i])] if self.budgets[i] == 0
            else allocations(grid, len(self.participation[i]), exact=False)
            for i in range(n)
        ]

    @property
    def max_skill_groups(self):
        return max((len(groups) for groups in self.skill_groups), default=0)

    def efforts_of(self, s):
        efforts = []
        for i, k in enumerate(s):
            if k == len(self.allocations[i]):
                efforts.append(None)
            else:
                step = self.budgets[i] / self.grid
                efforts.append(tuple(units * step for units in self.allocations[i][k]))
        return efforts

    def validate_efforts(self, efforts):
        for i, x in enumerate(efforts):
            if x is None:
                continue
            path = f"efforts.{i}"
            if len(x) != len(self.participation[i]):
                raise SpecError({path: [f"Expected {len(self.participation[i])} project efforts."]})
            for p, effort in enumerate(x):
                check_grid(effort, self.budgets[i], self.grid, f"{path}.{p}")
            if sum(x) > self.budgets[i] + GRID_TOL:
                raise SpecError({path: [f"Efforts exceed the budget {self.budgets[i]}."]})

    def project_effort(self, j, efforts):
        """Effort each participant of project j puts into it."""
        placed = {}
        for i in self.members[j]:
            x = efforts[i]
            placed[i] = 0.0 if x is None else x[self.participation[i].index(j)]
        return placed

    def project_value(self, j, placed):
        value = 1.0
        for group in self.skill_groups[j]:
            value *= self.factors[j][group](
                sum(x for i, x in placed.items() if self.groups[i] == group)
            )
        return value

    def project_shares(self, j, efforts):
        placed = self.project_effort(j, efforts)
        value = self.project_value(j, placed)
        marginals = {
            i: value - self.project_value(j, {**placed, i: 0.0}) for i in self.members[j]
        }
        total = sum(marginals.values())
        if total <= 0:
            return {i: 0.0 for i in self.members[j]}
        return {i: marginals[i] / total * value for i in self.members[j]}

    def welfare_share_utility(self, i, efforts):
        self.validate_efforts(efforts)
        return sum(self.project_shares(j, efforts)[i] for j in self.participation[i])

    def payoffs(self, s):
        efforts = self.efforts_of(s)
        utilities = [0.0] * len(self.budgets)
        for j in range(len(self.project_ids)):
            for i, share in self.project_shares(j, efforts).items():
                utilities[i] += share
        return tuple(utilities)

    def to_game(self, label=''):
        names = [
            [','.join(f"{self.project_ids[j]}:{u}" for j, u in zip(self.participation[i], units) if u) or 'idle'
             for units in self.allocations[i]]
            for i in range(len(self.budgets))
        ]
        return Game(
            [len(a) for a in self.allocations],
            self.payoffs,
            direction=Direction.UTILITY_MAX,
            out_strategies=[len(a) for a in self.allocations],
            strategy_names=names,
            family=GameKind.WELFARE_SHARING,
            label=label,
        )


class UtilityCongestion:
    """Players pick resource sets; resource r pays each of its k users pi_r(k)."""

    def __init__(self, resource_ids, tables, harmonic_values, strategies):
        self.resource_ids = tuple(resource_ids)
        self.tables = tuple(None if t is None else tuple(float(v) for v in t) for t in tables)
        self.harmonic_values = tuple(harmonic_values)
        self.strategies = [tuple(tuple(s) for s in player) for player in strategies]

    def unit_value(self, r, k):
        table = self.tables[r]
        if table is None:
            return self.harmonic_values[r] / k
        return table[min(k, len(table)) - 1]

    def resources_of(self, i, k):
        if k == len(self.strategies[i]):
            return ()
        return self.strategies[i][k]

    def occupancy(self, s):
        counts = [0] * len(self.resource_ids)
        for i, k in enumerate(s):
            for r in self.resources_of(i, k):
                counts[r] += 1
        return counts

    def congestion_utility(self, i, s):
        counts = self.occupancy(s)
        return sum(self.unit_value(r, counts[r]) for r in self.resources_of(i, s[i]))

    def payoffs(self, s):
        counts = self.occupancy(s)
        return tuple(
            sum(self.unit_value(r, counts[r]) for r in self.resources_of(i, k))
            for i, k in enumerate(s)
        )

    def rosenthal_potential(self, s):
        counts = self.occupancy(s)
        return sum(
            self.unit_value(r, k) for r, count in enumerate(counts) for k in range(1, count + 1)
        )

    def occupancy_model(self):
        universe = tuple(dict.fromkeys(s for player in self.strategies for s in player))
        return OccupancyModel(
            resources=self.resource_ids,
            unit_values=tuple((lambda k, r=r: self.unit_value(r, k)) for r in range(len(self.resource_ids))),
            strategies=universe,
        )

    def to_game(self, label=''):
        return Game(
            [len(player) for player in self.strategies],
            self.payoffs,
            direction=Direction.UTILITY_MAX,
            out_strategies=[len(player) for player in self.strategies],
            potential=self.rosenthal_potential,
            strategy_names=[
                ['+'.join(self.resource_ids[r] for r in s) or 'none' for s in player]
                for player in self.strategies
            ],
            occupancy=self.occupancy_model(),
            family=GameKind.UTILITY_CONGESTION,
            label=label,
        )
