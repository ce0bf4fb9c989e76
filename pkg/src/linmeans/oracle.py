"""Brute-force validators for small instances; no LP anywhere in this module."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from ._linalg import rank, solve_linear
from .core import CapacityError, Dataset, UnknownAgent, sign

MAX_ALTERNATIVES = 4
MAX_GROUPS = 4
MAX_GROUP_SIZE = 3
MAX_HULL_POINTS = 4
MAX_HULL_DIM = 4


@dataclass(frozen=True)
class GridSpec:
    resolution: int
    weight_resolution: int

    def __post_init__(self):
        if self.resolution < 1 or self.weight_resolution < 1:
            raise ValueError("grid resolutions must be positive")


@dataclass(frozen=True)
class GridResult:
    found: bool
    v: tuple | None = None
    weights: Mapping | None = None


def compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _group_candidates(d: Dataset, obs, agent: str, g: GridSpec) -> dict:
    """Grid ideal points reachable in one group, each with the first weight vector that reaches it."""
    K, M = g.resolution, g.weight_resolution
    peers = d.ordered(obs.group - {agent})
    p = obs.choices[agent]
    out: dict[tuple, tuple] = {}
    for comp in compositions(M, len(peers) + 1):
        if comp[0] < 1:
            continue
        w_self = Fraction(comp[0], M)
        v = list(p)
        for j, c in zip(peers, comp[1:]):
            if c:
                v = [a - Fraction(c, M) * b for a, b in zip(v, obs.choices[j])]
        v = tuple(a / w_self for a in v)
        if any(x < 0 for x in v) or any((x * K).denominator != 1 for x in v):
            continue
        out.setdefault(v, dict(zip([agent] + peers, (Fraction(c, M) for c in comp))))
    return out


def grid_glm_oracle(d: Dataset, agent: str, g: GridSpec) -> GridResult:
    """Exhaustive search for a grid ideal point and grid weights reproducing every group."""
    if agent not in d.agents:
        raise UnknownAgent(agent)
    groups = d.groups_of(agent)
    if d.dim > MAX_ALTERNATIVES:
        raise CapacityError(f"{d.dim} alternatives exceed the oracle bound {MAX_ALTERNATIVES}")
    if len(groups) > MAX_GROUPS:
        raise CapacityError(f"{len(groups)} groups exceed the oracle bound {MAX_GROUPS}")
    if any(len(o.group) > MAX_GROUP_SIZE for o in groups):
        raise CapacityError(f"groups larger than {MAX_GROUP_SIZE} exceed the oracle bound")
    if not groups:
        return GridResult(False)
    tables = [_group_candidates(d, o, agent, g) for o in groups]
    common = set(tables[0])
    for t in tables[1:]:
        common &= set(t)
    if not common:
        return GridResult(False)
    v = min(common)
    weights = {d.group_label(o.group): t[v] for o, t in zip(groups, tables)}
    return GridResult(True, v, weights)


def hull_membership_oracle(point: Sequence, hull_points: Sequence[Sequence]) -> bool:
    """Membership via barycentric solves over every affinely independent subset."""
    if len(hull_points) > MAX_HULL_POINTS:
        raise CapacityError(f"{len(hull_points)} hull points exceed the oracle bound {MAX_HULL_POINTS}")
    if hull_points and len(hull_points[0]) > MAX_HULL_DIM:
        raise CapacityError(f"dimension {len(hull_points[0])} exceeds the oracle bound {MAX_HULL_DIM}")
    dim = len(point)
    for r in range(1, len(hull_points) + 1):
        for subset in combinations(hull_points, r):
            base = subset[0]
            diffs = [tuple(a - b for a, b in zip(q, base)) for q in subset[1:]]
            if diffs and rank(diffs) < len(diffs):
                continue
            A = [[q[x] for q in subset] for x in range(dim)] + [[1] * r]
            b = list(point) + [1]
            lam, _ = solve_linear(A, b)
            if lam is not None and all(sign(x) >= 0 for x in lam):
                return True
    return False
