"""Equilibrium data from the seven influence models, plus seeded random instances.

Randomness comes from :class:`random.Random` (Mersenne Twister) seeded per
call; per-group streams mix the seed with a SHA-256 of the group label so a
group's draws do not depend on generation order. Every random number is a
rational on a small grid so all downstream checks stay exact.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

from ._linalg import rref
from .core import (
    CapacityError,
    Dataset,
    Observation,
    SingularSpec,
    SpecError,
    dataset_to_json,
    format_number,
    format_vector,
    in_simplex,
    parse_number,
)
from .identify import InfluenceRow, verify_equilibrium

UNIFORM = "uniform"
LUCE = "luce"
CLUB = "club"
FRIENDSHIP = "friendship"
PARTICIPATION = "random_participation"
ARRIVAL = "random_arrival"
GENERAL = "general"
KINDS = (UNIFORM, LUCE, CLUB, FRIENDSHIP, PARTICIPATION, ARRIVAL, GENERAL)

PARTICIPATION_CAP = 12


@dataclass(frozen=True)
class InfluenceSpec:
    """One influence model and its parameters.

    Only the fields relevant to ``kind`` are read:

    * luce: ``w[i][j]``
    * club: ``partition`` (list of agent lists) and ``alpha[i][k]`` per club index
    * friendship: ``rank[i]`` (others, best first), ``alpha_self[i]``, ``rank_weight[j][r-1]``
    * random_participation: ``gamma[i]`` and base weights ``w[i][j]``
    * random_arrival: ``arrangements`` as ``(q, weights)``; weights map agent to a
      number, or agent to a per-agent map when ``per_agent`` is set
    * general: ``pi[group_label][i]`` as a map over group members
    """

    kind: str
    w: Mapping = field(default_factory=dict)
    partition: tuple = ()
    alpha: Mapping = field(default_factory=dict)
    rank: Mapping = field(default_factory=dict)
    alpha_self: Mapping = field(default_factory=dict)
    rank_weight: Mapping = field(default_factory=dict)
    gamma: Mapping = field(default_factory=dict)
    arrangements: tuple = ()
    per_agent: bool = False
    pi: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown influence kind {self.kind!r}")
        if self.kind == CLUB:
            seen = [a for club in self.partition for a in club]
            if len(seen) != len(set(seen)):
                raise SpecError("club partition is not disjoint")
        if self.kind == ARRIVAL:
            if not self.arrangements or sum(Fraction(q) for q, _ in self.arrangements) != 1:
                raise SpecError("arrangement probabilities must sum to 1")
        if self.kind == FRIENDSHIP:
            for a, x in self.alpha_self.items():
                if not 0 < x < 1:
                    raise SpecError(f"self weight of {a} must lie in (0, 1)")
        if self.kind == PARTICIPATION:
            for a, x in self.gamma.items():
                if not 0 < x < 1:
                    raise SpecError(f"attendance probability of {a} must lie in (0, 1)")


def _label(group: Iterable[str]) -> str:
    return ",".join(sorted(group))


def _need(table: Mapping, key, what: str):
    if key not in table:
        raise SpecError(f"{what} missing for {key}")
    return table[key]


def _luce_row(w_i: Mapping, i: str, members: Iterable[str]) -> dict:
    members = list(members)
    for j in members:
        _need(w_i, j, f"weight of {i} on")
    total = sum(w_i[j] for j in members)
    return {j: Fraction(w_i[j]) / total for j in members}


def build_influence(spec: InfluenceSpec, group: Iterable[str], label: str | None = None) -> dict[str, InfluenceRow]:
    members = sorted(set(group))
    if not members:
        raise SpecError("empty group")
    label = label or _label(members)
    rows = {}
    for i in members:
        if spec.kind == UNIFORM:
            row = {j: Fraction(1, len(members)) for j in members}
        elif spec.kind == LUCE:
            row = _luce_row(_need(spec.w, i, "weights"), i, members)
        elif spec.kind == CLUB:
            row = _club_row(spec, i, members)
        elif spec.kind == FRIENDSHIP:
            row = _friendship_row(spec, i, members)
        elif spec.kind == PARTICIPATION:
            row = _participation_row(spec, i, members)
        elif spec.kind == ARRIVAL:
            row = _arrival_row(spec, i, members)
        else:
            table = _need(spec.pi, label, "influence rows")
            row = {j: Fraction(x) for j, x in _need(table, i, "row").items()}
            if set(row) != set(members):
                raise SpecError(f"row of {i} in {label} does not cover the group")
        if any(x < 0 for x in row.values()) or sum(row.values()) != 1:
            raise AssertionError(f"row of {i} in {label} is not stochastic")
        rows[i] = InfluenceRow(i, label, row)
    return rows


def _club_row(spec, i, members):
    club_of = {}
    for k, club in enumerate(spec.partition):
        for a in club:
            club_of[a] = k
    for a in members:
        _need(club_of, a, "club")
    present = sorted({club_of[a] for a in members})
    alpha_i = _need(spec.alpha, i, "club weights")
    total = sum(Fraction(_need(alpha_i, k, f"weight of {i} on club")) for k in present)
    sizes = {k: sum(1 for a in members if club_of[a] == k) for k in present}
    return {j: Fraction(alpha_i[club_of[j]]) / total / sizes[club_of[j]] for j in members}


def _friendship_row(spec, i, members):
    peers = [j for j in members if j != i]
    if not peers:
        return {i: Fraction(1)}
    alpha = Fraction(_need(spec.alpha_self, i, "self weight"))
    order = [j for j in _need(spec.rank, i, "ranking") if j in peers]
    if set(order) != set(peers):
        raise SpecError(f"ranking of {i} does not cover {peers}")
    weights = {j: Fraction(_need(spec.rank_weight, j, "rank weights")[r]) for r, j in enumerate(order)}
    total = sum(weights.values())
    row = {i: alpha}
    for j in peers:
        row[j] = (1 - alpha) * weights[j] / total
    return row


def _participation_row(spec, i, members):
    if len(members) > PARTICIPATION_CAP:
        raise CapacityError(f"participation enumeration over {len(members)} members")
    w_i = _need(spec.w, i, "weights")
    others = [j for j in members if j != i]
    row = {j: Fraction(0) for j in members}
    for r in range(len(others) + 1):
        for present in combinations(others, r):
            prob = Fraction(1)
            for k in others:
                g = Fraction(_need(spec.gamma, k, "attendance probability"))
                prob *= g if k in present else 1 - g
            sub = _luce_row(w_i, i, (i,) + present)
            for j, x in sub.items():
                row[j] += prob * x
    return row


def _arrival_row(spec, i, members):
    row = {j: Fraction(0) for j in members}
    for q, weights in spec.arrangements:
        table = _need(weights, i, "arrangement weights") if spec.per_agent else weights
        sub = _luce_row(table, i, members)
        for j, x in sub.items():
            row[j] += Fraction(q) * x
    return row


def solve_equilibrium(rows: Mapping[str, Any], ideals: Mapping[str, Sequence]) -> dict[str, tuple]:
    """Unique choices with ``p_i = pi_i(i) v_i + sum_j pi_i(j) p_j`` for every member."""
    members = sorted(rows)
    weights = {i: (r.weights if isinstance(r, InfluenceRow) else r) for i, r in rows.items()}
    for i in members:
        if weights[i].get(i, 0) <= 0:
            raise SingularSpec(f"{i} puts no weight on their own ideal point")
    n = len(members)
    dim = len(ideals[members[0]])
    aug = []
    for i in members:
        w = weights[i]
        row = [1 if j == i else -Fraction(w.get(j, 0)) for j in members]
        row += [Fraction(w[i]) * Fraction(x) for x in ideals[i]]
        aug.append(row)
    M, pivots = rref(aug, n + dim)
    if pivots[:n] != list(range(n)):
        raise SingularSpec("equilibrium system is singular")
    out = {i: tuple(M[r][n + x] for x in range(dim)) for r, i in enumerate(members)}
    for i in members:
        if not in_simplex(out[i]):
            raise AssertionError(f"equilibrium choice of {i} leaves the simplex")
    if not verify_equilibrium(out, rows, ideals):
        raise AssertionError("solved choices fail the equilibrium check")
    return out


@dataclass(frozen=True)
class GroundTruth:
    ideals: Mapping[str, tuple]
    rows: Mapping[tuple, InfluenceRow]
    dataset: Dataset
    spec: InfluenceSpec | None = None

    def to_json(self) -> dict:
        return {
            "dataset": dataset_to_json(self.dataset),
            "ideals": {a: format_vector(v) for a, v in sorted(self.ideals.items())},
            "rows": {g: {i: {j: format_number(x) for j, x in sorted(r.weights.items())}
                         for (g2, i), r in sorted(self.rows.items()) if g2 == g}
                     for g in sorted({g for g, _ in self.rows})},
        }


def group_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def generate_dataset(spec: InfluenceSpec, ideals: Mapping[str, Any] | str, groups: Sequence[Iterable[str]],
                     seed: int = 0, alternatives: Sequence[str] | None = None, grid: int = 20) -> GroundTruth:
    """Compose :func:`build_influence` and :func:`solve_equilibrium` over ``groups``.

    ``ideals`` (or any single agent's entry) may be the string ``"random"``;
    those ideal points are drawn on the ``1/grid`` lattice from ``seed``.
    """
    groups = [sorted(set(g)) for g in groups]
    agents = sorted({a for g in groups for a in g})
    rng = random.Random(seed)
    if isinstance(ideals, str):
        if alternatives is None:
            raise SpecError("random ideal points need the alternatives")
        ideals = {a: "random" for a in agents}
    ideals = dict(ideals)
    if alternatives is None:
        first = next(v for v in ideals.values() if not isinstance(v, str))
        alternatives = tuple(f"x{k}" for k in range(len(first)))
    for a in agents:
        v = _need(ideals, a, "ideal point")
        if isinstance(v, str):
            ideals[a] = grid_simplex_point(rng, len(alternatives), grid)
        else:
            ideals[a] = tuple(Fraction(x) for x in v)
    observations, rows = [], {}
    for g in groups:
        label = _label(g)
        built = build_influence(spec, g, label)
        choices = solve_equilibrium(built, {a: ideals[a] for a in g})
        observations.append(Observation(frozenset(g), choices))
        for a, r in built.items():
            rows[(label, a)] = r
    d = Dataset(tuple(alternatives), tuple(agents), tuple(observations))
    return GroundTruth(MappingProxyType({a: ideals[a] for a in agents}), MappingProxyType(rows), d, spec)


# --------------------------------------------------------------------------
# random draws


def grid_simplex_point(rng: random.Random, dim: int, grid: int, positive: bool = False) -> tuple:
    """Uniformly drawn composition of ``grid`` into ``dim`` parts, scaled to the simplex."""
    if positive:
        cuts = sorted(rng.sample(range(1, grid), dim - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [grid])]
    else:
        cuts = sorted(rng.sample(range(grid + dim - 1), dim - 1))
        parts = [b - a - 1 for a, b in zip([-1] + cuts, cuts + [grid + dim - 1])]
    return tuple(Fraction(p, grid) for p in parts)


def random_spec(kind: str, agents: Sequence[str], rng: random.Random,
                groups: Sequence[Iterable[str]] = (), grid: int = 8) -> InfluenceSpec:
    agents = list(agents)
    half = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))

    def weights():
        return {i: {j: Fraction(rng.randint(1, 4)) for j in agents} for i in agents}

    if kind == UNIFORM:
        return InfluenceSpec(UNIFORM)
    if kind == LUCE:
        return InfluenceSpec(LUCE, w=weights())
    if kind == CLUB:
        k = rng.randint(1, min(3, len(agents)))
        shuffled = agents[:]
        rng.shuffle(shuffled)
        partition = tuple(tuple(shuffled[c::k]) for c in range(k))
        alpha = {i: {c: Fraction(rng.randint(1, 3)) for c in range(k)} for i in agents}
        return InfluenceSpec(CLUB, partition=partition, alpha=alpha)
    if kind == FRIENDSHIP:
        rank = {}
        for i in agents:
            others = [j for j in agents if j != i]
            rng.shuffle(others)
            rank[i] = tuple(others)
        alpha_self = {i: rng.choice(half) for i in agents}
        rank_weight = {j: tuple(Fraction(rng.randint(1, 4)) for _ in range(len(agents))) for j in agents}
        return InfluenceSpec(FRIENDSHIP, rank=rank, alpha_self=alpha_self, rank_weight=rank_weight)
    if kind == PARTICIPATION:
        return InfluenceSpec(PARTICIPATION, gamma={i: rng.choice(half) for i in agents}, w=weights())
    if kind == ARRIVAL:
        m = rng.randint(1, 3)
        qs = grid_simplex_point(rng, m, 4 * m, positive=True) if m > 1 else (Fraction(1),)
        arrangements = tuple((q, {j: Fraction(rng.randint(1, 4)) for j in agents}) for q in qs)
        return InfluenceSpec(ARRIVAL, arrangements=arrangements)
    if kind == GENERAL:
        pi = {}
        for g in groups:
            g = sorted(set(g))
            label = _label(g)
            table = {}
            for i in g:
                others = [j for j in g if j != i]
                draw = grid_simplex_point(rng, len(g), grid, positive=True)
                table[i] = dict(zip([i] + others, draw))
            pi[label] = table
        return InfluenceSpec(GENERAL, pi=pi)
    raise SpecError(f"unknown influence kind {kind!r}")


def random_groups(rng: random.Random, agents: Sequence[str], n_groups: int, max_size: int = 3) -> list[list[str]]:
    """Distinct groups of size 1..max_size, biased toward pairs and triples."""
    pool = [list(c) for r in range(1, min(max_size, len(agents)) + 1) for c in combinations(agents, r)]
    weights = [1 if len(c) == 1 else 4 for c in pool]
    picked: list[list[str]] = []
    while len(picked) < min(n_groups, len(pool)):
        c = rng.choices(pool, weights)[0]
        if c not in picked:
            picked.append(c)
    return picked


def random_instance(kind: str, seed: int, n_agents: int = 3, n_alts: int = 3, n_groups: int = 3,
                    grid: int = 20, max_size: int = 3) -> GroundTruth:
    rng = random.Random(seed)
    agents = [chr(ord("A") + k) for k in range(n_agents)]
    groups = random_groups(rng, agents, n_groups, max_size)
    spec = random_spec(kind, agents, rng, groups)
    alts = tuple(f"x{k}" for k in range(n_alts))
    return generate_dataset(spec, "random", groups, seed=rng.getrandbits(32), alternatives=alts, grid=grid)


def perturb(d: Dataset, rng: random.Random, step: Fraction = Fraction(1, 20)) -> Dataset:
    """Move ``step`` of mass between two alternatives in one agent's row of one group."""
    obs = list(d.observations)
    k = rng.randrange(len(obs))
    o = obs[k]
    agent = rng.choice(sorted(o.group))
    row = list(o.choices[agent])
    donors = [x for x in range(len(row)) if row[x] > 0]
    src = rng.choice(donors)
    dst = rng.choice([x for x in range(len(row)) if x != src])
    amount = min(step, row[src])
    row[src] -= amount
    row[dst] += amount
    choices = dict(o.choices)
    choices[agent] = tuple(row)
    obs[k] = Observation(o.group, choices)
    return d.with_observations(obs)


def corpus(size: int, seed: int = 0, perturbed_share: Fraction = Fraction(1, 4)) -> list[tuple[str, Dataset]]:
    """Mixed corpus: every model kind in turn, with a share of perturbed items."""
    rng = random.Random(seed)
    items = []
    for k in range(size):
        kind = KINDS[k % len(KINDS)]
        n_agents = rng.randint(2, 5)
        truth = random_instance(kind, rng.getrandbits(32), n_agents=n_agents, n_alts=rng.randint(2, 4),
                                n_groups=rng.randint(1, 6))
        d = truth.dataset
        tag = kind
        if rng.random() < perturbed_share:
            d = perturb(d, rng)
            tag = f"{kind}+perturbed"
        items.append((tag, d))
    return items


# --------------------------------------------------------------------------
# JSON


def _num_map(m: Mapping) -> dict:
    return {str(k): (parse_number(v) if not isinstance(v, Mapping) else _num_map(v)) for k, v in m.items()}


def spec_from_json(doc: Mapping) -> InfluenceSpec:
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SpecError(f"unknown influence kind {kind!r}")
    kw: dict[str, Any] = {"kind": kind}
    if "w" in doc:
        kw["w"] = _num_map(doc["w"])
    if "partition" in doc:
        kw["partition"] = tuple(tuple(c) for c in doc["partition"])
    if "alpha" in doc:
        kw["alpha"] = {i: {int(k): parse_number(x) for k, x in m.items()} for i, m in doc["alpha"].items()}
    if "rank" in doc:
        kw["rank"] = {i: tuple(r) for i, r in doc["rank"].items()}
    if "alpha_self" in doc:
        kw["alpha_self"] = _num_map(doc["alpha_self"])
    if "rank_weight" in doc:
        kw["rank_weight"] = {j: tuple(parse_number(x) for x in r) for j, r in doc["rank_weight"].items()}
    if "gamma" in doc:
        kw["gamma"] = _num_map(doc["gamma"])
    if "arrangements" in doc:
        kw["arrangements"] = tuple((parse_number(a["q"]), _num_map(a["weights"])) for a in doc["arrangements"])
    if "per_agent" in doc:
        kw["per_agent"] = bool(doc["per_agent"])
    if "pi" in doc:
        kw["pi"] = {g: _num_map(t) for g, t in doc["pi"].items()}
    return InfluenceSpec(**kw)


def spec_to_json(spec: InfluenceSpec) -> dict:
    def nums(m):
        return {str(k): (format_number(v) if not isinstance(v, Mapping) else nums(v)) for k, v in m.items()}

    doc: dict[str, Any] = {"kind": spec.kind}
    if spec.w:
        doc["w"] = nums(spec.w)
    if spec.partition:
        doc["partition"] = [list(c) for c in spec.partition]
    if spec.alpha:
        doc["alpha"] = nums(spec.alpha)
    if spec.rank:
        doc["rank"] = {i: list(r) for i, r in spec.rank.items()}
    if spec.alpha_self:
        doc["alpha_self"] = nums(spec.alpha_self)
    if spec.rank_weight:
        doc["rank_weight"] = {j: format_vector(r) for j, r in spec.rank_weight.items()}
    if spec.gamma:
        doc["gamma"] = nums(spec.gamma)
    if spec.arrangements:
        doc["arrangements"] = [{"q": format_number(q), "weights": nums(w)} for q, w in spec.arrangements]
    if spec.per_agent:
        doc["per_agent"] = True
    if spec.pi:
        doc["pi"] = nums(spec.pi)
    return doc


def parse_spec(text: str | bytes) -> InfluenceSpec:
    return spec_from_json(json.loads(text))
