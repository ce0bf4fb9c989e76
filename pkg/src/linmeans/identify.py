"""Identification: sharp sets for ideal points, influence rows, Luce weights, prediction.

Also hosts the equilibrium verifier for the quadratic-loss game whose first
order conditions are the linear-in-means equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

from . import lp as _lp
from ._linalg import rref
from .consistency import GLM, GLM_STAR, is_extreme_group, test_glm, test_glm_star, test_llm
from .core import (
    CapacityError,
    Dataset,
    InconsistentData,
    MissingProfile,
    OutcomeSpace,
    in_simplex,
    sign,
    to_number,
    vec_eq,
)
from .geometry import (
    Polytope,
    affine_hull_probe,
    affinely_independent,
    convex_weights,
    enumerate_vertices,
    intersection_status,
    inverse_cone,
    outcome_rows,
    stack,
)


@dataclass(frozen=True)
class InfluenceRow:
    agent: str
    group: str
    weights: Mapping[str, object]

    def __post_init__(self):
        object.__setattr__(self, "weights", MappingProxyType(dict(self.weights)))

    @property
    def self_weight(self):
        return self.weights[self.agent]


@dataclass(frozen=True)
class LuceProfile:
    agent: str
    v: tuple
    w: Mapping[str, object]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(self.v))
        object.__setattr__(self, "w", MappingProxyType(dict(self.w)))

    def normalized(self) -> "LuceProfile":
        scale = self.w[self.agent]
        return LuceProfile(self.agent, self.v, {k: x / scale for k, x in self.w.items()})


# --------------------------------------------------------------------------
# ideal points


def merge_polytopes(Ps: Sequence[Polytope], label: str = "") -> Polytope:
    """A single lifted polytope whose projection is the intersection of ``Ps``."""
    prog = stack(Ps)
    dim = Ps[0].ambient_dim
    aux = prog.n - dim
    eq = [(c.coeffs, c.rhs) for c in prog.constraints if c.relation == _lp.EQ]
    ineq = [(c.coeffs, c.rhs) for c in prog.constraints if c.relation == _lp.LE]
    return Polytope(dim, tuple(ineq), tuple(eq), aux, label)


def _check_consistent(d, agent, model, Y):
    if model == GLM:
        verdict = test_glm(d, agent, Y, certificates=Y.is_simplex)
    elif model == GLM_STAR:
        verdict = test_glm_star(d, agent, Y, certificates=Y.is_simplex)
    else:
        raise ValueError(f"ideal-point identification supports GLM and GLM_star, not {model!r}")
    if not verdict.consistent:
        raise InconsistentData(f"{agent} is not {model}-consistent", verdict)
    return verdict


def _cones(d, agent, model, Y):
    groups = d.groups_of(agent)
    if model == GLM_STAR:
        groups = [o for o in groups if is_extreme_group(d, o, agent)]
    return [inverse_cone(d, o.group, agent, Y) for o in groups]


def sharp_set(d: Dataset, agent: str, model: str = GLM, Y: OutcomeSpace | None = None) -> Polytope:
    Y = d.outcome_space if Y is None else Y
    _check_consistent(d, agent, model, Y)
    cones = _cones(d, agent, model, Y)
    if not cones:
        ineq, eq = outcome_rows(Y, d.dim)
        return Polytope(d.dim, tuple(ineq), tuple(eq), 0, agent)
    return merge_polytopes(cones, agent)


@dataclass(frozen=True)
class IdealIdentification:
    dim: int
    witness: tuple
    vertices: tuple | None = None

    @property
    def is_point(self) -> bool:
        return self.dim == 0

    @property
    def point(self) -> tuple | None:
        return self.witness if self.dim == 0 else None


def point_identify_ideal(d: Dataset, agent: str, model: str = GLM, Y: OutcomeSpace | None = None,
                         vertex_cap: int = 10_000) -> IdealIdentification:
    P = sharp_set(d, agent, model, Y)
    inter = intersection_status([P])
    if inter.dim == 0:
        return IdealIdentification(0, inter.witness, (inter.witness,))
    try:
        verts = tuple(enumerate_vertices(P, vertex_cap))
    except CapacityError:
        verts = None
    return IdealIdentification(inter.dim, inter.center, verts)


# --------------------------------------------------------------------------
# influence rows

UNIQUE = "unique"
NON_UNIQUE = "non_unique"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class InfluenceRecovery:
    status: str
    row: InfluenceRow | None = None


def recover_influence(v: Sequence, choices: Mapping[str, Sequence], agent: str, mode: str = GLM,
                      group: str = "") -> InfluenceRecovery:
    """Influence weights of ``agent`` given its ideal point and everyone's choices in one group."""
    peers = sorted(a for a in choices if a != agent)
    members = [agent] + peers
    points = [tuple(v)] + [tuple(choices[j]) for j in peers]
    target = tuple(choices[agent])
    label = group or ",".join(sorted(choices))
    positive = mode != GLM_STAR
    g = convex_weights(target, points, prefer=0)
    if g is None or (positive and sign(g[0]) <= 0):
        return InfluenceRecovery(INFEASIBLE)
    row = InfluenceRow(agent, label, dict(zip(members, g)))
    if affinely_independent(points):
        return InfluenceRecovery(UNIQUE, row)
    # dependent points can still pin the weights down, e.g. at a hull vertex;
    # dropping the zero-self-weight face does not change the affine dimension
    prog = _lp.LinearProgram(len(points))
    for k in range(len(points)):
        prog.bound(k, 0, None)
    prog.add([1] * len(points), _lp.EQ, 1)
    for x in range(len(target)):
        prog.add([q[x] for q in points], _lp.EQ, target[x])
    dim, _, _ = affine_hull_probe(prog, len(points), tuple(g))
    return InfluenceRecovery(UNIQUE if dim == 0 else NON_UNIQUE, row)


# --------------------------------------------------------------------------
# Luce weights


@dataclass(frozen=True)
class ComparabilityGraph:
    agent: str
    qualifying: Mapping[str, tuple]
    edges: tuple


def comparability_graph(d: Dataset, agent: str, v: Sequence) -> ComparabilityGraph:
    qualifying: dict[str, list] = {}
    for o in d.groups_of(agent):
        peers = d.ordered(o.group - {agent})
        if affinely_independent([tuple(v)] + [o.choices[j] for j in peers]):
            for j in peers:
                qualifying.setdefault(j, []).append(d.group_label(o.group))
    nodes = sorted(qualifying)
    edges = tuple((j, k) for a, j in enumerate(nodes) for k in nodes[a + 1:])
    return ComparabilityGraph(agent, MappingProxyType({j: tuple(g) for j, g in qualifying.items()}), edges)


@dataclass(frozen=True)
class LuceRecovery:
    complete: bool
    profile: LuceProfile
    missing: tuple = ()


def recover_luce_weights(d: Dataset, agent: str, v: Sequence) -> LuceRecovery:
    """Weights relative to the agent's own, read off every group where the row is identified."""
    verdict = test_llm(d, agent)
    if not verdict.consistent:
        raise InconsistentData(f"{agent} is not LLM-consistent", verdict)
    graph = comparability_graph(d, agent, v)
    w: dict[str, object] = {agent: to_number(1)}
    for j, labels in graph.qualifying.items():
        for label in labels:
            obs = d.observation(label)
            rec = recover_influence(v, obs.choices, agent, GLM, label)
            if rec.status != UNIQUE:
                raise InconsistentData(f"{agent}'s row in {label} is not identified at v = {tuple(v)}")
            ratio = rec.row.weights[j] / rec.row.weights[agent]
            if j in w and sign(w[j] - ratio) != 0:
                raise InconsistentData(f"weight ratios for {j} disagree across groups")
            w[j] = ratio
    missing = tuple(a for a in d.agents if a not in w)
    ordered = {a: w[a] for a in d.agents if a in w}
    return LuceRecovery(not missing, LuceProfile(agent, tuple(v), ordered), missing)


# --------------------------------------------------------------------------
# prediction


def predict_group(profiles: Mapping[str, LuceProfile], group: Sequence[str]) -> dict[str, tuple]:
    members = sorted(set(group))
    for i in members:
        if i not in profiles:
            raise MissingProfile(f"no profile for {i}")
        prof = profiles[i]
        for j in members:
            if j not in prof.w:
                raise MissingProfile(f"{i}'s profile has no weight for {j}")
        if sign(prof.w[i]) <= 0:
            raise MissingProfile(f"{i} has a non-positive self-weight")
    n = len(members)
    dim = len(profiles[members[0]].v)
    A, rhs = [], []
    for i in members:
        w = profiles[i].w
        total = sum(w[k] for k in members)
        row = [total if j == i else -w[j] for j in members]
        A.append(row)
        rhs.append([w[i] * x for x in profiles[i].v])
    aug = [A[r] + rhs[r] for r in range(n)]
    M, pivots = rref(aug, n + dim)
    if pivots[:n] != list(range(n)):
        raise AssertionError("prediction system is singular")
    out = {i: tuple(M[r][n + x] for x in range(dim)) for r, i in enumerate(members)}
    for i in members:
        if not in_simplex(out[i]):
            raise AssertionError(f"predicted row for {i} leaves the simplex")
        w = profiles[i].w
        total = sum(w[k] for k in members)
        rebuilt = [w[i] / total * x for x in profiles[i].v]
        for j in members:
            if j != i:
                rebuilt = [a + w[j] / total * b for a, b in zip(rebuilt, out[j])]
        if not vec_eq(rebuilt, out[i]):
            raise AssertionError(f"predicted row for {i} does not satisfy its own equation")
    return out


# --------------------------------------------------------------------------
# equilibrium of the quadratic-loss game


def _row_weights(row) -> Mapping:
    return row.weights if isinstance(row, InfluenceRow) else row


def loss_gradient(agent: str, choices: Mapping, row, ideal: Sequence) -> tuple:
    """Gradient of ``-pi_i sum (p_i - v_i)^2 - sum_j pi_j sum (p_i - p_j)^2`` in ``p_i``."""
    w = _row_weights(row)
    p = choices[agent]
    g = [-2 * w[agent] * (a - b) for a, b in zip(p, ideal)]
    for j, pj in choices.items():
        if j != agent and w.get(j, 0):
            g = [gx - 2 * w[j] * (a - b) for gx, a, b in zip(g, p, pj)]
    return tuple(g)


def utility(agent: str, choices: Mapping, row, ideal: Sequence, own: Sequence | None = None):
    w = _row_weights(row)
    p = choices[agent] if own is None else own
    u = -w[agent] * sum((a - b) ** 2 for a, b in zip(p, ideal))
    for j, pj in choices.items():
        if j != agent:
            u -= w.get(j, 0) * sum((a - b) ** 2 for a, b in zip(p, pj))
    return u


def tangent_projection(g: Sequence) -> tuple:
    mean = sum(g) / len(g)
    return tuple(x - mean for x in g)


def verify_equilibrium(choices: Mapping[str, Sequence], rows: Mapping, ideals: Mapping[str, Sequence]) -> bool:
    """True iff no member can improve by moving its own choice within the simplex's affine hull."""
    for i in choices:
        if i not in rows or i not in ideals:
            return False
        w = _row_weights(rows[i])
        if set(w) - set(choices) or any(sign(x) < 0 for x in w.values()) or sign(sum(w.values()) - 1) != 0:
            return False
        g = tangent_projection(loss_gradient(i, choices, rows[i], ideals[i]))
        if any(sign(x) != 0 for x in g):
            return False
    return True


def finite_difference_error(choices: Mapping[str, Sequence], rows: Mapping, ideals: Mapping[str, Sequence],
                            h: float = 1e-5) -> float:
    """Largest gap between analytic and central-difference tangent derivatives (floats).

    Each agent's gaps are divided by that agent's largest analytic tangent derivative, so
    directions where the exact derivative is zero do not inflate the ratio.
    """
    worst = 0.0
    fchoices = {a: tuple(float(x) for x in v) for a, v in choices.items()}
    for i in fchoices:
        w = {k: float(x) for k, x in _row_weights(rows[i]).items()}
        ideal = tuple(float(x) for x in ideals[i])
        grad = loss_gradient(i, fchoices, w, ideal)
        dim = len(ideal)
        pairs = []
        for x in range(dim - 1):
            direction = [0.0] * dim
            direction[x], direction[-1] = 1.0, -1.0
            analytic = sum(gx * dx for gx, dx in zip(grad, direction))
            plus = tuple(a + h * dx for a, dx in zip(fchoices[i], direction))
            minus = tuple(a - h * dx for a, dx in zip(fchoices[i], direction))
            numeric = (utility(i, fchoices, w, ideal, plus) - utility(i, fchoices, w, ideal, minus)) / (2 * h)
            pairs.append((analytic, numeric))
        scale = max([abs(a) for a, _ in pairs] + [1e-12])
        worst = max([worst] + [abs(n - a) / scale for a, n in pairs])
    return worst
