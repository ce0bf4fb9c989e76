"""Per-agent consistency tests for the general, extended-general and Luce models.

Each test returns a :class:`ConsistencyVerdict` holding either a witness (an
ideal point plus influence rows reproducing every observed choice) or a money
pump: bets on the agent's choices that are jointly a sure loss for the bettor
on the ideal point yet individually profitable and immune to rebetting.
Both kinds of evidence are re-checkable with :func:`verify_witness` and
:func:`verify_bet`.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from . import lp as _lp
from .core import (
    Dataset,
    DimensionError,
    LinMeansError,
    OutcomeSpace,
    UnknownAgent,
    UnsupportedCertificate,
    dot,
    sign,
    to_number,
    uniform,
    vsub,
)
from .geometry import (
    DEFAULT_VERTEX_CAP,
    convex_weights,
    enumerate_vertices,
    in_hull,
    intersection_status,
    inverse_cone,
    outcome_rows,
)

GLM = "GLM"
GLM_STAR = "GLM_star"
LLM = "LLM"
MODELS = (GLM, GLM_STAR, LLM)


@dataclass(frozen=True)
class Bet:
    """Payout vector per group label; missing groups bet nothing."""

    payouts: Mapping[str, tuple]

    def __post_init__(self):
        object.__setattr__(self, "payouts", MappingProxyType(dict(self.payouts)))

    def scaled(self, c) -> "Bet":
        return Bet({g: tuple(c * x for x in b) for g, b in self.payouts.items()})


@dataclass(frozen=True)
class Witness:
    v: tuple
    pis: Mapping[str, Mapping[str, object]]
    w: Mapping[str, object] | None = None


@dataclass(frozen=True)
class ConsistencyVerdict:
    agent: str
    model: str
    consistent: bool
    witness: Witness | None = None
    certificate: Bet | None = None
    margin: object = None
    infeasibility: object = None
    certificate_unsupported: bool = False

    def require_certificate(self) -> Bet:
        if self.certificate_unsupported:
            raise UnsupportedCertificate("money pumps are only defined on the simplex")
        if self.certificate is None:
            raise LinMeansError(f"{self.agent} has no certificate ({self.model})")
        return self.certificate


# --------------------------------------------------------------------------
# group classification


def _agent_obs(d: Dataset, agent: str):
    obs = d.groups_of(agent)
    if not obs:
        raise UnknownAgent(f"{agent} is not observed in any group")
    return obs


def peer_points(d: Dataset, obs, agent: str) -> list[tuple]:
    return [obs.choices[j] for j in d.ordered(obs.group - {agent})]


def is_extreme_group(d: Dataset, obs, agent: str) -> bool:
    """True when the agent's choice lies outside the convex hull of the peers' choices."""
    peers = peer_points(d, obs, agent)
    return not in_hull(obs.choices[agent], peers)


def ext_groups(d: Dataset, agent: str) -> list:
    return [o for o in _agent_obs(d, agent) if is_extreme_group(d, o, agent)]


# --------------------------------------------------------------------------
# witnesses


def influence_row(d: Dataset, obs, agent: str, v, self_positive: bool = True) -> dict | None:
    """Canonical influence row for ``agent`` in ``obs`` given ideal point ``v``."""
    peers = d.ordered(obs.group - {agent})
    points = [tuple(v)] + [obs.choices[j] for j in peers]
    if self_positive:
        g = convex_weights(obs.choices[agent], points, prefer=0)
        if g is None or sign(g[0]) <= 0:
            return None
    else:
        g = convex_weights(obs.choices[agent], points, fixed_zero=(0,))
        if g is None:
            return None
    row = {agent: g[0]}
    for j, gj in zip(peers, g[1:]):
        row[j] = gj
    return row


def verify_witness(d: Dataset, agent: str, model: str, witness: Witness,
                   Y: OutcomeSpace | None = None) -> bool:
    """Check that ``witness`` reproduces every observed choice of ``agent`` exactly."""
    Y = d.outcome_space if Y is None else Y
    if witness is None or not Y.contains(witness.v):
        return False
    for obs in _agent_obs(d, agent):
        row = witness.pis.get(d.group_label(obs.group))
        if row is None or set(row) != set(obs.group):
            return False
        if any(sign(x) < 0 for x in row.values()) or sign(sum(row.values()) - 1) != 0:
            return False
        if model != GLM_STAR and sign(row[agent]) <= 0:
            return False
        rebuilt = [row[agent] * x for x in witness.v]
        for j in obs.group - {agent}:
            rebuilt = [a + row[j] * b for a, b in zip(rebuilt, obs.choices[j])]
        if any(sign(a - b) != 0 for a, b in zip(rebuilt, obs.choices[agent])):
            return False
        if model == LLM:
            w = witness.w
            if w is None or sign(w.get(agent, 0)) <= 0:
                return False
            total = sum(w[k] for k in obs.group)
            if any(sign(row[k] - w[k] / total) != 0 for k in obs.group):
                return False
    return True


# --------------------------------------------------------------------------
# money pumps


def verify_bet(d: Dataset, agent: str, model: str, bet: Bet, margin) -> bool:
    """Check that ``bet`` is a money pump with strict margin ``margin > 0``."""
    if bet is None or margin is None or sign(margin) <= 0:
        return False
    allowed = {d.group_label(o.group): o for o in
               (ext_groups(d, agent) if model == GLM_STAR else _agent_obs(d, agent))}
    if not bet.payouts or set(bet.payouts) != set(allowed):
        return False
    dim = d.dim
    total = [0] * dim
    for g, b in bet.payouts.items():
        if len(b) != dim:
            return False
        total = [t + x for t, x in zip(total, b)]
    if any(sign(t + margin) > 0 for t in total):
        return False
    rivals: dict[str, object] = {}
    for g, b in bet.payouts.items():
        obs = allowed[g]
        p = obs.choices[agent]
        if sign(dot(b, p) - margin) < 0:
            return False
        for j in obs.group - {agent}:
            gain = dot(b, vsub(p, obs.choices[j]))
            if model == LLM:
                rivals[j] = rivals.get(j, 0) + gain
            elif sign(gain) < 0:
                return False
    return all(sign(x) >= 0 for x in rivals.values())


def find_money_pump(d: Dataset, agent: str, model: str, groups=None):
    """Maximize the margin of a boxed money pump. Returns ``(bet, margin)``; margin <= 0 means none."""
    if groups is None:
        groups = ext_groups(d, agent) if model == GLM_STAR else _agent_obs(d, agent)
    dim = d.dim
    k = len(groups)
    n = k * dim + 1
    eps = n - 1
    prog = _lp.LinearProgram(n)
    for c in range(k * dim):
        prog.bound(c, -1, 1)
    prog.bound(eps, None, 1)
    for x in range(dim):
        row = [0] * n
        for g in range(k):
            row[g * dim + x] = 1
        row[eps] = 1
        prog.add(row, _lp.LE, 0)
    rival_rows: dict[str, list] = {}
    for g, obs in enumerate(groups):
        p = obs.choices[agent]
        row = [0] * n
        row[g * dim:(g + 1) * dim] = [-x for x in p]
        row[eps] = 1
        prog.add(row, _lp.LE, 0)
        for j in d.ordered(obs.group - {agent}):
            diff = vsub(p, obs.choices[j])
            if model == LLM:
                acc = rival_rows.setdefault(j, [0] * n)
                for x in range(dim):
                    acc[g * dim + x] -= diff[x]
            else:
                row = [0] * n
                row[g * dim:(g + 1) * dim] = [-x for x in diff]
                prog.add(row, _lp.LE, 0)
    for j in sorted(rival_rows):
        prog.add(rival_rows[j], _lp.LE, 0)
    obj = [0] * n
    obj[eps] = 1
    prog.set_objective(obj, "max")
    out = _lp.solve_checked(prog)
    x = out.assignment
    bet = Bet({d.group_label(obs.group): tuple(x[g * dim:(g + 1) * dim]) for g, obs in enumerate(groups)})
    return bet, out.value


def _certificate(d, agent, model, groups, Y, certificates):
    if not certificates:
        return {}
    if not Y.is_simplex:
        return {"certificate_unsupported": True}
    bet, margin = find_money_pump(d, agent, model, groups)
    if sign(margin) <= 0:
        raise AssertionError(f"no money pump for inconsistent agent {agent} ({model})")
    return {"certificate": bet, "margin": margin}


# --------------------------------------------------------------------------
# tests


def _glm_core(d: Dataset, agent: str, groups, Y, model, certificates):
    cones = [inverse_cone(d, o.group, agent, Y) for o in groups]
    inter = intersection_status(cones, dimension=False)
    if not inter.nonempty:
        extra = _certificate(d, agent, model, groups, Y, certificates)
        return ConsistencyVerdict(agent, model, False, infeasibility=inter, **extra)
    v = inter.witness
    pis = {}
    for o in groups:
        row = influence_row(d, o, agent, v)
        if row is None:
            raise AssertionError(f"witness {v} not rationalizable in {d.group_label(o.group)}")
        pis[d.group_label(o.group)] = row
    return v, pis


def test_glm(d: Dataset, agent: str, Y: OutcomeSpace | None = None,
             certificates: bool = True) -> ConsistencyVerdict:
    Y = d.outcome_space if Y is None else Y
    groups = _agent_obs(d, agent)
    res = _glm_core(d, agent, groups, Y, GLM, certificates)
    if isinstance(res, ConsistencyVerdict):
        return res
    v, pis = res
    return ConsistencyVerdict(agent, GLM, True, witness=Witness(v, MappingProxyType(pis)))


test_glm.__test__ = False


def _some_point(Y: OutcomeSpace, dim: int) -> tuple:
    if Y.is_simplex:
        return uniform(dim)
    from .geometry import Polytope as _P

    ineq, eq = outcome_rows(Y, dim)
    return intersection_status([_P(dim, tuple(ineq), tuple(eq))], dimension=False).witness


def test_glm_star(d: Dataset, agent: str, Y: OutcomeSpace | None = None,
                  certificates: bool = True) -> ConsistencyVerdict:
    Y = d.outcome_space if Y is None else Y
    all_groups = _agent_obs(d, agent)
    ext = [o for o in all_groups if is_extreme_group(d, o, agent)]
    if ext:
        res = _glm_core(d, agent, ext, Y, GLM_STAR, certificates)
        if isinstance(res, ConsistencyVerdict):
            return res
        v, pis = res
    else:
        v, pis = _some_point(Y, d.dim), {}
    ext_labels = set(pis)
    for o in all_groups:
        label = d.group_label(o.group)
        if label not in ext_labels:
            row = influence_row(d, o, agent, v, self_positive=False)
            if row is None:
                raise AssertionError(f"hull weights missing for {label}")
            pis[label] = row
    return ConsistencyVerdict(agent, GLM_STAR, True, witness=Witness(v, MappingProxyType(pis)))


test_glm_star.__test__ = False


def test_llm(d: Dataset, agent: str, certificates: bool = True) -> ConsistencyVerdict:
    """Luce test via the homogeneous primal system normalized to a unit-mass ideal point."""
    if not d.outcome_space.is_simplex:
        raise LinMeansError("the Luce test is defined on the simplex only")
    groups = _agent_obs(d, agent)
    dim = d.dim
    peers = [a for a in d.agents if a != agent and any(a in o.group for o in groups)]
    col_w = {j: dim + k for k, j in enumerate(peers)}
    col_l = dim + len(peers)
    n = col_l + len(groups)
    prog = _lp.LinearProgram(n)
    for c in range(col_l):
        prog.bound(c, 0, None)
    prog.add([1] * dim + [0] * (n - dim), _lp.EQ, 1)
    for g, o in enumerate(groups):
        p = o.choices[agent]
        for x in range(dim):
            row = [0] * n
            row[x] = 1
            row[col_l + g] = p[x]
            for j in o.group - {agent}:
                row[col_w[j]] = o.choices[j][x]
            prog.add(row, _lp.EQ, 0)
    out = _lp.solve_checked(prog)
    if out.status == _lp.INFEASIBLE:
        extra = _certificate(d, agent, LLM, groups, d.outcome_space, certificates)
        return ConsistencyVerdict(agent, LLM, False, infeasibility=out, **extra)
    x = out.assignment
    v = tuple(x[:dim])
    w = {agent: to_number(1)}
    for j in peers:
        w[j] = x[col_w[j]]
    pis = {}
    for o in groups:
        total = sum(w[k] for k in o.group)
        pis[d.group_label(o.group)] = {k: w[k] / total for k in o.group}
    return ConsistencyVerdict(agent, LLM, True,
                              witness=Witness(v, MappingProxyType(pis), MappingProxyType(w)))


test_llm.__test__ = False


def run_test(d: Dataset, agent: str, model: str, certificates: bool = True) -> ConsistencyVerdict:
    if model == GLM:
        return test_glm(d, agent, certificates=certificates)
    if model == GLM_STAR:
        return test_glm_star(d, agent, certificates=certificates)
    if model == LLM:
        return test_llm(d, agent, certificates=certificates)
    raise ValueError(f"unknown model {model!r}")


def check_verdict(d: Dataset, verdict: ConsistencyVerdict) -> bool:
    """True iff the verdict's own evidence verifies."""
    if verdict.consistent:
        return verify_witness(d, verdict.agent, verdict.model, verdict.witness)
    return verify_bet(d, verdict.agent, verdict.model, verdict.certificate, verdict.margin)


# --------------------------------------------------------------------------
# two alternatives


@dataclass(frozen=True)
class OneDimResult:
    """Outcome of the two-alternative test; values are shares of the first alternative."""

    consistent: bool
    lower: object = None
    upper: object = None
    condition: int | None = None

    @property
    def interval(self):
        return (self.lower, self.upper) if self.consistent else None


def test_glm_1d(d: Dataset, agent: str, variant: str = GLM) -> OneDimResult:
    if d.dim != 2:
        raise DimensionError("the one-dimensional test needs exactly two alternatives")
    plus, minus, tie = [], [], []
    for o in _agent_obs(d, agent):
        a = o.choices[agent][0]
        others = [o.choices[j][0] for j in o.group - {agent}]
        if variant == GLM_STAR:
            if all(sign(a - b) > 0 for b in others):
                plus.append(a)
            if all(sign(a - b) < 0 for b in others):
                minus.append(a)
        else:
            up = all(sign(a - b) >= 0 for b in others)
            down = all(sign(a - b) <= 0 for b in others)
            if up:
                plus.append(a)
            if down:
                minus.append(a)
            if up and down:
                tie.append(a)
    lo = max(plus) if plus else to_number(0)
    hi = min(minus) if minus else to_number(1)
    if plus and minus and sign(min(minus) - max(plus)) < 0:
        return OneDimResult(False, condition=1)
    if variant == GLM_STAR:
        return OneDimResult(True, lo, hi)
    if tie:
        if any(sign(t - tie[0]) != 0 for t in tie):
            return OneDimResult(False, condition=2)
        if sign(hi - tie[0]) != 0 or sign(lo - tie[0]) != 0:
            return OneDimResult(False, condition=3)
        return OneDimResult(True, tie[0], tie[0])
    return OneDimResult(True, lo, hi)


test_glm_1d.__test__ = False


# --------------------------------------------------------------------------
# no-trade cross-check


def samet_no_trade_check(d: Dataset, agent: str, cap: int = DEFAULT_VERTEX_CAP) -> bool:
    """True iff no balanced trading scheme profits on every extreme point of every inverse cone."""
    groups = _agent_obs(d, agent)
    dim = d.dim
    vertex_sets = [enumerate_vertices(inverse_cone(d, o.group, agent), cap) for o in groups]
    if any(not vs for vs in vertex_sets):
        return False  # an empty cone cannot share a point with anything
    k = len(groups)
    n = k * dim + 1
    eps = n - 1
    prog = _lp.LinearProgram(n)
    for c in range(k * dim):
        prog.bound(c, -1, 1)
    prog.bound(eps, None, 1)
    for x in range(dim):
        prog.add_sparse({g * dim + x: 1 for g in range(k)}, _lp.EQ, 0)
    for g, verts in enumerate(vertex_sets):
        for v in verts:
            terms = {g * dim + x: -v[x] for x in range(dim) if v[x]}
            terms[eps] = 1
            prog.add_sparse(terms, _lp.LE, 0)
    obj = [0] * n
    obj[eps] = 1
    prog.set_objective(obj, "max")
    out = _lp.solve_checked(prog)
    return sign(out.value) <= 0
