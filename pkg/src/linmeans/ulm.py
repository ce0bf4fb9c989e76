"""Uniform linear-in-means: implied ideal points, axiom diagnostics, shock decomposition.

Under uniform weights an agent's ideal point is pinned down by a single group:
``|N| p_i - sum_{j != i} p_j``. The data are uniform-consistent iff that
vector is the same in every group containing the agent and lies in the
simplex. The three axiom checks localize why a dataset fails.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import (
    Dataset,
    SizeError,
    sign,
    to_number,
    uniform,
    vadd,
    vec_eq,
    vscale,
    vsub,
    vsum,
)

CYCLIC = "cyclic_constancy"
SYMMETRIC = "symmetric_peer_effects"
BOUNDED = "bounded_total_peer_effects"


@dataclass(frozen=True)
class PeerEffect:
    group: str
    from_agent: str
    to_agent: str
    delta: tuple
    scaled: tuple


def peer_effects(d: Dataset) -> list[PeerEffect]:
    """``p_i - p_j`` for every ordered pair within every group, raw and size-scaled."""
    out = []
    for o in d.observations:
        label = d.group_label(o.group)
        members = d.ordered(o.group)
        for i in members:
            for j in members:
                if i != j:
                    delta = vsub(o.choices[i], o.choices[j])
                    out.append(PeerEffect(label, i, j, delta, vscale(1 + len(o.group), delta)))
    return out


def implied_ideal(d: Dataset, obs, agent: str) -> tuple:
    """``|N| p_i - sum_{j != i} p_j``: the only ideal point uniform weights allow in this group."""
    n = len(obs.group)
    others = vsum((obs.choices[j] for j in obs.group - {agent}), d.dim)
    return vsub(vscale(n, obs.choices[agent]), others)


@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    passed: bool
    detail: Mapping = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def _require_equal_sizes(d: Dataset, starred: bool):
    if not starred and len(d.group_sizes()) > 1:
        raise SizeError("unstarred axioms assume every observed group has the same size")


def components(d: Dataset) -> list[list[str]]:
    """Agents partitioned by co-membership; each part ordered by dataset agent order."""
    adj: dict[str, set] = {a: set() for a in d.agents}
    for o in d.observations:
        for a in o.group:
            adj[a] |= o.group - {a}
    seen, parts = set(), []
    for a in d.agents:
        if a in seen or not any(a in o.group for o in d.observations):
            continue
        comp, queue = [], deque([a])
        seen.add(a)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in sorted(adj[x]):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        parts.append(d.ordered(comp))
    return parts


def check_cyclic_constancy(d: Dataset, starred: bool = True) -> AxiomResult:
    """Assign potentials along a BFS tree and test every peer-effect edge against them."""
    _require_equal_sizes(d, starred)
    edges: dict[str, list] = {a: [] for a in d.agents}
    for o in d.observations:
        scale = 1 + len(o.group) if starred else 1
        label = d.group_label(o.group)
        for i in o.group:
            for j in o.group - {i}:
                edges[i].append((j, label, vscale(scale, vsub(o.choices[i], o.choices[j]))))
    potentials: dict[str, tuple] = {}
    roots: dict[str, str] = {}
    for comp in components(d):
        root = min(comp)
        potentials[root] = tuple(to_number(0) for _ in range(d.dim))
        roots[root] = root
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j, _, lab in edges[i]:
                if j not in potentials:
                    potentials[j] = vsub(potentials[i], lab)
                    roots[j] = root
                    queue.append(j)
    for i in d.agents:
        for j, label, lab in edges[i]:
            if not vec_eq(vsub(potentials[i], potentials[j]), lab):
                return AxiomResult(CYCLIC, False, {"group": label, "from": i, "to": j,
                                                   "expected": lab,
                                                   "found": vsub(potentials[i], potentials[j])})
    return AxiomResult(CYCLIC, True, {"potentials": potentials, "roots": roots})


def symmetric_sides(d: Dataset, agent: str, N, M, starred: bool = True):
    """Both sides of the symmetric peer effects identity for ``agent`` in groups ``N`` and ``M``."""
    pN, pM = N.choices, M.choices
    i = agent
    lhs = pN[i]
    for j in N.group - M.group:
        lhs = vsub(lhs, vsub(pN[j], pN[i]))
    rhs = pM[i]
    for k in M.group - N.group:
        rhs = vsub(rhs, vsub(pM[k], pM[i]))
    if starred and len(N.group) != len(M.group):
        coef = Fraction(len(N.group) - len(M.group), 1 + len(N.group))
        shared = vsum((vsub(pM[l], pM[i]) for l in (N.group & M.group) - {i}), d.dim)
        rhs = vsub(rhs, vscale(coef, shared))
    return lhs, rhs


def check_symmetric_peer_effects(d: Dataset, starred: bool = True) -> AxiomResult:
    _require_equal_sizes(d, starred)
    for i in d.agents:
        groups = d.groups_of(i)
        for N in groups:
            for M in groups:
                if N is M:
                    continue
                lhs, rhs = symmetric_sides(d, i, N, M, starred)
                if not vec_eq(lhs, rhs):
                    return AxiomResult(SYMMETRIC, False, {
                        "groups": (d.group_label(N.group), d.group_label(M.group)),
                        "agent": i, "residual": vsub(lhs, rhs)})
    return AxiomResult(SYMMETRIC, True)


def check_bounded_total(d: Dataset) -> AxiomResult:
    for o in d.observations:
        for i in d.ordered(o.group):
            vhat = implied_ideal(d, o, i)
            for x, val in enumerate(vhat):
                if sign(val) < 0:
                    return AxiomResult(BOUNDED, False, {
                        "group": d.group_label(o.group), "agent": i,
                        "coordinate": x, "alternative": d.alternatives[x]})
    return AxiomResult(BOUNDED, True)


@dataclass(frozen=True)
class UlmVerdict:
    consistent: bool
    v: Mapping[str, tuple] = field(default_factory=dict)
    failed_axioms: tuple = ()
    mismatches: tuple = ()
    outside_simplex: tuple = ()
    axioms: tuple = ()


def test_ulm(d: Dataset, diagnose: bool = True) -> UlmVerdict:
    implied: dict[str, tuple] = {}
    first: dict[str, str] = {}
    mismatches, outside = [], []
    for o in d.observations:
        label = d.group_label(o.group)
        for i in d.ordered(o.group):
            vhat = implied_ideal(d, o, i)
            if any(sign(x) < 0 for x in vhat):
                outside.append((i, label))
            if i not in implied:
                implied[i], first[i] = vhat, label
            elif not vec_eq(implied[i], vhat):
                mismatches.append((i, first[i], label))
    if not mismatches and not outside:
        return UlmVerdict(True, v=dict(implied))
    if not diagnose:
        return UlmVerdict(False, mismatches=tuple(mismatches), outside_simplex=tuple(outside))
    starred = len(d.group_sizes()) > 1
    results = (check_cyclic_constancy(d, starred), check_symmetric_peer_effects(d, starred),
               check_bounded_total(d))
    failed = tuple(r.axiom for r in results if not r.passed)
    return UlmVerdict(False, failed_axioms=failed, mismatches=tuple(mismatches),
                      outside_simplex=tuple(outside), axioms=results)


test_ulm.__test__ = False


def axioms_hold(d: Dataset) -> bool:
    """Conjunction of the three size-corrected axioms."""
    return all((check_cyclic_constancy(d, True), check_symmetric_peer_effects(d, True),
                check_bounded_total(d)))


# --------------------------------------------------------------------------
# common shocks


@dataclass(frozen=True)
class ShockDecomposition:
    v: Mapping[str, tuple]
    shocks: Mapping[str, tuple]
    components: tuple

    def reconstruct(self, d: Dataset) -> dict:
        """Choices implied by ``v`` and the shocks; keyed by (group label, agent)."""
        out = {}
        for o in d.observations:
            n = len(o.group)
            label = d.group_label(o.group)
            for i in o.group:
                peers = vsum((o.choices[j] for j in o.group - {i}), d.dim)
                out[(label, i)] = vadd(vscale(Fraction(1, n), vadd(self.v[i], peers)), self.shocks[label])
        return out


@dataclass(frozen=True)
class ShockResult:
    ok: bool
    decomposition: ShockDecomposition | None = None
    violation: Mapping | None = None


def decompose_with_shocks(d: Dataset, anchors: Mapping[str, tuple] | None = None) -> ShockResult:
    """Split choices into uniform-weight ideal points plus one common shock per group.

    Each co-membership component has one free vector. By default the
    lexicographically smallest agent of the component is anchored at the
    uniform vector; ``anchors`` may pin any agent instead.
    """
    res = check_cyclic_constancy(d, starred=True)
    if not res.passed:
        return ShockResult(False, violation=dict(res.detail))
    delta = res.detail["potentials"]
    anchors = dict(anchors or {})
    v: dict[str, tuple] = {}
    comps = components(d)
    for comp in comps:
        pinned = [a for a in comp if a in anchors]
        root = pinned[0] if pinned else min(comp)
        base = tuple(anchors[root]) if pinned else uniform(d.dim)
        for j in comp:
            v[j] = vadd(base, vsub(delta[j], delta[root]))
    shocks = {}
    for o in d.observations:
        n = len(o.group)
        label = d.group_label(o.group)
        values = []
        for i in d.ordered(o.group):
            peers = vsum((o.choices[j] for j in o.group - {i}), d.dim)
            values.append(vsub(o.choices[i], vscale(Fraction(1, n), vadd(v[i], peers))))
        if any(not vec_eq(values[0], w) for w in values[1:]):
            raise AssertionError(f"shock not common within {label}")
        if sign(sum(values[0])) != 0:
            raise AssertionError(f"shock in {label} does not sum to zero")
        shocks[label] = values[0]
    return ShockResult(True, ShockDecomposition(v, shocks, tuple(tuple(c) for c in comps)))
