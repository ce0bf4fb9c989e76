"""Domain model: exact numbers, datasets of group choice profiles, outcome spaces.

All probabilities are held as :class:`fractions.Fraction`. A floating mode can
be switched on with :func:`float_mode`; inside it, comparisons made through
:func:`sign` and friends use an absolute tolerance instead of exact equality.
"""

from __future__ import annotations

import contextvars
import json
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, Sequence

Rational = Fraction
Vector = tuple  # tuple of Fraction (or float in float mode)

FLOAT_EPS = 1e-9

_tolerance: contextvars.ContextVar[float] = contextvars.ContextVar("linmeans_tolerance", default=0)


class LinMeansError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(LinMeansError):
    pass


class NumberError(LinMeansError):
    pass


class UnknownAgent(LinMeansError):
    pass


class UnknownGroup(LinMeansError):
    pass


class CapacityError(LinMeansError):
    pass


class DimensionError(LinMeansError):
    pass


class SizeError(LinMeansError):
    """An equal-group-size check was requested on data with varying group sizes."""


class SpecError(LinMeansError):
    pass


class SingularSpec(LinMeansError):
    pass


class MissingProfile(LinMeansError):
    pass


class UnsupportedCertificate(LinMeansError):
    """Dual certificates are only defined when the outcome space is the simplex."""


class InconsistentData(LinMeansError):
    def __init__(self, message: str, verdict=None):
        super().__init__(message)
        self.verdict = verdict


# --------------------------------------------------------------------------
# numeric mode


@contextmanager
def float_mode(eps: float = FLOAT_EPS):
    """Compare numbers with absolute tolerance ``eps`` for the duration of the block."""
    token = _tolerance.set(eps)
    try:
        yield
    finally:
        _tolerance.reset(token)


def tolerance() -> float:
    return _tolerance.get()


def is_exact() -> bool:
    return _tolerance.get() == 0


def sign(x) -> int:
    eps = _tolerance.get()
    if x > eps:
        return 1
    if x < -eps:
        return -1
    return 0


def is_zero(x) -> bool:
    return sign(x) == 0


def vec_is_zero(v: Iterable) -> bool:
    return all(sign(x) == 0 for x in v)


def vec_eq(u: Sequence, v: Sequence) -> bool:
    return len(u) == len(v) and all(sign(a - b) == 0 for a, b in zip(u, v))


def to_number(x):
    """Convert ``x`` to the active numeric type (Fraction when exact, float otherwise)."""
    if is_exact():
        return x if isinstance(x, Fraction) else Fraction(x)
    return float(x)


# --------------------------------------------------------------------------
# vector helpers

def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v):
    return tuple(c * a for a in v)


def dot(u, v):
    return sum((a * b for a, b in zip(u, v)), 0)


def vsum(vectors: Iterable[Sequence], dim: int):
    total = [0] * dim
    for v in vectors:
        for k, a in enumerate(v):
            total[k] += a
    return tuple(total)


def uniform(d: int) -> Vector:
    return tuple(Fraction(1, d) for _ in range(d))


def in_simplex(v: Sequence) -> bool:
    return all(sign(a) >= 0 for a in v) and sign(sum(v, 0) - 1) == 0


# --------------------------------------------------------------------------
# parsing numbers

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIO = re.compile(r"^[+-]?\d+\s*/\s*[+-]?\d+$")


def parse_number(text: Any) -> Fraction:
    """Parse ``"0.1"``, ``"1/10"`` or an int into an exact Fraction.

    Floats are rejected because they would already have been rounded.
    """
    if isinstance(text, bool):
        raise NumberError(f"not a number: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise NumberError(f"numbers must be decimal or p/q strings, got {text!r}")
    s = text.strip()
    if _RATIO.match(s):
        num, den = s.split("/")
        if int(den) == 0:
            raise NumberError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    if _DECIMAL.match(s):
        # Fraction parses decimal strings digit by digit, no float round trip
        return Fraction(s)
    raise NumberError(f"not a number: {text!r}")


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def format_vector(v: Iterable) -> list[str]:
    return [format_number(x) for x in v]


# --------------------------------------------------------------------------
# outcome spaces


@dataclass(frozen=True)
class OutcomeSpace:
    """Where ideal points and choices live: the probability simplex or an H-polytope.

    For ``kind == "polytope"`` the set is ``{y : A y <= c}``.
    """

    kind: str = "simplex"
    A: tuple = ()
    c: tuple = ()

    def __post_init__(self):
        if self.kind not in ("simplex", "polytope"):
            raise SchemaError(f"unknown outcome space kind {self.kind!r}")
        if self.kind == "polytope":
            if not self.A or len(self.A) != len(self.c):
                raise SchemaError("polytope outcome space needs matching A and c")
            width = len(self.A[0])
            if any(len(row) != width for row in self.A):
                raise SchemaError("polytope rows have unequal length")
            object.__setattr__(self, "A", tuple(tuple(Fraction(x) for x in row) for row in self.A))
            object.__setattr__(self, "c", tuple(Fraction(x) for x in self.c))
            from .geometry import check_bounded_nonempty

            check_bounded_nonempty(self.A, self.c)

    @property
    def is_simplex(self) -> bool:
        return self.kind == "simplex"

    def contains(self, y: Sequence) -> bool:
        if self.is_simplex:
            return in_simplex(y)
        return all(sign(dot(row, y) - ci) <= 0 for row, ci in zip(self.A, self.c))

    def to_json(self) -> dict:
        if self.is_simplex:
            return {"kind": "simplex"}
        return {
            "kind": "polytope",
            "A": [format_vector(row) for row in self.A],
            "c": format_vector(self.c),
        }


SIMPLEX = OutcomeSpace()


# --------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class Observation:
    group: frozenset
    choices: Mapping[str, tuple]

    def __post_init__(self):
        object.__setattr__(self, "group", frozenset(self.group))
        object.__setattr__(self, "choices", MappingProxyType(
            {a: tuple(v) for a, v in self.choices.items()}))

    def others(self, agent: str) -> list[str]:
        return sorted(self.group - {agent})


@dataclass(frozen=True)
class Dataset:
    """Observed choice profiles ``p_i^N`` for every observed group ``N``.

    Construction does not enforce the invariants; call :func:`validate_dataset`
    (``parse_dataset`` does so and raises).
    """

    alternatives: tuple
    agents: tuple
    observations: tuple
    outcome_space: OutcomeSpace = field(default=SIMPLEX)

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "observations", tuple(self.observations))

    @property
    def dim(self) -> int:
        return len(self.alternatives)

    def group_label(self, group: Iterable[str]) -> str:
        order = {a: k for k, a in enumerate(self.agents)}
        return ",".join(sorted(group, key=lambda a: (order.get(a, len(order)), a)))

    def ordered(self, group: Iterable[str]) -> list[str]:
        order = {a: k for k, a in enumerate(self.agents)}
        return sorted(group, key=lambda a: (order.get(a, len(order)), a))

    def groups_of(self, agent: str) -> list[Observation]:
        if agent not in self.agents:
            raise UnknownAgent(agent)
        return [obs for obs in self.observations if agent in obs.group]

    def observation(self, group: Iterable[str] | str) -> Observation:
        if isinstance(group, str):
            key = frozenset(g.strip() for g in group.split(",") if g.strip())
        else:
            key = frozenset(group)
        for obs in self.observations:
            if obs.group == key:
                return obs
        raise UnknownGroup(self.group_label(key))

    def without_groups(self, predicate) -> "Dataset":
        return Dataset(self.alternatives, self.agents,
                       [o for o in self.observations if not predicate(o)], self.outcome_space)

    def with_observations(self, observations: Iterable[Observation]) -> "Dataset":
        return Dataset(self.alternatives, self.agents, tuple(observations), self.outcome_space)

    def to_float(self) -> "Dataset":
        obs = [Observation(o.group, {a: tuple(float(x) for x in v) for a, v in o.choices.items()})
               for o in self.observations]
        return Dataset(self.alternatives, self.agents, obs, self.outcome_space)

    def group_sizes(self) -> set[int]:
        return {len(o.group) for o in self.observations}


def validate_dataset(d: Dataset) -> list[str]:
    """Return one human-readable diagnostic per violated invariant (empty if valid)."""
    diags: list[str] = []
    agents = set(d.agents)
    if len(agents) != len(d.agents):
        diags.append("duplicate agent labels")
    if len(set(d.alternatives)) != len(d.alternatives):
        diags.append("duplicate alternative labels")
    seen: set[frozenset] = set()
    for k, obs in enumerate(d.observations):
        where = f"observation {k} ({d.group_label(obs.group)})"
        if not obs.group:
            diags.append(f"{where}: empty group")
        unknown = obs.group - agents
        if unknown:
            diags.append(f"{where}: unknown agents {sorted(unknown)}")
        if obs.group in seen:
            diags.append(f"{where}: duplicate group")
        seen.add(obs.group)
        for a in d.ordered(obs.group):
            if a not in obs.choices:
                diags.append(f"{where}: missing choice row for {a}")
        for a in sorted(set(obs.choices) - obs.group):
            diags.append(f"{where}: choice row for non-member {a}")
        for a, row in obs.choices.items():
            if len(row) != d.dim:
                diags.append(f"{where}: row for {a} has length {len(row)}, expected {d.dim}")
            elif d.outcome_space.is_simplex and not in_simplex(row):
                diags.append(f"{where}: row for {a} is not in the simplex")
            elif not d.outcome_space.is_simplex and not d.outcome_space.contains(row):
                diags.append(f"{where}: row for {a} lies outside the outcome space")
    return diags


# --------------------------------------------------------------------------
# JSON


def _require(doc: Mapping, key: str, kind: type, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def parse_outcome_space(doc: Any) -> OutcomeSpace:
    if doc is None:
        return SIMPLEX
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError("outcome_space must be an object with a 'kind'")
    if doc["kind"] == "simplex":
        return SIMPLEX
    if doc["kind"] == "polytope":
        A = _require(doc, "A", list, "outcome_space")
        c = _require(doc, "c", list, "outcome_space")
        try:
            return OutcomeSpace("polytope", tuple(tuple(parse_number(x) for x in row) for row in A),
                                tuple(parse_number(x) for x in c))
        except TypeError as exc:
            raise SchemaError(f"outcome_space: {exc}") from None
    raise SchemaError(f"outcome_space: unknown kind {doc['kind']!r}")


def dataset_from_json(doc: Any, validate: bool = True) -> Dataset:
    if not isinstance(doc, dict):
        raise SchemaError("dataset document must be a JSON object")
    alternatives = _require(doc, "alternatives", list, "dataset")
    agents = _require(doc, "agents", list, "dataset")
    raw_obs = _require(doc, "observations", list, "dataset")
    if not all(isinstance(x, str) for x in alternatives + agents):
        raise SchemaError("dataset: labels must be strings")
    space = parse_outcome_space(doc.get("outcome_space"))
    observations = []
    for k, item in enumerate(raw_obs):
        where = f"observation {k}"
        if not isinstance(item, dict):
            raise SchemaError(f"{where}: must be an object")
        group = _require(item, "group", list, where)
        choices = _require(item, "choices", dict, where)
        rows = {}
        for agent, row in choices.items():
            if not isinstance(row, list):
                raise SchemaError(f"{where}: choices for {agent} must be a list")
            try:
                vec = tuple(parse_number(x) for x in row)
            except NumberError as exc:
                raise NumberError(f"{where}, agent {agent}: {exc}") from None
            if any(x < 0 for x in vec) and space.is_simplex:
                raise NumberError(f"{where}, agent {agent}: negative probability")
            if space.is_simplex and len(vec) == len(alternatives) and sum(vec) != 1:
                raise NumberError(f"{where}, agent {agent}: row sums to {sum(vec)}, not 1")
            rows[agent] = vec
        observations.append(Observation(frozenset(group), rows))
    d = Dataset(tuple(alternatives), tuple(agents), tuple(observations), space)
    diags = validate_dataset(d) if validate else []
    if diags:
        raise SchemaError("; ".join(diags))
    return d


def parse_dataset(text: str | bytes, format: str = "json", validate: bool = True) -> Dataset:
    """Parse a dataset document; numbers become exact Fractions."""
    if format != "json":
        raise SchemaError(f"unsupported format {format!r}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return dataset_from_json(doc, validate)


def dataset_to_json(d: Dataset) -> dict:
    doc = {
        "alternatives": list(d.alternatives),
        "agents": list(d.agents),
        "observations": [
            {
                "group": d.ordered(obs.group),
                "choices": {a: format_vector(obs.choices[a]) for a in d.ordered(obs.choices)},
            }
            for obs in d.observations
        ],
    }
    if not d.outcome_space.is_simplex:
        doc["outcome_space"] = d.outcome_space.to_json()
    return doc


def serialize_dataset(d: Dataset) -> str:
    return json.dumps(dataset_to_json(d), sort_keys=True, indent=2)


def make_dataset(alternatives: Sequence[str], groups: Iterable[Mapping[str, Sequence]],
                 agents: Sequence[str] | None = None,
                 outcome_space: OutcomeSpace = SIMPLEX) -> Dataset:
    """Build a dataset from ``[{agent: row, ...}, ...]``; numbers may be strings."""
    observations = []
    seen: list[str] = []
    for g in groups:
        rows = {a: tuple(parse_number(x) if isinstance(x, str) else Fraction(x) for x in row)
                for a, row in g.items()}
        observations.append(Observation(frozenset(rows), rows))
        for a in g:
            if a not in seen:
                seen.append(a)
    return Dataset(tuple(alternatives), tuple(agents if agents is not None else seen),
                   tuple(observations), outcome_space)


def permute(d: Dataset, agent_map: Mapping[str, str] | None = None,
            alt_order: Sequence[int] | None = None) -> Dataset:
    """Relabel agents and reorder alternatives (``alt_order[k]`` = old index of new slot k)."""
    agent_map = dict(agent_map or {})
    rename = lambda a: agent_map.get(a, a)  # noqa: E731
    order = list(alt_order) if alt_order is not None else list(range(d.dim))
    obs = []
    for o in d.observations:
        obs.append(Observation(frozenset(rename(a) for a in o.group),
                               {rename(a): tuple(v[k] for k in order) for a, v in o.choices.items()}))
    return Dataset(tuple(d.alternatives[k] for k in order), tuple(rename(a) for a in d.agents),
                   tuple(obs), d.outcome_space)


def iter_agent_groups(d: Dataset, agent: str) -> Iterator[tuple[Observation, tuple, list[tuple]]]:
    """Yield ``(observation, p_i, [p_j for peers])`` for each group containing ``agent``."""
    for obs in d.groups_of(agent):
        others = d.ordered(obs.group - {agent})
        yield obs, obs.choices[agent], [obs.choices[j] for j in others]
