"""Exact two-phase primal simplex with Bland's rule and self-checking certificates.

Every outcome carries a certificate that :func:`verify_certificate` checks by
plain arithmetic:

* ``feasible``   -- an assignment satisfying all constraints and bounds;
* ``optimal``    -- an assignment plus dual multipliers whose bound equals the value;
* ``infeasible`` -- Farkas multipliers aggregating the rows into ``0 <= negative``;
* ``unbounded``  -- a feasible assignment and an improving recession ray.

Multipliers always refer to the ``<=`` orientation of a row: for a ``>=``
constraint the multiplier applies to ``-a.x <= -b``.  Bound multipliers are
pairs ``(lower, upper)`` for ``-x_k <= -l_k`` and ``x_k <= u_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .core import CapacityError, is_exact, sign, tolerance

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = Fraction

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
OPTIMAL = "optimal"
UNBOUNDED = "unbounded"

LE, EQ, GE = "<=", "=", ">="

DEFAULT_CAPACITY = 10_000


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    relation: str
    rhs: object

    def oriented(self):
        """Return ``(g, h, is_equality)`` with the row written as ``g.x <= h`` (or ``=``)."""
        if self.relation == GE:
            return tuple(-a for a in self.coeffs), -self.rhs, False
        return self.coeffs, self.rhs, self.relation == EQ


@dataclass
class LinearProgram:
    n: int
    constraints: list = field(default_factory=list)
    objective: tuple | None = None
    sense: str = "max"
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)

    def __post_init__(self):
        if not self.lower:
            self.lower = [None] * self.n
        if not self.upper:
            self.upper = [None] * self.n

    def add(self, coeffs: Sequence, relation: str, rhs) -> int:
        if relation not in (LE, EQ, GE):
            raise ValueError(f"bad relation {relation!r}")
        if len(coeffs) != self.n:
            raise ValueError(f"row has {len(coeffs)} coefficients, expected {self.n}")
        self.constraints.append(Constraint(tuple(coeffs), relation, rhs))
        return len(self.constraints) - 1

    def add_sparse(self, terms: Mapping[int, object], relation: str, rhs) -> int:
        row = [0] * self.n
        for k, a in terms.items():
            row[k] += a
        return self.add(row, relation, rhs)

    def bound(self, k: int, lower=None, upper=None) -> None:
        self.lower[k] = lower
        self.upper[k] = upper

    def set_objective(self, coeffs: Sequence, sense: str = "max") -> None:
        if sense not in ("max", "min"):
            raise ValueError(sense)
        if len(coeffs) != self.n:
            raise ValueError("objective length mismatch")
        self.objective = tuple(coeffs)
        self.sense = sense

    def copy(self) -> "LinearProgram":
        return LinearProgram(self.n, list(self.constraints), self.objective, self.sense,
                             list(self.lower), list(self.upper))


@dataclass(frozen=True)
class LpOutcome:
    status: str
    assignment: tuple | None = None
    value: object = None
    farkas: tuple | None = None
    bound_farkas: tuple | None = None
    duals: tuple | None = None
    bound_duals: tuple | None = None
    ray: tuple | None = None

    @property
    def is_feasible(self) -> bool:
        return self.status != INFEASIBLE


# --------------------------------------------------------------------------
# solver


def _to_internal(x):
    if is_exact():
        return _mpq(x) if not isinstance(x, float) else _mpq(Fraction(x))
    return float(x)


def _to_public(x):
    if is_exact():
        return Fraction(int(x.numerator), int(x.denominator))
    return float(x)


class _Tableau:
    """Dense simplex tableau in equality form ``A x = b, x >= 0`` with ``b >= 0``."""

    def __init__(self, rows, rhs, ncols, basis, eligible):
        self.T = rows
        self.b = rhs
        self.ncols = ncols
        self.basis = basis
        self.eligible = eligible
        self.d = [0] * ncols
        self.z = 0
        self.eps = tolerance()

    def set_costs(self, costs):
        # reduced costs d_j = c_j - c_B B^-1 A_j and value z = c_B x_B
        d = list(costs)
        z = 0
        for i, bi in enumerate(self.basis):
            cb = costs[bi]
            if cb:
                row = self.T[i]
                for k in range(self.ncols):
                    if row[k]:
                        d[k] -= cb * row[k]
                z += cb * self.b[i]
        self.d = d
        self.z = z
        self.costs = costs

    def pivot(self, r, j):
        T = self.T
        row = T[r]
        piv = row[j]
        if piv != 1:
            inv = 1 / piv
            row = [x * inv if x else x for x in row]
            T[r] = row
            self.b[r] = self.b[r] * inv
        nz = [k for k, x in enumerate(row) if x]
        br = self.b[r]
        exact = self.eps == 0
        for i in range(len(T)):
            if i == r:
                continue
            Ti = T[i]
            f = Ti[j]
            if f:
                for k in nz:
                    Ti[k] -= f * row[k]
                self.b[i] -= f * br
                if not exact:
                    for k in nz:
                        if abs(Ti[k]) < 1e-13:
                            Ti[k] = 0.0
                    Ti[j] = 0.0
        f = self.d[j]
        if f:
            for k in nz:
                self.d[k] -= f * row[k]
            self.z += f * br
        self.basis[r] = j

    def run(self):
        """Maximize; return None at optimum or the entering column of an unbounded ray."""
        eps = self.eps
        while True:
            j = next((k for k in range(self.ncols) if self.eligible[k] and self.d[k] > eps), None)
            if j is None:
                return None
            best = None
            for i, row in enumerate(self.T):
                a = row[j]
                if a > eps:
                    ratio = self.b[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return j
            self.pivot(best[1], j)

    def duals(self, init_cols):
        # y = c_B^T B^-1 ; B^-1 sits in the columns that formed the starting identity
        y = []
        for r, col in enumerate(init_cols):
            total = 0
            for i, bi in enumerate(self.basis):
                cb = self.costs[bi]
                if cb:
                    total += cb * self.T[i][col]
            y.append(total)
        return y


def solve(lp: LinearProgram, capacity: int = DEFAULT_CAPACITY) -> LpOutcome:
    """Solve ``lp`` exactly (or with tolerance inside :func:`core.float_mode`)."""
    if lp.n > capacity or len(lp.constraints) > capacity:
        raise CapacityError(f"LP with {lp.n} variables and {len(lp.constraints)} rows exceeds {capacity}")
    if any(len(c.coeffs) != lp.n for c in lp.constraints):
        raise ValueError("constraint length mismatch")
    conv = _to_internal
    n = lp.n

    # x_k = offset_k + sum_c dirs[k][c] * x'_c,  x' >= 0
    offsets, dirs, ncols = [], [], 0
    ub_rows = []  # (k, col, width) for variables with both bounds
    for k in range(n):
        lo, up = lp.lower[k], lp.upper[k]
        if lo is not None:
            offsets.append(conv(lo))
            dirs.append(((ncols, 1),))
            if up is not None:
                ub_rows.append((k, ncols, conv(up) - conv(lo)))
            ncols += 1
        elif up is not None:
            offsets.append(conv(up))
            dirs.append(((ncols, -1),))
            ncols += 1
        else:
            offsets.append(conv(0))
            dirs.append(((ncols, 1), (ncols + 1, -1)))
            ncols += 2
    nx = ncols

    # rows in <= / = orientation over x'
    rows = []  # (coeffs over x', rhs', is_eq, origin)
    for r, con in enumerate(lp.constraints):
        g, h, is_eq = con.oriented()
        coeffs = [conv(0)] * nx
        rhs = conv(h)
        for k, a in enumerate(g):
            if a:
                a = conv(a)
                rhs -= a * offsets[k]
                for col, s in dirs[k]:
                    coeffs[col] += s * a
        rows.append((coeffs, rhs, is_eq, ("con", r)))
    for k, col, width in ub_rows:
        coeffs = [conv(0)] * nx
        coeffs[col] = conv(1)
        rows.append((coeffs, width, False, ("ub", k)))

    m = len(rows)
    n_slack = sum(1 for row in rows if not row[2])
    slack_col = {}
    col = nx
    for i, (_, _, is_eq, _) in enumerate(rows):
        if not is_eq:
            slack_col[i] = col
            col += 1
    flips, init_cols, art_cols = [], [], []
    body = []
    rhs_vec = []
    n_real = nx + n_slack
    art_needed = []
    for i, (coeffs, rhs, is_eq, _) in enumerate(rows):
        flip = -1 if rhs < 0 else 1
        flips.append(flip)
        art_needed.append(is_eq or flip < 0)
    n_art = sum(art_needed)
    total = n_real + n_art
    art = n_real
    for i, (coeffs, rhs, is_eq, _) in enumerate(rows):
        flip = flips[i]
        line = [c * flip if flip < 0 else c for c in coeffs] + [conv(0)] * (total - nx)
        if not is_eq:
            line[slack_col[i]] = conv(flip)
        if art_needed[i]:
            line[art] = conv(1)
            init_cols.append(art)
            art_cols.append(art)
            art += 1
        else:
            init_cols.append(slack_col[i])
        body.append(line)
        rhs_vec.append(rhs * flip if flip < 0 else rhs)

    eligible = [True] * n_real + [False] * n_art
    tab = _Tableau(body, rhs_vec, total, list(init_cols), eligible)
    eps = tolerance()

    if n_art:
        costs = [conv(0)] * n_real + [conv(-1)] * n_art
        tab.set_costs(costs)
        tab.eligible = [True] * total
        tab.run()
        tab.eligible = eligible
        if tab.z < -eps:
            y = tab.duals(init_cols)
            return _farkas_outcome(lp, rows, flips, y, dirs, ub_rows)
        art_set = set(art_cols)
        for i in range(m):
            if tab.basis[i] in art_set:
                j = next((k for k in range(n_real) if abs(tab.T[i][k]) > eps), None)
                if j is not None:
                    tab.pivot(i, j)

    def current_x():
        xp = [conv(0)] * total
        for i, bi in enumerate(tab.basis):
            xp[bi] = tab.b[i]
        return xp

    def to_x(xp):
        out = []
        for k in range(n):
            val = offsets[k]
            for c, s in dirs[k]:
                val += s * xp[c]
            out.append(_to_public(val))
        return tuple(out)

    if lp.objective is None:
        return LpOutcome(FEASIBLE, assignment=to_x(current_x()))

    c_max = [conv(a) if lp.sense == "max" else -conv(a) for a in lp.objective]
    costs = [conv(0)] * total
    for k in range(n):
        if c_max[k]:
            for c, s in dirs[k]:
                costs[c] += s * c_max[k]
    tab.set_costs(costs)
    entering = tab.run()
    x = to_x(current_x())
    if entering is not None:
        dp = [conv(0)] * total
        dp[entering] = conv(1)
        for i, bi in enumerate(tab.basis):
            dp[bi] = -tab.T[i][entering]
        ray = []
        for k in range(n):
            val = conv(0)
            for c, s in dirs[k]:
                val += s * dp[c]
            ray.append(_to_public(val))
        return LpOutcome(UNBOUNDED, assignment=x, ray=tuple(ray))
    value = sum((_to_public(a) * xk for a, xk in zip(lp.objective, x)), 0)
    y = tab.duals(init_cols)
    mults, bmults = _map_multipliers(lp, rows, flips, y, dirs, ub_rows, target=c_max)
    return LpOutcome(OPTIMAL, assignment=x, value=value, duals=mults, bound_duals=bmults)


def _map_multipliers(lp, rows, flips, y, dirs, ub_rows, target):
    """Translate tableau duals into per-constraint and per-bound multipliers."""
    n = lp.n
    mu_con = [0] * len(lp.constraints)
    ub_mult = {}
    for i, (_, _, _, origin) in enumerate(rows):
        mu = y[i] * flips[i]
        if origin[0] == "con":
            mu_con[origin[1]] = mu
        else:
            ub_mult[origin[1]] = mu
    agg = [0] * n
    for r, con in enumerate(lp.constraints):
        mu = mu_con[r]
        if mu:
            g, _, _ = con.oriented()
            for k, a in enumerate(g):
                if a:
                    agg[k] += mu * _to_internal(a)
    bounds = []
    for k in range(n):
        up = ub_mult.get(k, 0)
        excess = agg[k] + up - (target[k] if target is not None else 0)
        lo_b, up_b = lp.lower[k], lp.upper[k]
        if lo_b is not None:
            bounds.append((excess, up))
        elif up_b is not None:
            bounds.append((0, -excess))
        else:
            bounds.append((0, 0))
    mults = tuple(_to_public(m) for m in mu_con)
    bmults = tuple((_to_public(a), _to_public(b)) for a, b in bounds)
    return mults, bmults


def _farkas_outcome(lp, rows, flips, y, dirs, ub_rows):
    mults, bmults = _map_multipliers(lp, rows, flips, y, dirs, ub_rows, target=None)
    return LpOutcome(INFEASIBLE, farkas=mults, bound_farkas=bmults)


# --------------------------------------------------------------------------
# certificates


def check_assignment(lp: LinearProgram, x: Sequence) -> bool:
    if x is None or len(x) != lp.n:
        return False
    for k, xk in enumerate(x):
        if lp.lower[k] is not None and sign(xk - lp.lower[k]) < 0:
            return False
        if lp.upper[k] is not None and sign(xk - lp.upper[k]) > 0:
            return False
    for con in lp.constraints:
        lhs = sum((a * xk for a, xk in zip(con.coeffs, x) if a), 0)
        s = sign(lhs - con.rhs)
        if con.relation == LE and s > 0:
            return False
        if con.relation == GE and s < 0:
            return False
        if con.relation == EQ and s != 0:
            return False
    return True


def _aggregate(lp, mults, bmults):
    """Return (sum of multiplied rows, multiplied right-hand side) or None on a sign violation."""
    if mults is None or bmults is None:
        return None
    if len(mults) != len(lp.constraints) or len(bmults) != lp.n:
        return None
    agg = [0] * lp.n
    rhs = 0
    for con, mu in zip(lp.constraints, mults):
        g, h, is_eq = con.oriented()
        if not is_eq and sign(mu) < 0:
            return None
        if mu:
            for k, a in enumerate(g):
                if a:
                    agg[k] += mu * a
            rhs += mu * h
    for k, (lo_m, up_m) in enumerate(bmults):
        if sign(lo_m) < 0 or sign(up_m) < 0:
            return None
        if lo_m:
            if lp.lower[k] is None:
                if sign(lo_m) != 0:
                    return None
            else:
                agg[k] -= lo_m
                rhs -= lo_m * lp.lower[k]
        if up_m:
            if lp.upper[k] is None:
                if sign(up_m) != 0:
                    return None
            else:
                agg[k] += up_m
                rhs += up_m * lp.upper[k]
    return agg, rhs


def verify_certificate(lp: LinearProgram, out: LpOutcome) -> bool:
    """Re-check the certificate carried by ``out`` against ``lp`` by direct arithmetic."""
    if out.status == FEASIBLE:
        return check_assignment(lp, out.assignment)
    if out.status == INFEASIBLE:
        res = _aggregate(lp, out.farkas, out.bound_farkas)
        if res is None:
            return False
        agg, rhs = res
        return all(sign(a) == 0 for a in agg) and sign(rhs) < 0
    if out.status == OPTIMAL:
        if lp.objective is None or not check_assignment(lp, out.assignment):
            return False
        primal = sum((a * xk for a, xk in zip(lp.objective, out.assignment)), 0)
        if sign(primal - out.value) != 0:
            return False
        res = _aggregate(lp, out.duals, out.bound_duals)
        if res is None:
            return False
        agg, rhs = res
        c_max = [a if lp.sense == "max" else -a for a in lp.objective]
        if any(sign(a - c) != 0 for a, c in zip(agg, c_max)):
            return False
        best = primal if lp.sense == "max" else -primal
        return sign(rhs - best) == 0
    if out.status == UNBOUNDED:
        if lp.objective is None or out.ray is None or not check_assignment(lp, out.assignment):
            return False
        ray = out.ray
        for k, rk in enumerate(ray):
            if lp.lower[k] is not None and sign(rk) < 0:
                return False
            if lp.upper[k] is not None and sign(rk) > 0:
                return False
        for con in lp.constraints:
            s = sign(sum((a * rk for a, rk in zip(con.coeffs, ray) if a), 0))
            if (con.relation == LE and s > 0) or (con.relation == GE and s < 0) or (con.relation == EQ and s != 0):
                return False
        gain = sum((a * rk for a, rk in zip(lp.objective, ray)), 0)
        return sign(gain) > 0 if lp.sense == "max" else sign(gain) < 0
    return False


def solve_checked(lp: LinearProgram, capacity: int = DEFAULT_CAPACITY) -> LpOutcome:
    """:func:`solve` followed by the certificate gate; raises if the certificate fails."""
    out = solve(lp, capacity)
    if not verify_certificate(lp, out):
        raise AssertionError(f"LP certificate failed to verify (status {out.status})")
    return out


def lexmin(lp: LinearProgram, order: Sequence[int]) -> tuple | None:
    """Lexicographically smallest feasible point over the variables in ``order``.

    Returns None when the program is infeasible.  Each stage fixes the previous
    minimum with an equality row, so the result does not depend on pivot history.
    """
    work = lp.copy()
    point = None
    for k in order:
        obj = [0] * work.n
        obj[k] = 1
        work.set_objective(obj, "min")
        out = solve_checked(work)
        if out.status == INFEASIBLE:
            return None
        if out.status == UNBOUNDED:
            raise ValueError(f"variable {k} unbounded below in lexmin")
        point = out.assignment
        work.add_sparse({k: 1}, EQ, out.value)
    if point is None:
        out = solve_checked(work)
        return None if out.status == INFEASIBLE else out.assignment
    return point
