"""Linear models and a dense two-phase primal simplex solver."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernel

INF = math.inf
FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9
OPT_TOL = 1e-9
REFACTOR_EVERY = 64

_SENSES = ("<=", ">=", "=")


class NumericalFailure(RuntimeError):
    """The simplex could not reach a trustworthy answer (distinct from infeasible)."""


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = INF


@dataclass
class Constraint:
    name: str
    coefficients: dict[str, float]
    sense: str
    rhs: float


class LinearModel:
    """Variables with bounds, linear rows and a linear objective.

    >>> m = LinearModel(sense="max")
    >>> x = m.add_variable("x", 0, INF)
    >>> _ = m.add_constraint({x: 1.0}, "<=", 3.0)
    >>> m.set_objective({x: 1.0})
    >>> solve_lp(m).objective
    3.0
    """

    def __init__(self, name: str = "", sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError(f"unknown objective sense {sense!r}")
        self.name = name
        self.sense = sense
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[str, float] = {}
        self._index: dict[str, int] = {}

    def add_variable(self, name: str, lower: float = 0.0, upper: float = INF) -> str:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if lower > upper:
            raise ValueError(f"variable {name!r}: lower {lower} > upper {upper}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lower), float(upper)))
        return name

    def set_bounds(self, name: str, lower: float, upper: float) -> None:
        var = self.variables[self._index[name]]
        var.lower, var.upper = float(lower), float(upper)

    def add_constraint(self, coefficients: Mapping[str, float], sense: str, rhs: float,
                       name: str | None = None) -> str:
        if sense not in _SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        for var in coefficients:
            if var not in self._index:
                raise KeyError(f"constraint references undeclared variable {var!r}")
        name = name or f"c{len(self.constraints)}"
        self.constraints.append(Constraint(name, dict(coefficients), sense, float(rhs)))
        return name

    def set_objective(self, coefficients: Mapping[str, float], sense: str | None = None) -> None:
        for var in coefficients:
            if var not in self._index:
                raise KeyError(f"objective references undeclared variable {var!r}")
        self.objective = dict(coefficients)
        if sense is not None:
            if sense not in ("min", "max"):
                raise ValueError(f"unknown objective sense {sense!r}")
            self.sense = sense

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def compile(self) -> "DenseLP":
        n = len(self.variables)
        A = np.zeros((len(self.constraints), n))
        for i, con in enumerate(self.constraints):
            for var, coef in con.coefficients.items():
                A[i, self._index[var]] += coef
        c = np.zeros(n)
        for var, coef in self.objective.items():
            c[self._index[var]] += coef
        return DenseLP(
            A=A,
            senses=[con.sense for con in self.constraints],
            rhs=np.array([con.rhs for con in self.constraints], dtype=float),
            c=c,
            lower=np.array([v.lower for v in self.variables], dtype=float),
            upper=np.array([v.upper for v in self.variables], dtype=float),
            maximize=self.sense == "max",
            names=self.names,
        )

    def to_lp_text(self) -> str:
        """Plain LP-style dump for inspection."""
        def expr(coeffs: Mapping[str, float]) -> str:
            terms = [f"{'-' if v < 0 else '+'} {abs(v):.17g} {k}" for k, v in coeffs.items() if v != 0]
            return " ".join(terms) if terms else "0"

        out = ["Maximize" if self.sense == "max" else "Minimize", f"  obj: {expr(self.objective)}", "Subject To"]
        for con in self.constraints:
            out.append(f"  {con.name}: {expr(con.coefficients)} {con.sense} {con.rhs:.17g}")
        out.append("Bounds")
        for v in self.variables:
            lo = "-inf" if v.lower == -INF else f"{v.lower:.17g}"
            hi = "+inf" if v.upper == INF else f"{v.upper:.17g}"
            out.append(f"  {lo} <= {v.name} <= {hi}")
        out.append("End")
        return "\n".join(out) + "\n"


@dataclass
class DenseLP:
    A: np.ndarray
    senses: list[str]
    rhs: np.ndarray
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = False
    names: list[str] = field(default_factory=list)


@dataclass
class LpOutcome:
    status: str
    objective: float
    values: dict[str, float]
    wall_time_s: float
    pivots: int = 0
    max_violation: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# ---------------------------------------------------------------------------


def _pivot(T: np.ndarray, basis: np.ndarray, r: int, j: int) -> None:
    prow = T[r] / T[r, j]
    colj = T[:, j].copy()
    colj[r] = 0.0
    T -= np.outer(colj, prow)
    T[r] = prow
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _price(T: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> None:
    m = T.shape[0] - 1
    cb = cost[basis]
    T[m, :-1] = cost - cb @ T[:m, :-1]
    T[m, -1] = -(cb @ T[:m, -1])


def _refactor(T, basis, Afull, b, cost) -> None:
    m = T.shape[0] - 1
    if m:
        try:
            X = np.linalg.solve(Afull[:, basis], np.column_stack([Afull, b]))
        except np.linalg.LinAlgError:
            X = None
        if X is not None and np.all(np.isfinite(X)):
            T[:m, :] = X
            T[:m, basis] = np.eye(m)
    _price(T, basis, cost)


class _Simplex:
    """One standard-form problem ``min c.y  s.t.  A y (senses) b, y >= 0``."""

    def __init__(self, A: np.ndarray, senses: list[str], b: np.ndarray, c: np.ndarray):
        m, n = A.shape
        A = A.copy()
        b = b.copy()
        senses = list(senses)
        for i in range(m):
            if b[i] < 0:
                A[i] *= -1.0
                b[i] = -b[i]
                senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]
        ineq = [i for i in range(m) if senses[i] != "="]
        art = [i for i in range(m) if senses[i] != "<="]
        self.n_struct = n
        self.n_slack = len(ineq)
        self.art_start = n + len(ineq)
        N = self.art_start + len(art)
        Afull = np.zeros((m, N))
        Afull[:, :n] = A
        basis = np.zeros(m, dtype=np.int64)
        for k, i in enumerate(ineq):
            Afull[i, n + k] = 1.0 if senses[i] == "<=" else -1.0
            if senses[i] == "<=":
                basis[i] = n + k
        for k, i in enumerate(art):
            Afull[i, self.art_start + k] = 1.0
            basis[i] = self.art_start + k
        self.m, self.N = m, N
        self.Afull, self.b, self.basis = Afull, b, basis
        self.c2 = np.zeros(N)
        self.c2[:n] = c
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = Afull
        self.T[:m, N] = b
        self.pivots = 0
        self.bland = False
        self.degen = 0
        self.degen_limit = 5 * (m + N)
        self.pivot_limit = 50 * (m + N) + 1000

    def _run(self, n_enter: int, cost: np.ndarray) -> int:
        T, basis = self.T, self.basis
        rechecks = 0
        while True:
            status, piv, self.bland, self.degen = kernel.pivot_loop(
                T, basis, n_enter, REFACTOR_EVERY, self.bland, self.degen, self.degen_limit, OPT_TOL, PIVOT_TOL)
            self.pivots += piv
            if self.pivots > self.pivot_limit:
                raise NumericalFailure(f"simplex exceeded {self.pivot_limit} pivots")
            if piv:
                _refactor(T, basis, self.Afull, self.b, cost)
            if status == kernel.PIVOT_LIMIT:
                continue
            if status == kernel.OPTIMAL and piv and np.any(T[-1, :n_enter] < -OPT_TOL):
                rechecks += 1
                if rechecks > 20:
                    raise NumericalFailure("reduced costs keep drifting after refactorization")
                continue
            return status

    def solve(self) -> str:
        m, T, basis = self.m, self.T, self.basis
        if self.N > self.art_start:
            c1 = np.zeros(self.N)
            c1[self.art_start:] = 1.0
            _price(T, basis, c1)
            self._run(self.N, c1)
            infeas = -T[m, -1]
            if infeas > 1e-9 * max(1.0, float(np.max(np.abs(self.b), initial=0.0))):
                return "infeasible"
            for r in range(m):
                if basis[r] >= self.art_start:
                    row = np.abs(T[r, :self.art_start])
                    j = int(np.argmax(row)) if row.size else -1
                    if j >= 0 and row[j] > PIVOT_TOL:
                        _pivot(T, basis, r, j)
                        self.pivots += 1
                    # otherwise the row is redundant; its artificial stays basic at zero
        _price(T, basis, self.c2)
        status = self._run(self.art_start, self.c2)
        return "optimal" if status == kernel.OPTIMAL else "unbounded"

    def primal(self) -> np.ndarray:
        y = np.zeros(self.N)
        y[self.basis] = self.T[:self.m, -1]
        return np.maximum(y[:self.n_struct], 0.0)


def solve_dense(lp: DenseLP, lower: np.ndarray | None = None, upper: np.ndarray | None = None):
    """Solve ``lp`` (optionally with overridden bounds).

    Returns ``(status, objective, x, pivots)`` with the objective in the
    model's own sense.
    """
    lower = lp.lower if lower is None else lower
    upper = lp.upper if upper is None else upper
    n = lp.c.size
    c = -lp.c if lp.maximize else lp.c

    if np.any(lower > upper + 1e-12):
        return "infeasible", math.nan, None, 0

    # substitute x = shift + sign * y (free variables split into two columns)
    shift = np.zeros(n)
    cols_var: list[int] = []
    cols_sign: list[float] = []
    width_rows: list[tuple[int, float]] = []
    for j in range(n):
        lo, hi = lower[j], upper[j]
        lo_f, hi_f = math.isfinite(lo), math.isfinite(hi)
        if lo_f and hi_f and hi - lo <= 1e-12:
            shift[j] = lo
        elif lo_f:
            shift[j] = lo
            cols_var.append(j)
            cols_sign.append(1.0)
            if hi_f:
                width_rows.append((len(cols_var) - 1, hi - lo))
        elif hi_f:
            shift[j] = hi
            cols_var.append(j)
            cols_sign.append(-1.0)
        else:
            cols_var += [j, j]
            cols_sign += [1.0, -1.0]

    idx = np.array(cols_var, dtype=np.int64)
    sign = np.array(cols_sign)
    k = idx.size
    A = lp.A[:, idx] * sign if k else np.zeros((lp.A.shape[0], 0))
    b = lp.rhs - lp.A @ shift
    senses = list(lp.senses)

    # rows without structural coefficients are checked directly
    keep = []
    for i in range(A.shape[0]):
        if k and np.any(A[i] != 0.0):
            keep.append(i)
            continue
        tol = FEAS_TOL
        if (senses[i] == "<=" and b[i] < -tol) or (senses[i] == ">=" and b[i] > tol) \
                or (senses[i] == "=" and abs(b[i]) > tol):
            return "infeasible", math.nan, None, 0
    A = A[keep]
    b = b[keep]
    senses = [senses[i] for i in keep]
    if width_rows:
        W = np.zeros((len(width_rows), k))
        for r, (col, width) in enumerate(width_rows):
            W[r, col] = 1.0
        A = np.vstack([A, W])
        b = np.concatenate([b, [w for _, w in width_rows]])
        senses += ["<="] * len(width_rows)

    cy = c[idx] * sign if k else np.zeros(0)
    simplex = _Simplex(A, senses, b, cy)
    status = simplex.solve()
    if status != "optimal":
        return status, math.nan, None, simplex.pivots
    x = shift.copy()
    if k:
        np.add.at(x, idx, sign * simplex.primal())
    x = np.clip(x, lower, upper)
    return "optimal", float(lp.c @ x), x, simplex.pivots


def max_violation(lp: DenseLP, x: np.ndarray) -> float:
    act = lp.A @ x
    worst = 0.0
    for i, sense in enumerate(lp.senses):
        gap = act[i] - lp.rhs[i]
        if sense == "<=":
            worst = max(worst, gap)
        elif sense == ">=":
            worst = max(worst, -gap)
        else:
            worst = max(worst, abs(gap))
    worst = max(worst, float(np.max(lp.lower - x, initial=0.0)), float(np.max(x - lp.upper, initial=0.0)))
    return worst


def solve_lp(model: LinearModel | DenseLP, lower=None, upper=None) -> LpOutcome:
    t0 = time.perf_counter()
    lp = model.compile() if isinstance(model, LinearModel) else model
    status, obj, x, pivots = solve_dense(lp, lower, upper)
    viol = 0.0
    values: dict[str, float] = {}
    if status == "optimal":
        check = lp if lower is None and upper is None else DenseLP(
            lp.A, lp.senses, lp.rhs, lp.c,
            lp.lower if lower is None else lower, lp.upper if upper is None else upper)
        viol = max_violation(check, x)
        if viol > 1e-6 * (1.0 + float(np.max(np.abs(lp.rhs), initial=0.0))):
            raise NumericalFailure(f"solution violates constraints by {viol:.3g}")
        values = dict(zip(lp.names, x.tolist()))
    return LpOutcome(status, obj, values, time.perf_counter() - t0, pivots, viol)
