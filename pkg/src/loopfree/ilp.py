"""Integer program for the best repeat-free path, with MTZ subtour elimination.

Binary ``u_j_k`` selects the edge ``j -> k``; continuous ``v_j`` (one per
non-start POI) orders the visited POIs. With ``s`` the start and ``m`` the
POI count::

    max   sum_jk (pairwise[j, k] + unary[k]) u_jk          (+ unary[s])
    s.t.  sum_k u_sk = 1                                   start leaves once
          sum_j u_js = 0                                   start never re-entered
          0 <= sum_j u_ji - sum_k u_ik <= 1   (i != s)     path may end at i
          sum_jk u_jk = l - 1
          sum_j u_jj = 0
          sum_j u_ji <= 1                     (i != s)
          v_j - v_k + (m - 1) u_jk <= m - 2   (j != k, both != s)

Each visited non-start POI has exactly one incoming edge, so charging its
unary score to that edge counts it once; the start's unary score is a
constant offset.

:func:`emit_lp` writes the program in LP text format for external solvers;
:func:`solve_bb` solves it exactly by depth-first branch-and-bound over path
prefixes, which is the same search space with the constraints built in.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible
from .heuristics import greedy_decode
from .model import PotentialModel, Query, ScoredSequence, is_path, score_key, sum_score, validate_query


def edge_var(j: int, k: int) -> str:
    return f"u_{j}_{k}"


def order_var(j: int) -> str:
    return f"v_{j}"


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[str, int], ...]
    sense: str  # "<=", ">=" or "="
    rhs: int

    def holds(self, values: dict[str, float], tol: float = 1e-9) -> bool:
        lhs = sum(coef * values.get(var, 0.0) for var, coef in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass(frozen=True, eq=False)
class IlpModel:
    potentials: PotentialModel
    query: Query
    objective: dict[str, float]
    offset: float
    rows: tuple[Row, ...]
    order_bounds: tuple[int, int]
    integer_order_vars: bool = False

    @property
    def m(self) -> int:
        return self.potentials.n

    @property
    def edge_vars(self) -> list[str]:
        return [edge_var(j, k) for j in range(self.m) for k in range(self.m)]

    @property
    def order_vars(self) -> list[str]:
        return [order_var(j) for j in range(self.m) if j != self.query.start]

    def assignment(self, path) -> dict[str, float]:
        """Variable values encoding ``path``; unvisited POIs get order 1."""
        values = {edge_var(a, b): 1.0 for a, b in zip(path, path[1:])}
        rank = {p: i for i, p in enumerate(path)}
        for j in range(self.m):
            if j != self.query.start:
                values[order_var(j)] = float(rank.get(j, 1))
        return values

    def feasible(self, values: dict[str, float]) -> bool:
        lo, hi = self.order_bounds
        if any(not lo <= values.get(v, 0.0) <= hi for v in self.order_vars):
            return False
        return all(row.holds(values) for row in self.rows)

    def objective_value(self, values: dict[str, float]) -> float:
        return self.offset + sum(c * values.get(v, 0.0) for v, c in self.objective.items())


@dataclass(frozen=True)
class IlpSolution:
    edges: frozenset[tuple[int, int]]
    objective: float
    path: tuple[int, ...]
    nodes: int = field(default=0, compare=False)


def build_ilp(model: PotentialModel, q: Query, integer_order_vars: bool = False) -> IlpModel:
    q = validate_query(model, q, require_path=True)
    m, s, l = model.n, q.start, q.length
    others = [i for i in range(m) if i != s]
    objective = {
        edge_var(j, k): float(model.pairwise[j, k] + model.unary[k]) for j in range(m) for k in range(m)
    }

    rows = [Row("start_out", tuple((edge_var(s, k), 1) for k in others), "=", 1)]
    rows.append(Row("start_in", tuple((edge_var(j, s), 1) for j in range(m)), "=", 0))
    for i in others:
        flow = tuple((edge_var(j, i), 1) for j in range(m)) + tuple((edge_var(i, k), -1) for k in range(m))
        flow = _merge_terms(flow)
        rows.append(Row(f"end_{i}_lo", flow, ">=", 0))
        rows.append(Row(f"end_{i}_hi", flow, "<=", 1))
    rows.append(Row("num_edges", tuple((edge_var(j, k), 1) for j in range(m) for k in range(m)), "=", l - 1))
    rows.append(Row("no_self", tuple((edge_var(j, j), 1) for j in range(m)), "=", 0))
    for i in others:
        rows.append(Row(f"in_{i}", tuple((edge_var(j, i), 1) for j in range(m)), "<=", 1))
    for j, k in itertools.permutations(others, 2):
        rows.append(
            Row(f"mtz_{j}_{k}", ((order_var(j), 1), (order_var(k), -1), (edge_var(j, k), m - 1)), "<=", m - 2)
        )
    return IlpModel(
        potentials=model,
        query=q,
        objective=objective,
        offset=float(model.unary[s]),
        rows=tuple(rows),
        order_bounds=(0, m - 1),
        integer_order_vars=integer_order_vars,
    )


def _merge_terms(terms):
    merged: dict[str, int] = {}
    for var, coef in terms:
        merged[var] = merged.get(var, 0) + coef
    return tuple((v, c) for v, c in merged.items() if c != 0)


# -- LP text format --------------------------------------------------------

_TERMS_PER_LINE = 8


def _num(x) -> str:
    x = float(x)
    if x == 0:
        x = 0.0  # no "-0"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _expr_lines(terms, indent="   "):
    parts = []
    for var, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} {var}")
    return [indent + " ".join(parts[i : i + _TERMS_PER_LINE]) for i in range(0, len(parts), _TERMS_PER_LINE)]


def emit_lp(ilp: IlpModel) -> str:
    """The program in LP text format; identical input gives identical bytes."""
    q = ilp.query
    out = [
        f"\\ best repeat-free path: start {q.start}, length {q.length}, {ilp.m} POIs",
        f"\\ objective offset (unary score of the start): {_num(ilp.offset)}",
        "Maximize",
        " obj:",
    ]
    out += _expr_lines((v, ilp.objective[v]) for v in ilp.edge_vars)
    out.append("Subject To")
    for row in ilp.rows:
        out.append(f" {row.name}:")
        lines = _expr_lines(row.terms)
        lines[-1] += f" {row.sense} {row.rhs}"
        out += lines
    out.append("Bounds")
    lo, hi = ilp.order_bounds
    out += [f" {lo} <= {v} <= {hi}" for v in ilp.order_vars]
    out.append("Binary")
    out += _wrap(ilp.edge_vars)
    if ilp.integer_order_vars:
        out.append("General")
        out += _wrap(ilp.order_vars)
    out.append("End")
    return "\n".join(out) + "\n"


def _wrap(names):
    return [" " + " ".join(names[i : i + _TERMS_PER_LINE]) for i in range(0, len(names), _TERMS_PER_LINE)]


# -- branch and bound ------------------------------------------------------


def _top_sum(values: np.ndarray, r: int) -> float:
    if r <= 0:
        return 0.0
    if r >= values.size:
        return float(values.sum())
    return float(np.partition(values, values.size - r)[values.size - r :].sum())


class _Search:
    def __init__(self, ilp: IlpModel, check_bounds: bool):
        model = ilp.potentials
        m = ilp.m
        self.ilp = ilp
        self.l = ilp.query.length
        self.unary = model.unary
        self.pairwise = model.pairwise
        self.gain = np.array([[ilp.objective[edge_var(j, k)] for k in range(m)] for j in range(m)])
        self.gain_list = self.gain.tolist()
        self.offdiag = ~np.eye(m, dtype=bool)
        self.check_bounds = check_bounds
        self.nodes = 0
        greedy = greedy_decode(model, ilp.query).sequence
        self.best_path = greedy
        self.best_value = self._path_value(greedy)

    def _path_value(self, path):
        return self.ilp.offset + sum(self.gain_list[a][b] for a, b in zip(path, path[1:]))

    def bound(self, path, value, unused: np.ndarray) -> float:
        """Upper bound on any completion of ``path`` to full length.

        Minimum of three admissible bounds: best unary plus best outgoing
        edges taken separately; best incoming gain per remaining POI; and the
        best walk through unused POIs with repeats allowed.
        """
        r = self.l - len(path)
        if r == 0:
            return value
        last = path[-1]
        sources = unused.copy()
        sources[last] = True
        targets = unused
        # Top unary scores plus top outgoing-edge scores from distinct sources.
        out_best = np.where(self.offdiag[sources][:, targets], self.pairwise[sources][:, targets], -np.inf).max(axis=1)
        separate = _top_sum(self.unary[targets], r) + _top_sum(out_best[np.isfinite(out_best)], r)
        # Each remaining POI enters through its best allowed predecessor.
        into = np.where(self.offdiag[sources][:, targets], self.gain[sources][:, targets], -np.inf).max(axis=0)
        incoming = _top_sum(into, r)
        # Walk relaxation over unused POIs (repeats allowed, no self-loops).
        sub = np.where(self.offdiag[np.ix_(targets, targets)], self.gain[np.ix_(targets, targets)], -np.inf)
        reach = self.gain[last, targets].copy()
        for _ in range(r - 1):
            reach = (reach[:, None] + sub).max(axis=0)
        walk = float(reach.max())
        return value + min(separate, incoming, walk)

    def _best_completion(self, path, unused):
        best = -np.inf
        rest = np.flatnonzero(unused).tolist()
        for tail in itertools.permutations(rest, self.l - len(path)):
            best = max(best, self._path_value(tuple(path) + tail))
        return best

    def _better(self, value, path) -> bool:
        a, b = score_key(value), score_key(self.best_value)
        return a > b or (a == b and tuple(path) < self.best_path)

    def run(self):
        s = self.ilp.query.start
        unused = np.ones(self.ilp.m, dtype=bool)
        unused[s] = False
        self._dfs([s], self.ilp.offset, unused)

    def _dfs(self, path, value, unused):
        self.nodes += 1
        if len(path) == self.l:
            if self._better(value, path):
                self.best_path, self.best_value = tuple(path), value
            return
        bound = self.bound(path, value, unused)
        if self.check_bounds:
            true = self._best_completion(path, unused)
            assert score_key(bound) >= score_key(true), (path, bound, true)
        bkey, ikey = score_key(bound), score_key(self.best_value)
        if bkey < ikey or (bkey == ikey and tuple(path) > self.best_path[: len(path)]):
            return
        gains = self.gain[path[-1]]
        children = sorted(np.flatnonzero(unused).tolist(), key=lambda k: (-score_key(gains[k]), k))
        for k in children:
            unused[k] = False
            path.append(k)
            self._dfs(path, value + gains[k], unused)
            path.pop()
            unused[k] = True


def solve_bb(ilp: IlpModel, check_bounds: bool = False) -> IlpSolution:
    """Exact optimum of ``ilp``; among tied optima, the smallest path.

    ``check_bounds`` asserts at every node that the bound dominates the true
    best completion (found by enumeration; tiny instances only).
    """
    search = _Search(ilp, check_bounds)
    search.run()
    path = search.best_path
    if len(path) != ilp.query.length or not is_path(path):
        raise Infeasible("no feasible path found")
    value = sum_score(ilp.potentials.unary, ilp.potentials.pairwise, path)
    return IlpSolution(frozenset(zip(path, path[1:])), float(value), path, search.nodes)


def ilp_decode(model: PotentialModel, q: Query) -> ScoredSequence:
    sol = solve_bb(build_ilp(model, q))
    return ScoredSequence(sol.path, sol.objective)
