"""Kantorovich lifting of a state pseudometric to full distributions.

The primal problem is the transportation LP

    min sum d(s,t) * w(s,t)   over matchings w with row sums Delta, col sums Theta,

solved by a transportation simplex on the bipartite support graph.  The dual
potentials x (one value per state, 0 <= x <= 1, x_s - x_t <= d(s,t)) are read
off the optimal basis and extended to the whole state space, so that

    sum (Delta(s) - Theta(s)) * x_s

equals the primal value.
"""

from __future__ import annotations

import numpy as np

from .model import SubDistribution, PROB_TOL

# Pivot tolerance of the simplex; reduced costs above -_EPS count as optimal.
_EPS = 1e-12


class StateMetric:
    """Dense 1-bounded pseudometric table over an ordered state set."""

    __slots__ = ("states", "values", "_index")

    def __init__(self, states, values):
        self.states = tuple(states)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (len(self.states), len(self.states)):
            raise ValueError("metric table shape does not match the state set")
        self._index = {s: i for i, s in enumerate(self.states)}

    @classmethod
    def zero(cls, states):
        n = len(states)
        return cls(states, np.zeros((n, n)))

    @classmethod
    def discrete(cls, states):
        n = len(states)
        return cls(states, 1.0 - np.eye(n))

    def __call__(self, s, t):
        return float(self.values[self._index[s], self._index[t]])

    def index(self, s):
        return self._index[s]

    def submatrix(self, rows, cols):
        ri = [self._index[s] for s in rows]
        ci = [self._index[t] for t in cols]
        return self.values[np.ix_(ri, ci)]

    def check_pseudometric(self, tol=1e-9):
        """Raise ValueError if the table violates the pseudometric axioms."""
        v = self.values
        if np.any(v < -tol) or np.any(v > 1 + tol):
            raise ValueError("metric entries must lie in [0, 1]")
        if np.max(np.abs(np.diag(v))) > tol:
            raise ValueError("metric diagonal must be zero")
        if np.max(np.abs(v - v.T)) > tol:
            raise ValueError("metric must be symmetric")
        # triangle: v[i,k] <= v[i,j] + v[j,k] for all j
        for j in range(len(self.states)):
            if np.any(v > v[:, j][:, None] + v[j, :][None, :] + tol):
                raise ValueError("metric violates the triangle inequality")

    def is_pseudometric(self, tol=1e-9):
        try:
            self.check_pseudometric(tol)
        except ValueError:
            return False
        return True


class TransportPlan:
    """Optimal matching, its value, and dual potentials for one instance."""

    __slots__ = ("value", "matching", "duals", "dual_value")

    def __init__(self, value, matching, duals, dual_value):
        self.value = value
        self.matching = matching      # dict (s, t) -> mass
        self.duals = duals            # dict state -> potential in [0, 1]
        self.dual_value = dual_value

    def __repr__(self):
        return f"TransportPlan(value={self.value:.6g}, |matching|={len(self.matching)})"


def _northwest_corner(supply, demand):
    """Initial basic feasible solution; always returns m+n-1 basic cells."""
    m, n = len(supply), len(demand)
    flow = np.zeros((m, n))
    a = list(supply)
    b = list(demand)
    basis = []
    i = j = 0
    while True:
        q = min(a[i], b[j])
        flow[i, j] = q
        basis.append((i, j))
        a[i] -= q
        b[j] -= q
        if i == m - 1 and j == n - 1:
            break
        # On simultaneous exhaustion move down only, leaving a zero basic
        # cell in the next row; keeps the basis a spanning tree.
        if a[i] <= _EPS and i < m - 1:
            i += 1
        else:
            j += 1
    return flow, basis


def _tree_duals(cost, basis, m, n):
    """Solve u_i + v_j = cost[i, j] over the basis tree with u_0 = 0."""
    u = [None] * m
    v = [None] * n
    by_row = [[] for _ in range(m)]
    by_col = [[] for _ in range(n)]
    for (i, j) in basis:
        by_row[i].append(j)
        by_col[j].append(i)
    u[0] = 0.0
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in by_row[k]:
                if v[j] is None:
                    v[j] = cost[k, j] - u[k]
                    stack.append(("c", j))
        else:
            for i in by_col[k]:
                if u[i] is None:
                    u[i] = cost[i, k] - v[k]
                    stack.append(("r", i))
    return u, v


def _basis_cycle(basis, enter):
    """Alternating cycle created by adding `enter` to the basis tree.

    Returns the cycle as a list of cells starting with `enter`; odd positions
    are the cells whose flow decreases.
    """
    i0, j0 = enter
    adj = {}
    for (i, j) in basis:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    # path from row node i0 to column node j0 through the tree
    start, goal = ("r", i0), ("c", j0)
    prev = {start: None}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        for nxt in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = node
                queue.append(nxt)
    path = []
    node = goal
    while node is not None:
        path.append(node)
        node = prev[node]
    path.reverse()  # r_i0 ... c_j0
    cycle = [enter]
    # Consecutive path nodes alternate row/column; each adjacent pair is a
    # basic cell.  Walking from c_j0 back toward r_i0 yields the cycle order.
    cells = []
    for a, b in zip(path, path[1:]):
        (ka, xa), (kb, xb) = a, b
        cell = (xa, xb) if ka == "r" else (xb, xa)
        cells.append(cell)
    cells.reverse()
    cycle.extend(cells)
    return cycle


def _transport_simplex(cost, supply, demand, max_pivots=100000):
    """Transportation simplex; returns (flow, u, v) at optimality.

    Entering variable: first cell in row-major order with negative reduced
    cost (Bland's rule).  Leaving variable: among minimal-flow decreasing
    cells, the lowest (row, column) index.
    """
    m, n = len(supply), len(demand)
    flow, basis = _northwest_corner(supply, demand)
    for _ in range(max_pivots):
        u, v = _tree_duals(cost, basis, m, n)
        uu = np.array(u)
        vv = np.array(v)
        reduced = cost - uu[:, None] - vv[None, :]
        in_basis = set(basis)
        enter = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in in_basis and reduced[i, j] < -_EPS:
                    enter = (i, j)
                    break
            if enter:
                break
        if enter is None:
            return flow, u, v
        cycle = _basis_cycle(basis, enter)
        minus = cycle[1::2]
        theta = min(flow[c] for c in minus)
        leave = min(c for c in minus if flow[c] <= theta + _EPS)
        for k, cell in enumerate(cycle):
            if k % 2 == 0:
                flow[cell] += theta
            else:
                flow[cell] = max(flow[cell] - theta, 0.0)
        basis.remove(leave)
        basis.append(enter)
        basis.sort()
    raise RuntimeError("transportation simplex failed to terminate")


def _check_masses(left: SubDistribution, right: SubDistribution):
    if not left.is_full() or not right.is_full():
        raise ValueError(
            f"kantorovich requires two full distributions "
            f"(masses {left.mass:.12g} and {right.mass:.12g})"
        )


def _solve(d: StateMetric, left: SubDistribution, right: SubDistribution):
    rows = left.support
    cols = right.support
    cost = d.submatrix(rows, cols)
    supply = np.array([p for _, p in left.items])
    demand = np.array([p for _, p in right.items])
    if len(rows) == 1:
        # point source: the matching is the target distribution itself
        flow = demand[None, :].copy()
        u = [0.0]
        v = list(cost[0])
    elif len(cols) == 1:
        flow = supply[:, None].copy()
        v = [0.0]
        u = list(cost[:, 0])
    else:
        flow, u, v = _transport_simplex(cost, supply, demand)
    value = float(np.sum(flow * cost))
    return rows, cols, cost, flow, u, v, value


def _extend_potentials(d: StateMetric, rows, cols, u):
    """Globally feasible potentials from the basis duals.

    One envelope transform pass turns the row duals into a 1-Lipschitz
    function on all states without losing optimality; shifting the minimum
    to zero then lands the range inside [0, 1].
    """
    ridx = [d.index(s) for s in rows]
    cidx = [d.index(t) for t in cols]
    uu = np.asarray(u)
    # g(t) = max_s (u_s - d(s, t)) over row states, for each column state
    g = np.max(uu[:, None] - d.values[np.ix_(ridx, cidx)], axis=0)
    # x(s~) = min_t (g(t) + d(s~, t)) over column states, for every state
    x = np.min(g[None, :] + d.values[:, cidx], axis=1)
    x = x - np.min(x)
    np.clip(x, 0.0, 1.0, out=x)
    return {s: float(x[i]) for i, s in enumerate(d.states)}


def _dual_objective(duals, left: SubDistribution, right: SubDistribution):
    total = 0.0
    for s, p in left.items:
        total += p * duals[s]
    for t, q in right.items:
        total -= q * duals[t]
    return total


def kantorovich(d: StateMetric, left: SubDistribution, right: SubDistribution) -> TransportPlan:
    """Minimal expected distance between two full distributions under d."""
    _check_masses(left, right)
    rows, cols, _, flow, u, _, value = _solve(d, left, right)
    matching = {}
    for i, s in enumerate(rows):
        for j, t in enumerate(cols):
            if flow[i, j] > 1e-15:
                matching[(s, t)] = float(flow[i, j])
    duals = _extend_potentials(d, rows, cols, u)
    dual_value = _dual_objective(duals, left, right)
    return TransportPlan(value, matching, duals, dual_value)


def kantorovich_dual(d: StateMetric, left: SubDistribution, right: SubDistribution) -> TransportPlan:
    """Same instance solved for the dual: value is the dual objective."""
    plan = kantorovich(d, left, right)
    return TransportPlan(plan.dual_value, plan.matching, plan.duals, plan.dual_value)


def kantorovich_value(d: StateMetric, left: SubDistribution, right: SubDistribution) -> float:
    """Primal value only; skips building the matching and potentials."""
    _check_masses(left, right)
    if left.key == right.key:
        return 0.0
    return _solve(d, left, right)[6]
