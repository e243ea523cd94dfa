"""Exact transportation simplex for discrete quadratic-cost transport.

The solver keeps the basis as a spanning tree over the bipartite node set
(rows then columns), prices with a candidate list refreshed by full reduced-
cost scans (Dantzig rule, ties broken by lowest flat index), and updates the
dual potentials of the detached subtree only.  Degeneracy is handled by a
deterministic index-based perturbation of the marginals; the returned flows
are re-solved exactly on the optimal basis with the unperturbed marginals.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from ..errors import InvalidInputError, SolverError
from ..measures import DiscreteMeasure
from .coupling import Coupling, DualSolution, squared_distances, verify_dual

__all__ = ["solve_transport", "transportation_simplex"]

_CANDIDATES = 64
_REFRESH_EVERY = 1024


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    """Initial basic feasible staircase; returns (rows, cols, flows) arrays."""
    n, m = a.size, b.size
    rows = np.empty(n + m - 1, dtype=np.intp)
    cols = np.empty(n + m - 1, dtype=np.intp)
    flows = np.empty(n + m - 1)
    ra, rb = a.copy(), b.copy()
    i = j = k = 0
    while k < n + m - 1:
        rows[k], cols[k] = i, j
        t = min(ra[i], rb[j])
        flows[k] = t
        ra[i] -= t
        rb[j] -= t
        k += 1
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif ra[i] <= rb[j]:
            i += 1
        else:
            j += 1
    return rows, cols, flows


class _Basis:
    """Spanning-tree basis with parent pointers, depths, and dual potentials."""

    def __init__(self, cost: np.ndarray, rows, cols, flows):
        self.cost = cost
        self.n, self.m = cost.shape
        self.N = self.n + self.m
        self.arc_i = np.asarray(rows, dtype=np.intp).copy()
        self.arc_j = np.asarray(cols, dtype=np.intp).copy()
        self.flow = np.asarray(flows, dtype=float).copy()
        self.adj: list[list[int]] = [[] for _ in range(self.N)]
        for slot in range(self.N - 1):
            self.adj[self.arc_i[slot]].append(slot)
            self.adj[self.n + self.arc_j[slot]].append(slot)
        self.parent = np.full(self.N, -1, dtype=np.intp)
        self.parent_slot = np.full(self.N, -1, dtype=np.intp)
        self.depth = np.zeros(self.N, dtype=np.intp)
        self.u = np.zeros(self.n)
        self.v = np.zeros(self.m)
        self.rebuild()

    def _other(self, slot: int, node: int) -> int:
        i, jn = self.arc_i[slot], self.n + self.arc_j[slot]
        return jn if node == i else i

    def rebuild(self):
        """Recompute parents, depths, and potentials from scratch (root = node 0)."""
        self.parent[:] = -1
        self.parent_slot[:] = -1
        self.depth[:] = 0
        self.u[0] = 0.0
        seen = np.zeros(self.N, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for slot in self.adj[node]:
                nxt = self._other(slot, node)
                if seen[nxt]:
                    continue
                seen[nxt] = True
                self.parent[nxt] = node
                self.parent_slot[nxt] = slot
                self.depth[nxt] = self.depth[node] + 1
                c = self.cost[self.arc_i[slot], self.arc_j[slot]]
                if nxt >= self.n:
                    self.v[nxt - self.n] = c - self.u[node]
                else:
                    self.u[nxt] = c - self.v[node - self.n]
                queue.append(nxt)
        if not seen.all():
            raise SolverError("basis is not a spanning tree")

    def cycle_path(self, ei: int, ejn: int):
        """Tree path between the entering arc's endpoints, as (slots, child_nodes)."""
        left, right = [], []
        x, y = ei, ejn
        while self.depth[x] > self.depth[y]:
            left.append((self.parent_slot[x], x))
            x = self.parent[x]
        while self.depth[y] > self.depth[x]:
            right.append((self.parent_slot[y], y))
            y = self.parent[y]
        while x != y:
            left.append((self.parent_slot[x], x))
            x = self.parent[x]
            right.append((self.parent_slot[y], y))
            y = self.parent[y]
        return left, right

    def pivot(self, ei: int, ej: int, rc: float):
        """Swap the entering arc (ei, ej) into the basis; returns the step mass.

        Walking the cycle ei -(entering, +theta)-> ejn -> ... -> ei, the signs
        follow bipartite alternation: on the branch climbing from ejn, an arc
        whose child node is a column carries -theta and a row child +theta;
        the branch climbing from ei is mirrored.
        """
        ejn = self.n + ej
        left, right = self.cycle_path(ei, ejn)
        minus, plus = [], []
        for slot, child in right:
            (minus if child >= self.n else plus).append(slot)
        for slot, child in left:
            (plus if child >= self.n else minus).append(slot)
        theta = np.inf
        leave = -1
        for slot in minus:
            f = self.flow[slot]
            if f < theta or (f == theta and slot < leave):
                theta = f
                leave = slot
        if leave < 0:
            raise SolverError("entering arc closes no cycle with negative arcs")
        for slot in plus:
            self.flow[slot] += theta
        for slot in minus:
            self.flow[slot] -= theta

        # The entering arc reconnects the side of the tree detached by the
        # leaving arc; that side contains ei when the leaving arc sits on the
        # ei-branch of the cycle.
        on_left = any(slot == leave for slot, _ in left)
        p_in = ei if on_left else ejn
        anchor = ejn if p_in == ei else ei

        for node in (self.arc_i[leave], self.n + self.arc_j[leave]):
            self.adj[node].remove(leave)
        self.arc_i[leave] = ei
        self.arc_j[leave] = ej
        self.flow[leave] = theta
        self.adj[ei].append(leave)
        self.adj[ejn].append(leave)

        # Re-root the detached side at p_in, shifting its potentials by +-rc
        # so the entering arc becomes tight; arcs inside the side stay tight.
        if p_in >= self.n:
            du, dv = -rc, rc
        else:
            du, dv = rc, -rc
        visited = np.zeros(self.N, dtype=bool)
        visited[anchor] = True
        visited[p_in] = True
        self.parent[p_in] = anchor
        self.parent_slot[p_in] = leave
        self.depth[p_in] = self.depth[anchor] + 1
        if p_in >= self.n:
            self.v[p_in - self.n] += dv
        else:
            self.u[p_in] += du
        queue = deque([p_in])
        while queue:
            node = queue.popleft()
            for slot in self.adj[node]:
                nxt = self._other(slot, node)
                if visited[nxt]:
                    continue
                visited[nxt] = True
                self.parent[nxt] = node
                self.parent_slot[nxt] = slot
                self.depth[nxt] = self.depth[node] + 1
                if nxt >= self.n:
                    self.v[nxt - self.n] += dv
                else:
                    self.u[nxt] += du
                queue.append(nxt)
        return theta


def _exact_reflow(basis: _Basis, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve the tree system for the flows with the unperturbed marginals."""
    n, N = basis.n, basis.N
    residual = np.concatenate([a, b])
    degree = np.array([len(basis.adj[k]) for k in range(N)], dtype=np.intp)
    used = np.zeros(N - 1, dtype=bool)
    flows = np.zeros(N - 1)
    incident = [list(basis.adj[k]) for k in range(N)]
    leaves = deque(k for k in range(N) if degree[k] == 1)
    processed = 0
    while leaves and processed < N - 1:
        node = leaves.popleft()
        slot = next((s for s in incident[node] if not used[s]), None)
        if slot is None:
            continue
        used[slot] = True
        processed += 1
        flows[slot] = residual[node]
        other = basis._other(slot, node)
        residual[other] -= residual[node]
        residual[node] = 0.0
        degree[node] -= 1
        degree[other] -= 1
        if degree[other] == 1:
            leaves.append(other)
    if processed != N - 1:
        raise SolverError("re-flow failed: basis is not a tree")
    return flows


def transportation_simplex(
    cost: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    sort_keys: tuple[np.ndarray, np.ndarray] | None = None,
    max_pivots: int | None = None,
):
    """Minimize sum_ij f_ij cost_ij subject to marginals a (rows) and b (cols).

    Returns ``(rows, cols, flows, u, v)`` where the first three arrays list the
    strictly positive entries of an optimal plan and (u, v) is an optimal dual
    with ``u[0] = 0``.  ``sort_keys`` optionally pre-orders rows and columns
    (e.g. by a 1-D projection) so the northwest-corner start is close to a
    monotone matching.
    """
    cost = np.ascontiguousarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = cost.shape
    if a.shape != (n,) or b.shape != (m,):
        raise InvalidInputError("marginal shapes do not match the cost matrix")
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, a.sum()):
        raise InvalidInputError("marginals must carry equal total mass")

    if sort_keys is not None:
        row_order = np.lexsort((np.arange(n), sort_keys[0]))
        col_order = np.lexsort((np.arange(m), sort_keys[1]))
    else:
        row_order = np.arange(n)
        col_order = np.arange(m)
    inv_rows = np.empty(n, dtype=np.intp)
    inv_rows[row_order] = np.arange(n)
    inv_cols = np.empty(m, dtype=np.intp)
    inv_cols[col_order] = np.arange(m)
    c = cost[np.ix_(row_order, col_order)]
    ap = a[row_order].copy()
    bp = b[col_order].copy()

    # Anti-degeneracy: tilt the row marginals, absorb the total in the last column.
    eps = 1e-14 * max(1.0, float(a.sum()))
    tilt = eps * np.arange(1, n + 1, dtype=float)
    ap += tilt
    bp[-1] += tilt.sum()

    rows0, cols0, flows0 = _northwest_corner(ap, bp)
    basis = _Basis(c, rows0, cols0, flows0)

    scale = max(1.0, float(np.abs(c).max()))
    opt_tol = 1e-11 * scale
    if max_pivots is None:
        max_pivots = max(20_000, 80 * (n + m))
    pivots = 0
    since_refresh = 0
    while True:
        reduced = c - basis.u[:, None] - basis.v[None, :]
        flat = reduced.ravel()
        k = min(_CANDIDATES, flat.size)
        part = np.argpartition(flat, k - 1)[:k]
        order = part[np.lexsort((part, flat[part]))]
        candidates = [int(s) for s in order if flat[s] < -opt_tol]
        if not candidates:
            break
        for flat_idx in candidates:
            ei, ej = divmod(flat_idx, m)
            rc = c[ei, ej] - basis.u[ei] - basis.v[ej]
            if rc >= -opt_tol:
                continue
            basis.pivot(ei, ej, rc)
            pivots += 1
            since_refresh += 1
            if pivots > max_pivots:
                raise SolverError(
                    "transportation simplex exceeded pivot budget",
                    instance={"n": n, "m": m, "pivots": pivots},
                )
            if since_refresh >= _REFRESH_EVERY:
                basis.rebuild()
                since_refresh = 0

    basis.rebuild()
    flows = _exact_reflow(basis, a[row_order], b[col_order])
    if flows.min() < -1e-8 * max(1.0, float(a.sum())):
        raise SolverError(
            "optimal basis produced a negative flow",
            instance={"n": n, "m": m, "min_flow": float(flows.min())},
        )
    flows = np.maximum(flows, 0.0)

    drop = 1e-12 * float(a.sum()) / (n + m)
    keep = flows > drop
    rows_out = row_order[basis.arc_i[keep]]
    cols_out = col_order[basis.arc_j[keep]]
    flows_out = flows[keep]

    u_out = np.empty(n)
    v_out = np.empty(m)
    u_out[row_order] = basis.u
    v_out[col_order] = basis.v
    shift = u_out[0]
    u_out -= shift
    v_out += shift
    return rows_out, cols_out, flows_out, u_out, v_out


def _balance_dual(cost, rows, cols, u, v):
    """Center the dual across support-disconnected components.

    When the optimal coupling's support graph is disconnected, the dual is
    free up to one additive constant per component; the simplex lands on an
    arbitrary extreme point of that face.  This picks the midpoint of each
    component's feasible shift interval (greedy in component order), which
    keeps feasibility and tightness on support pairs exactly and makes
    symmetric instances produce symmetric potentials.
    """
    n, m = cost.shape
    parent = np.arange(n + m, dtype=np.intp)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(rows, cols):
        ra, rb = find(i), find(n + j)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(k) for k in range(n + m)], dtype=np.intp)
    uniq, comp = np.unique(roots, return_inverse=True)
    k = uniq.size
    if k <= 1:
        return u, v
    row_comp, col_comp = comp[:n], comp[n:]

    slack = cost - u[:, None] - v[None, :]
    by_row = np.full((k, m), np.inf)
    np.minimum.at(by_row, row_comp, slack)
    contracted_t = np.full((k, k), np.inf)
    np.minimum.at(contracted_t, col_comp, by_row.T)
    pair_min = contracted_t.T  # pair_min[a, b] = min slack over rows in a, cols in b

    # union-by-min makes each root the smallest node of its component, and
    # np.unique sorts them, so component ids already follow node order.
    order = np.arange(k)
    shifts = np.zeros(k)
    lb = np.full(k, -np.inf)
    ub = np.full(k, np.inf)
    fixed_first = order[0]
    ub_upd = pair_min[:, fixed_first] + 0.0
    lb_upd = 0.0 - pair_min[fixed_first, :]
    ub = np.minimum(ub, ub_upd)
    lb = np.maximum(lb, lb_upd)
    for c in order[1:]:
        lo, hi = lb[c], ub[c]
        if not np.isfinite(lo):
            lo = min(hi, 0.0)
        if not np.isfinite(hi):
            hi = max(lo, 0.0)
        shift = 0.0 if lo > hi else (lo + hi) / 2.0
        shifts[c] = shift
        ub = np.minimum(ub, pair_min[:, c] + shift)
        lb = np.maximum(lb, shift - pair_min[c, :])
    u2 = u + shifts[row_comp]
    v2 = v - shifts[col_comp]
    if float((u2[:, None] + v2[None, :] - cost).max()) > 1e-9:
        return u, v  # balancing failed numerically: keep the raw optimal dual
    return u2, v2


def solve_transport(src: DiscreteMeasure, tgt: DiscreteMeasure) -> Coupling:
    """Exact optimal coupling between two discrete measures for cost |x - y|^2.

    The result carries an optimal :class:`DualSolution` (checked for
    feasibility and complementary slackness before returning), canonicalized
    across support components by :func:`_balance_dual`.
    """
    if src.dim != tgt.dim:
        raise InvalidInputError("source and target dimensions differ")
    n, m = src.n_atoms, tgt.n_atoms

    if n == 1 or m == 1:
        si, ti = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
        si, ti = si.ravel(), ti.ravel()
        mass = (src.weights[si] * tgt.weights[ti]) / 1.0
        diffs = src.points[si] - tgt.points[ti]
        cost = float(np.dot(mass, np.sum(diffs * diffs, axis=1)))
        c = squared_distances(src.points, tgt.points)
        if m == 1:
            dual = DualSolution(u=c[:, 0] - c[0, 0], w=np.array([c[0, 0]]))
        else:
            dual = DualSolution(u=np.zeros(1), w=c[0, :])
        coupling = Coupling(
            src=src, tgt=tgt, src_idx=si, tgt_idx=ti, mass=mass, cost=cost, dual=dual
        )
        verify_dual(src, tgt, dual, coupling)
        return coupling

    cost_matrix = squared_distances(src.points, tgt.points)
    keys = (src.points[:, 0], tgt.points[:, 0])
    rows, cols, flows, u, v = transportation_simplex(
        cost_matrix, src.weights, tgt.weights, sort_keys=keys
    )
    u, v = _balance_dual(cost_matrix, rows, cols, u, v)
    diffs = src.points[rows] - tgt.points[cols]
    cost = float(np.dot(flows, np.sum(diffs * diffs, axis=1)))
    dual = DualSolution(u=u, w=v)
    coupling = Coupling(
        src=src,
        tgt=tgt,
        src_idx=rows,
        tgt_idx=cols,
        mass=flows,
        cost=cost,
        dual=dual,
    )
    verify_dual(src, tgt, dual, coupling)
    return coupling
