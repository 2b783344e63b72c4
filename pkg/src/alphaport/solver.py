"""Exact DC solution of a one-port with identical monotone conductors.

Unknowns are the internal node potentials; the input terminals are pinned
to (v_in, 0).  Damped Newton iterates on the KCL residuals, safeguarded by
a line search on the co-content (the per-branch integral of the conductor
law), which is strictly convex in the internal potentials, so the solution
exists, is unique and is always found.

Branches that lie on no path between the input terminals carry no current;
they are trimmed before the iteration (see _live_split) and their nodes
take the potential of the anchor they hang from, which keeps the Jacobian
nonsingular for superlinear laws and avoids phantom roundoff currents for
sublinear ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._newton import EPS, NOISE_MULT, REL_TOL, damped_newton, max_iterations
from .characteristic import Characteristic
from .circuit import Branch, Circuit, validate

__all__ = [
    "SolverError",
    "DcSolution",
    "solve_dc",
    "input_current_from_potentials",
    "port_current_sum",
    "co_content",
]

# Diagonal bump applied when a sublinear exponent meets a (numerically)
# zero branch drop, where the true slope diverges.
SINGULAR_SLOPE_REG = 1e-9
ZERO_DROP = 1e-12
# Guards the tolerance-floor granule when both endpoint potentials are 0.
TINY_SCALE = 1e-300


class SolverError(RuntimeError):
    """Newton failed to meet tolerance; for valid inputs this is a bug signal."""


@dataclass(frozen=True)
class DcSolution:
    """DC operating point of a one-port.

    Branches are re-oriented so every stored drop is nonnegative (current
    flows from ``n1`` to ``n2``); ``branches`` preserves the input order
    otherwise.  ``input_current`` is the signed inflow collected at the
    grounded terminal.
    """

    v_in: float
    potentials: dict[str, float]
    branches: tuple[Branch, ...]
    branch_voltages: tuple[float, ...]
    branch_currents: tuple[float, ...]
    input_current: float
    residual_norm: float  # largest per-node KCL imbalance
    residual_sum: float  # total KCL imbalance; bounds the port-sum gap
    iterations: int

    @property
    def d(self) -> dict[str, float]:
        """Voltage-division ratios v_k / v_in."""
        return {n: p / self.v_in for n, p in self.potentials.items()}


def _term_arrays(f: Characteristic):
    coef = np.array(f.coefficients)
    expo = np.array(f.exponents)
    return coef, expo


def _currents(f: Characteristic, drops: np.ndarray) -> np.ndarray:
    """Odd extension sign(d) * f(|d|), vectorized over branch drops."""
    coef, expo = _term_arrays(f)
    ad = np.abs(drops)
    mag = (coef[None, :] * ad[:, None] ** expo[None, :]).sum(axis=1)
    return np.sign(drops) * mag


def _slopes(f: Characteristic, drops: np.ndarray) -> np.ndarray:
    ad = np.abs(drops)
    out = np.zeros_like(ad)
    for d, a in f.terms:
        base = np.maximum(ad, ZERO_DROP) if a < 1.0 else ad
        out += d * a * base ** (a - 1.0)
    return out


def _floor_slopes(f: Characteristic, drops: np.ndarray, granule: np.ndarray) -> np.ndarray:
    """Slopes evaluated no closer to the origin than one representable step.

    Feeds the per-equation tolerance floor: a sublinear law's current jumps
    by about f(granule) when a near-zero drop moves by one potential ulp,
    which is far more than slope-at-the-clamp would suggest.
    """
    ad = np.abs(drops)
    out = np.zeros_like(ad)
    for d, a in f.terms:
        base = np.maximum(ad, granule)
        out += d * a * base ** (a - 1.0)
    return out


def _integral(f: Characteristic, drops: np.ndarray) -> np.ndarray:
    coef, expo = _term_arrays(f)
    ad = np.abs(drops)
    return (coef[None, :] / (expo[None, :] + 1.0)
            * ad[:, None] ** (expo[None, :] + 1.0)).sum(axis=1)


def _snap_equal_potentials(internal: list[str], x, port_values: dict[str, float],
                           branches) -> "np.ndarray | None":
    """Collapse numerically-zero branch drops to exact equality.

    Symmetric topologies put pairs of nodes at identical potentials; the
    iteration leaves them a few ulps apart, and for sublinear laws the
    residual current |drop|**alpha of that gap is enormous relative to it.
    Equality is representable, so force it and let the caller re-verify.
    """
    values = dict(port_values)
    for name, value in zip(internal, x):
        values[name] = float(value)

    parent: dict[str, str] = {n: n for n in values}

    def find(n: str) -> str:
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    changed = False
    for br in branches:
        p1, p2 = values[br.n1], values[br.n2]
        gap = abs(p1 - p2)
        if 0.0 < gap <= 1e3 * EPS * max(abs(p1), abs(p2)):
            r1, r2 = find(br.n1), find(br.n2)
            if r1 != r2:
                parent[r1] = r2
                changed = True
    if not changed:
        return None

    groups: dict[str, list[str]] = {}
    for n in values:
        groups.setdefault(find(n), []).append(n)
    snapped = dict(values)
    ports = set(port_values)
    for members in groups.values():
        if len(members) == 1:
            continue
        anchored = [n for n in members if n in ports]
        if len(anchored) > 1:
            continue  # cannot short the port; leave the group alone
        level = values[anchored[0]] if anchored else (
            sum(values[n] for n in members) / len(members))
        for n in members:
            snapped[n] = level
    return np.array([snapped[n] for n in internal])


def _live_split(c: Circuit) -> tuple[list[int], list[tuple[str, str]]]:
    """Split branches into current carriers and dead attachments.

    A branch carries current only if it lies on some simple path between
    the input terminals, i.e. it shares a biconnected component with a
    virtual edge joining them.  Everything else (pendant limbs, parallel
    stubs, dead loops hanging off one articulation node) is removed from
    the iteration: those drops are exactly zero, and for superlinear laws
    they zero the Jacobian while for sublinear laws the roundoff gap would
    generate large phantom currents.

    Returns the live branch indices plus (node, anchor) assignments, in an
    order safe to replay, giving every dead node the potential of the live
    or port node its piece hangs from.
    """
    n_br = len(c.branches)
    adjacency: dict[str, list[tuple[int, str]]] = {n: [] for n in c.nodes}
    for i, br in enumerate(c.branches):
        adjacency[br.n1].append((i, br.n2))
        adjacency[br.n2].append((i, br.n1))
    a, b = c.input_port
    virtual = n_br
    adjacency[a].append((virtual, b))
    adjacency[b].append((virtual, a))

    # iterative biconnected components over edge ids (parallel edges are
    # distinct ids, so a parallel pair forms its own 2-edge component)
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    edge_stack: list[int] = []
    live: set[int] = set()
    counter = 0
    for root in c.nodes:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        work = [(root, -1, iter(adjacency[root]))]
        while work:
            node, parent_edge, it = work[-1]
            advanced = False
            for edge_id, other in it:
                if edge_id == parent_edge:
                    continue
                if other not in disc:
                    disc[other] = low[other] = counter
                    counter += 1
                    edge_stack.append(edge_id)
                    work.append((other, edge_id, iter(adjacency[other])))
                    advanced = True
                    break
                if disc[other] < disc[node]:
                    edge_stack.append(edge_id)
                    low[node] = min(low[node], disc[other])
            if advanced:
                continue
            work.pop()
            if not work:
                continue
            parent_node = work[-1][0]
            low[parent_node] = min(low[parent_node], low[node])
            if low[node] >= disc[parent_node]:
                component = []
                while True:
                    edge_id = edge_stack.pop()
                    component.append(edge_id)
                    if edge_id == parent_edge:
                        break
                if virtual in component:
                    live.update(e for e in component if e != virtual)

    alive = sorted(live)
    dead = [i for i in range(n_br) if i not in live]

    # flood dead pieces outward from their unique live/port anchor
    anchored = {a, b}
    for i in alive:
        anchored.add(c.branches[i].n1)
        anchored.add(c.branches[i].n2)
    assignments: list[tuple[str, str]] = []
    assigned = set(anchored)
    frontier = list(anchored)
    dead_adj: dict[str, list[str]] = {}
    for i in dead:
        br = c.branches[i]
        dead_adj.setdefault(br.n1, []).append(br.n2)
        dead_adj.setdefault(br.n2, []).append(br.n1)
    while frontier:
        node = frontier.pop()
        for other in dead_adj.get(node, ()):
            if other not in assigned:
                assigned.add(other)
                assignments.append((other, node))
                frontier.append(other)
    return alive, assignments


def solve_dc(c: Circuit, f: Characteristic, v_in: float,
             initial_potentials: dict[str, float] | None = None,
             max_iters: int | None = None) -> DcSolution:
    """Solve KCL at every internal node for the given drive voltage.

    The iteration starts from the unit-conductance linear solution unless
    ``initial_potentials`` provides a warm start (useful for sweeps and for
    continuation toward large exponents).
    """
    if not (v_in > 0.0):
        raise ValueError(f"v_in must be positive, got {v_in}")
    rep = validate(c)
    if not rep.ok:
        raise ValueError("invalid circuit: " + "; ".join(rep.errors()))

    a, b = c.input_port
    alive, dead_assignments = _live_split(c)
    dead_nodes = {n for n, _ in dead_assignments}
    internal = [n for n in c.internal_nodes() if n not in dead_nodes]
    index = {n: i for i, n in enumerate(internal)}
    n_int = len(internal)

    # per-branch endpoint indices; -1 marks the driven terminal, -2 ground
    def node_code(name: str) -> int:
        if name == a:
            return -1
        if name == b:
            return -2
        return index[name]

    br = [c.branches[i] for i in alive]
    i1 = np.array([node_code(x.n1) for x in br], dtype=int)
    i2 = np.array([node_code(x.n2) for x in br], dtype=int)
    w = np.array([x.w for x in br], dtype=float)
    n_br = len(br)

    def full_potentials(x: np.ndarray) -> np.ndarray:
        # virtual layout: internal nodes, then [a]=v_in, [b]=0
        p = np.empty(n_int + 2)
        p[:n_int] = x
        p[n_int] = v_in
        p[n_int + 1] = 0.0
        return p

    def endpoint(idx: np.ndarray, p: np.ndarray) -> np.ndarray:
        out = np.where(idx == -1, p[n_int], 0.0)
        mask = idx >= 0
        out[mask] = p[idx[mask]]
        return out

    def drops_of(x: np.ndarray) -> np.ndarray:
        p = full_potentials(x)
        return endpoint(i1, p) - endpoint(i2, p)

    def residual(x: np.ndarray) -> np.ndarray:
        cur = w * _currents(f, drops_of(x))
        r = np.zeros(n_int)
        m1 = i1 >= 0
        m2 = i2 >= 0
        np.add.at(r, i1[m1], cur[m1])
        np.subtract.at(r, i2[m2], cur[m2])
        return r

    abs_cap = 1e-12 * max(1.0, f(v_in))

    def tolerances(x: np.ndarray) -> np.ndarray:
        # relative share of the local flow (capped at the flat input-scale
        # tolerance), plus the roundoff floor of forming each drop as a
        # difference of the stored potentials
        p = full_potentials(x)
        e1 = endpoint(i1, p)
        e2 = endpoint(i2, p)
        d = e1 - e2
        cur = np.abs(w * _currents(f, d))
        pscale = np.maximum(np.abs(e1), np.abs(e2))
        slo = w * _floor_slopes(f, d, EPS * np.maximum(pscale, TINY_SCALE))
        flow = np.zeros(n_int)
        floor = np.zeros(n_int)
        m1 = i1 >= 0
        m2 = i2 >= 0
        for idx, mask in ((i1, m1), (i2, m2)):
            np.add.at(flow, idx[mask], cur[mask])
            np.add.at(floor, idx[mask], (slo * pscale)[mask])
        return np.maximum(np.minimum(REL_TOL * flow, abs_cap),
                          NOISE_MULT * EPS * floor)

    def jacobian(x: np.ndarray) -> np.ndarray:
        d = drops_of(x)
        g = w * _slopes(f, d)
        J = np.zeros((n_int, n_int))
        for k in range(n_br):
            ia, ib, gk = i1[k], i2[k], g[k]
            if ia >= 0:
                J[ia, ia] += gk
            if ib >= 0:
                J[ib, ib] += gk
            if ia >= 0 and ib >= 0:
                J[ia, ib] -= gk
                J[ib, ia] -= gk
        if f.min_exponent < 1.0 and np.any(np.abs(d) < ZERO_DROP):
            J[np.diag_indices_from(J)] += SINGULAR_SLOPE_REG
        return J

    def objective(x: np.ndarray) -> float:
        return float((w * _integral(f, drops_of(x))).sum())

    def linear_start() -> np.ndarray:
        L = np.zeros((n_int, n_int))
        rhs = np.zeros(n_int)
        for k in range(n_br):
            ia, ib, wk = i1[k], i2[k], w[k]
            for me, other in ((ia, ib), (ib, ia)):
                if me < 0:
                    continue
                L[me, me] += wk
                if other >= 0:
                    L[me, other] -= wk
                elif other == -1:
                    rhs[me] += wk * v_in
        return np.linalg.solve(L, rhs)

    if n_int == 0:
        x = np.zeros(0)
        outcome_res, outcome_iters = 0.0, 0
        residual_sum = 0.0
    else:
        if initial_potentials is not None:
            x0 = np.array([float(initial_potentials.get(n, 0.0)) for n in internal])
        else:
            x0 = linear_start()
        outcome = damped_newton(x0, residual, jacobian, objective, tolerances,
                                abs_tol=abs_cap,
                                max_iters=max_iterations(max_iters))
        if not outcome.converged:
            snapped = _snap_equal_potentials(internal, outcome.x,
                                             {a: float(v_in), b: 0.0}, br)
            if snapped is not None:
                outcome = damped_newton(snapped, residual, jacobian, objective,
                                        tolerances, abs_tol=abs_cap,
                                        max_iters=max_iterations(max_iters))
        if not outcome.converged:
            raise SolverError(
                f"KCL iteration did not converge within {max_iterations(max_iters)} "
                f"iterations (residual {outcome.residual_inf:.3e}); "
                "valid circuits always converge, so check the inputs")
        x = outcome.x
        outcome_res, outcome_iters = outcome.residual_inf, outcome.iterations
        residual_sum = float(np.abs(residual(x)).sum())

    potentials = {a: float(v_in), b: 0.0}
    for n in internal:
        potentials[n] = float(x[index[n]])
    for node, anchor in dead_assignments:
        potentials[node] = potentials[anchor]

    oriented: list[Branch] = []
    voltages: list[float] = []
    currents: list[float] = []
    for brn in c.branches:
        drop = potentials[brn.n1] - potentials[brn.n2]
        if drop < 0.0:
            oriented.append(Branch(brn.n2, brn.n1, brn.w))
            drop = -drop
        else:
            oriented.append(brn)
        voltages.append(drop)
        currents.append(brn.w * f(drop))

    i_b = port_current_sum(c, f, potentials, b)
    i_a = -port_current_sum(c, f, potentials, a)  # outflow at the driven terminal
    # the two port sums differ by exactly the telescoped internal
    # imbalances, so the achieved residuals bound the legitimate gap
    if abs(i_a - i_b) > residual_sum + 1e-9 * max(1.0, abs(i_b)):
        raise SolverError(
            f"input current differs between terminals ({i_a!r} vs {i_b!r}); "
            "KCL solution is inconsistent")

    return DcSolution(
        v_in=float(v_in),
        potentials=potentials,
        branches=tuple(oriented),
        branch_voltages=tuple(voltages),
        branch_currents=tuple(currents),
        input_current=float(i_b),
        residual_norm=float(outcome_res),
        residual_sum=float(residual_sum),
        iterations=int(outcome_iters),
    )


def port_current_sum(c: Circuit, f: Characteristic, potentials, node: str) -> float:
    """Signed current flowing into ``node`` from its incident branches.

    At the grounded terminal this is the input current; at the driven
    terminal it is its negative (KCL through the whole port).
    """
    total = 0.0
    p = potentials
    for br in c.branches:
        if br.n1 == node and br.n2 == node:
            continue
        if br.n2 == node:
            total += br.w * f.eval_signed(p[br.n1] - p[br.n2])
        elif br.n1 == node:
            total += br.w * f.eval_signed(p[br.n2] - p[br.n1])
    return total


def input_current_from_potentials(c: Circuit, f: Characteristic, potentials) -> float:
    """Input current as the branch-current sum collected at ground."""
    return port_current_sum(c, f, potentials, c.b)


def co_content(c: Circuit, f: Characteristic, potentials) -> float:
    """Sum over branches of w * integral of f over the branch drop.

    Convex in the internal potentials; the DC solution is its unique
    minimizer with the port pinned, which the Newton line search exploits.
    """
    total = 0.0
    for br in c.branches:
        total += br.w * f.antiderivative(potentials[br.n1] - potentials[br.n2])
    return total
