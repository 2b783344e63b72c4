"""Mesh-current (resistive) formulation: v = f(i) elements, current drive.

Swapping the element law's axes and the source type yields the dual
description of the same graphs: unknown mesh currents, KVL loop equations,
and an input coefficient phi_meshes with

    v_in = D * phi_meshes(alpha) * i_in**alpha

for the power-law case.  The two formulations convert into each other by
alpha -> 1/alpha, D -> D**-alpha, phi -> phi(1/alpha)**-alpha, which
generalizes r_in = 1/g_in beyond the linear case.  Large exponents now
produce current (not voltage) hardlimiters.

Loop bases are explicit inputs: the built-in fig_b1 carries the two-mesh
basis plus the source loop; netlists can supply ``.mesh`` sections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._newton import EPS, NOISE_MULT, REL_TOL, damped_newton, max_iterations
from .characteristic import Characteristic
from .circuit import Circuit, Mesh
from .solver import SolverError, _currents, _floor_slopes, _integral, _slopes

__all__ = [
    "MeshSolution",
    "mesh_solve",
    "phi_meshes_from_nodes",
    "phi_b6_closed_form",
]


@dataclass(frozen=True)
class MeshSolution:
    i_in: float
    mesh_currents: dict[str, float]
    input_voltage: float
    phi_meshes: float | None  # None for laws with more than one term
    residual_norm: float
    iterations: int


def _loop_matrix(c: Circuit, basis: Sequence[Mesh]):
    names = [m.name for m in basis]
    if "source" not in names:
        raise ValueError("mesh basis must include the loop named 'source'")
    if len(set(names)) != len(names):
        raise ValueError("duplicate mesh names in basis")

    n_br = len(c.branches)
    unknowns = [m for m in basis if m.name != "source"]
    src = np.zeros(n_br)
    L = np.zeros((n_br, len(unknowns)))
    membership = np.zeros(n_br, dtype=int)

    def fill(column, mesh: Mesh):
        for signed in mesh.branches:
            idx = abs(signed) - 1
            if not (0 <= idx < n_br):
                raise ValueError(
                    f"mesh {mesh.name!r} references branch {abs(signed)} "
                    f"but the circuit has {n_br}")
            membership[idx] += 1
            column[idx] += 1.0 if signed > 0 else -1.0

    for m in basis:
        if m.name == "source":
            fill(src, m)
        else:
            fill(L[:, unknowns.index(m)], m)
    if np.any(membership > 2):
        bad = [i + 1 for i in np.nonzero(membership > 2)[0]]
        raise ValueError(f"invalid mesh basis: branches {bad} appear in more than two loops")
    return L, src, [m.name for m in unknowns]


def mesh_solve(c: Circuit, f_resistive: Characteristic, i_in: float,
               basis: Sequence[Mesh] | None = None,
               max_iters: int | None = None) -> MeshSolution:
    """Solve the KVL loop equations under a current drive.

    Branch current is the signed sum of its loops' currents (plus i_in on
    the source loop); a branch of multiplicity w splits that current over w
    parallel elements.  The input voltage is collected around the source
    loop.  Uses the same damped Newton core as the nodal solver, with the
    co-energy (integral of f over current) as the convex merit.
    """
    if not (i_in > 0.0):
        raise ValueError(f"i_in must be positive, got {i_in}")
    basis = tuple(basis) if basis is not None else c.meshes
    if not basis:
        raise ValueError("no mesh basis: pass one or use a circuit with .mesh sections")
    L, src, names = _loop_matrix(c, basis)
    w = np.array([br.w for br in c.branches], dtype=float)
    f = f_resistive
    n_unknown = L.shape[1]

    def branch_currents(x: np.ndarray) -> np.ndarray:
        return L @ x + src * i_in

    def drops(x: np.ndarray) -> np.ndarray:
        return _currents(f, branch_currents(x) / w)

    def residual(x: np.ndarray) -> np.ndarray:
        return L.T @ drops(x)

    abs_cap = 1e-12 * max(1.0, f(i_in))

    def tolerances(x: np.ndarray) -> np.ndarray:
        j = branch_currents(x) / w
        flow = np.abs(L.T) @ np.abs(drops(x))
        cscale = max(float(i_in), float(np.max(np.abs(x))) if x.size else 0.0)
        slo = _floor_slopes(f, j, EPS * cscale) / w
        floor = (np.abs(L.T) @ slo) * cscale
        return np.maximum(np.minimum(REL_TOL * flow, abs_cap),
                          NOISE_MULT * EPS * floor)

    def jacobian(x: np.ndarray) -> np.ndarray:
        j = branch_currents(x) / w
        g = _slopes(f, j) / w
        J = L.T @ (g[:, None] * L)
        if f.min_exponent < 1.0 and np.any(np.abs(j) < 1e-12):
            J[np.diag_indices_from(J)] += 1e-9
        return J

    def objective(x: np.ndarray) -> float:
        return float((w * _integral(f, branch_currents(x) / w)).sum())

    if n_unknown == 0:
        x = np.zeros(0)
        res_norm, iters = 0.0, 0
    else:
        A = L.T @ ((1.0 / w)[:, None] * L)
        rhs = -(L.T @ (src / w)) * i_in
        x0 = np.linalg.solve(A, rhs)
        outcome = damped_newton(x0, residual, jacobian, objective, tolerances,
                                abs_tol=abs_cap,
                                max_iters=max_iterations(max_iters))
        if not outcome.converged:
            raise SolverError(
                f"KVL iteration did not converge (residual {outcome.residual_inf:.3e})")
        x = outcome.x
        res_norm, iters = outcome.residual_inf, outcome.iterations

    v_in = float(src @ drops(x))
    phi = None
    if len(f.terms) == 1:
        d, a = f.terms[0]
        phi = v_in / (d * i_in**a)
    return MeshSolution(
        i_in=float(i_in),
        mesh_currents={name: float(val) for name, val in zip(names, x)},
        input_voltage=v_in,
        phi_meshes=phi,
        residual_norm=float(res_norm),
        iterations=int(iters),
    )


def phi_meshes_from_nodes(phi_nodes_at: Callable[[float], float], alpha: float) -> float:
    """Convert a nodal input coefficient to the mesh-current one.

    phi_meshes(alpha) = 1 / phi_nodes(1/alpha)**alpha; at alpha = 1 this is
    the familiar r_in = 1/g_in.
    """
    if not (alpha > 0.0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    return 1.0 / phi_nodes_at(1.0 / alpha) ** alpha


def phi_b6_closed_form(alpha: float) -> float:
    """Closed-form phi_meshes(alpha) of the built-in fig_b1 basis.

    Eliminating the far mesh gives i2 = i1 / (1 + 2**(1/a)); the input mesh
    then yields i1/i_in, and phi follows from the drop across the direct
    port element: phi = (1 - i1/i_in)**a.
    """
    if not (alpha > 0.0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    a = float(alpha)
    t = 1.0 + 2.0 ** (1.0 / a)  # i1 / i2
    inner = 1.0 + 2.0 / t**a
    i1_frac = 1.0 / (1.0 + inner ** (1.0 / a))
    return (1.0 - i1_frac) ** a
