import random

import numpy as np
import pytest

from alphaport import (
    Characteristic,
    alpha_solve,
    build_canonical,
    d_sweep,
    hardlimiter_limit,
    parse_netlist,
    phi_closed_form_fig_a1,
    solve_dc,
)
from conftest import random_connected_circuit

FIG_A1 = build_canonical("fig_a1")
FIG4 = build_canonical("fig4")


def linear_input_conductance(c):
    """Independent oracle: assemble the unit-conductance Laplacian directly."""
    nodes = sorted(c.nodes)
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    lap = np.zeros((n, n))
    for br in c.branches:
        i, j = idx[br.n1], idx[br.n2]
        lap[i, i] += br.w
        lap[j, j] += br.w
        lap[i, j] -= br.w
        lap[j, i] -= br.w
    a, b = c.input_port
    interior = [i for i in range(n) if i not in (idx[a], idx[b])]
    rhs = -lap[np.ix_(interior, [idx[a]])].ravel()  # unit drive at a, ground at b
    p = np.zeros(n)
    p[idx[a]] = 1.0
    if interior:
        p_int = np.linalg.solve(lap[np.ix_(interior, interior)], rhs)
        for k, i in enumerate(interior):
            p[i] = p_int[k]
    return float(-lap[idx[b], :] @ p)  # current collected at ground


class TestAlphaSolve:
    def test_linear_profile_of_reference_bridge(self):
        prof = alpha_solve(FIG_A1, 1.0)
        assert prof.phi == pytest.approx(1.6, abs=1e-12)
        assert prof.d["o"] == pytest.approx(0.4, abs=1e-12)
        assert prof.d["a"] == 1.0 and prof.d["b"] == 0.0

    def test_cubic_profile_of_reference_bridge(self):
        prof = alpha_solve(FIG_A1, 3.0)
        assert prof.phi == pytest.approx(1.1325, abs=1e-3)
        # divider ratio has the closed form 2 / (2 + 9**(1/3))
        assert prof.d["o"] == pytest.approx(2.0 / (2.0 + 9.0 ** (1.0 / 3.0)), abs=1e-9)

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 3.5])
    def test_symmetric_bridge_formula(self, alpha):
        prof = alpha_solve(FIG4, alpha)
        assert prof.phi == pytest.approx(1.0 + 2.0 * (1.0 / 3.0) ** alpha, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0, 20.0])
    def test_matches_closed_form(self, alpha):
        assert alpha_solve(FIG_A1, alpha).phi == pytest.approx(
            phi_closed_form_fig_a1(alpha), abs=1e-9)

    def test_profile_independent_of_drive_and_coefficient(self):
        prof = alpha_solve(FIG_A1, 2.5)
        sol = solve_dc(FIG_A1, Characteristic(((4.2, 2.5),)), 7.0)
        for n in FIG_A1.nodes:
            assert sol.potentials[n] / 7.0 == pytest.approx(prof.d[n], abs=1e-9)
        assert sol.input_current == pytest.approx(4.2 * prof.phi * 7.0**2.5, rel=1e-9)

    def test_ratios_stay_in_unit_interval(self):
        rng = random.Random(5)
        for _ in range(8):
            c = random_connected_circuit(rng)
            prof = alpha_solve(c, rng.choice((0.5, 1.5, 3.0)))
            assert all(0.0 <= v <= 1.0 for v in prof.d.values())

    def test_invalid_exponent_rejected(self):
        with pytest.raises(ValueError):
            alpha_solve(FIG_A1, 0.0)


class TestLinearConductanceOracle:
    @pytest.mark.parametrize("name,kwargs", [
        ("fig_a1", {}), ("fig3", {}), ("fig4", {}), ("ladder", {"sections": 3}),
    ])
    def test_phi_at_one_is_the_linear_conductance(self, name, kwargs):
        c = build_canonical(name, **kwargs)
        assert alpha_solve(c, 1.0).phi == pytest.approx(
            linear_input_conductance(c), rel=1e-10)

    def test_on_random_circuits(self):
        rng = random.Random(42)
        for _ in range(10):
            c = random_connected_circuit(rng)
            assert alpha_solve(c, 1.0).phi == pytest.approx(
                linear_input_conductance(c), rel=1e-9)


def test_direct_port_conductor_keeps_phi_above_one():
    for name in ("fig_a1", "fig3", "fig4"):
        c = build_canonical(name)
        for alpha in (0.5, 1.0, 2.0, 4.0):
            assert alpha_solve(c, alpha).phi > 1.0


class TestDSweep:
    def test_reference_bridge_ratio_grows_toward_half(self):
        sweep = d_sweep(FIG_A1, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        d_o = sweep.d["o"]
        assert d_o[0] == pytest.approx(0.4, abs=1e-9)
        assert all(b > a for a, b in zip(d_o, d_o[1:]))
        assert d_o[-1] < 0.5
        assert sweep.verdicts["o"] == "nondecreasing"

    def test_symmetric_bridge_is_constant(self):
        sweep = d_sweep(FIG4, [1.0, 2.0, 4.0])
        for node, expected in (("c", 2 / 3), ("d", 1 / 3), ("e", 2 / 3), ("f", 1 / 3)):
            assert all(v == pytest.approx(expected, abs=1e-10) for v in sweep.d[node])
            assert sweep.verdicts[node] != "violation"

    def test_series_chain_is_constant(self):
        chain = parse_netlist(".input a b\n.branch a m1\n.branch m1 m2\n.branch m2 b")
        sweep = d_sweep(chain, [0.5, 1.0, 3.0, 6.0])
        assert all(v == pytest.approx(2 / 3, abs=1e-10) for v in sweep.d["m1"])
        assert all(v == pytest.approx(1 / 3, abs=1e-10) for v in sweep.d["m2"])

    def test_grid_must_ascend(self):
        with pytest.raises(ValueError):
            d_sweep(FIG_A1, [2.0, 1.0])
        with pytest.raises(ValueError):
            d_sweep(FIG_A1, [])

    def test_phis_returned_alongside(self):
        sweep = d_sweep(FIG_A1, [1.0, 3.0])
        assert sweep.phis[0] == pytest.approx(1.6, abs=1e-10)
        assert sweep.phis[1] == pytest.approx(phi_closed_form_fig_a1(3.0), abs=1e-9)


class TestHardlimiterLimit:
    def test_reference_bridge_divider_approaches_half(self):
        assert hardlimiter_limit(FIG_A1)["o"] == pytest.approx(0.5, abs=0.01)

    def test_ladder_first_shunt_approaches_thirds(self):
        limit = hardlimiter_limit(build_canonical("ladder", sections=8))
        assert limit["d1"] == pytest.approx(1.0 / 3.0, abs=0.01)
        assert limit["c1"] == pytest.approx(2.0 / 3.0, abs=0.01)

    def test_symmetric_bridge_unchanged(self):
        limit = hardlimiter_limit(FIG4)
        assert limit["c"] == pytest.approx(2.0 / 3.0, abs=1e-6)
        assert limit["d"] == pytest.approx(1.0 / 3.0, abs=1e-6)
