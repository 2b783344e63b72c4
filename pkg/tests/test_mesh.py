import pytest

from alphaport import (
    Branch,
    Characteristic,
    Circuit,
    Mesh,
    build_canonical,
    mesh_solve,
    phi_b6_closed_form,
    phi_closed_form_fig_a1,
    phi_meshes_from_nodes,
)

FIG_B1 = build_canonical("fig_b1")


def power_law(alpha, d=1.0):
    return Characteristic(((d, alpha),))


class TestFigB1:
    def test_linear_case_exact(self):
        sol = mesh_solve(FIG_B1, power_law(1.0), 1.0)
        assert sol.phi_meshes == pytest.approx(0.625, abs=1e-12)
        assert sol.mesh_currents["m1"] == pytest.approx(3.0 / 8.0, abs=1e-12)
        assert sol.mesh_currents["m2"] == pytest.approx(1.0 / 8.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
    def test_matches_closed_form(self, alpha):
        sol = mesh_solve(FIG_B1, power_law(alpha), 1.0)
        assert sol.phi_meshes == pytest.approx(phi_b6_closed_form(alpha), rel=1e-9)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
    def test_loop_equations_hold(self, alpha):
        f = power_law(alpha)
        sol = mesh_solve(FIG_B1, f, 1.0)
        i1, i2 = sol.mesh_currents["m1"], sol.mesh_currents["m2"]
        r1 = -f(1.0 - i1) + f(i1) + f(i1 - i2)
        r2 = -f(i1 - i2) + 2.0 * f(i2)
        scale = max(f(1.0 - i1), f(i1), f(i2))
        assert abs(r1) <= 1e-10 * scale
        assert abs(r2) <= 1e-10 * scale

    def test_far_mesh_current_ratio(self):
        # eliminating the far mesh gives i1 - i2 = 2**(1/a) * i2
        for alpha in (0.5, 2.0, 3.0):
            sol = mesh_solve(FIG_B1, power_law(alpha), 1.0)
            i1, i2 = sol.mesh_currents["m1"], sol.mesh_currents["m2"]
            assert i1 - i2 == pytest.approx(2.0 ** (1.0 / alpha) * i2, rel=1e-9)

    def test_drive_scaling(self):
        sol = mesh_solve(FIG_B1, power_law(2.0), 3.0)
        assert sol.input_voltage == pytest.approx(
            phi_b6_closed_form(2.0) * 3.0**2, rel=1e-9)

    def test_current_hardlimiter_regime(self):
        sol = mesh_solve(FIG_B1, power_law(64.0), 1.0)
        assert sol.phi_meshes == pytest.approx(phi_b6_closed_form(64.0), rel=1e-9)
        # elements clamp currents: the input splits evenly at the first loop
        assert sol.mesh_currents["m1"] == pytest.approx(0.5, abs=0.01)


class TestDuality:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
    def test_mesh_phi_is_converted_nodal_phi(self, alpha):
        converted = phi_meshes_from_nodes(phi_closed_form_fig_a1, alpha)
        assert mesh_solve(FIG_B1, power_law(alpha), 1.0).phi_meshes == pytest.approx(
            converted, rel=1e-9)
        assert phi_b6_closed_form(alpha) == pytest.approx(converted, rel=1e-12)

    def test_linear_reciprocal(self):
        assert phi_meshes_from_nodes(phi_closed_form_fig_a1, 1.0) == pytest.approx(
            1.0 / 1.6, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
    def test_conversion_round_trips(self, alpha):
        def mesh_phi(a):
            return phi_meshes_from_nodes(phi_closed_form_fig_a1, a)

        # applying the conversion rule twice restores the nodal coefficient
        back = phi_meshes_from_nodes(mesh_phi, alpha)
        assert back == pytest.approx(phi_closed_form_fig_a1(alpha), rel=1e-9)

    def test_direct_port_element_keeps_mesh_phi_below_one(self):
        for alpha in (0.5, 1.0, 2.0, 3.0, 8.0):
            assert mesh_solve(FIG_B1, power_law(alpha), 1.0).phi_meshes < 1.0


class TestBasisHandling:
    def test_multiplicity_splits_loop_current(self):
        c = Circuit((Branch("a", "b", 2),), ("a", "b"),
                    meshes=(Mesh("source", (1,)),))
        sol = mesh_solve(c, power_law(2.0), 1.0)
        assert sol.input_voltage == pytest.approx((1.0 / 2.0) ** 2, rel=1e-12)

    def test_multi_term_law_has_no_phi(self):
        sol = mesh_solve(FIG_B1, Characteristic(((1.0, 1.0), (1.0, 2.0))), 1.0)
        assert sol.phi_meshes is None
        assert sol.input_voltage > 0.0

    def test_missing_basis_rejected(self):
        with pytest.raises(ValueError, match="no mesh basis"):
            mesh_solve(build_canonical("fig_a1"), power_law(1.0), 1.0)

    def test_missing_source_loop_rejected(self):
        c = Circuit((Branch("a", "b"),), ("a", "b"), meshes=(Mesh("m1", (1,)),))
        with pytest.raises(ValueError, match="source"):
            mesh_solve(c, power_law(1.0), 1.0)

    def test_overfull_branch_membership_rejected(self):
        basis = (Mesh("source", (1,)), Mesh("m1", (1, 2)), Mesh("m2", (1, 3)))
        with pytest.raises(ValueError, match="more than two"):
            mesh_solve(FIG_B1, power_law(1.0), 1.0, basis=basis)

    def test_index_out_of_range_rejected(self):
        basis = (Mesh("source", (9,)),)
        with pytest.raises(ValueError, match="references branch 9"):
            mesh_solve(FIG_B1, power_law(1.0), 1.0, basis=basis)

    def test_nonpositive_drive_rejected(self):
        with pytest.raises(ValueError):
            mesh_solve(FIG_B1, power_law(1.0), 0.0)
