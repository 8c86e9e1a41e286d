import math

import numpy as np
import pytest

from nearproj import (CrossMeshDiff, FeFunction, FunctionSpec,
                      InvalidArgumentError, MASS, NormSpec, build_space,
                      build_uniform_interval, build_uniform_square, classify_pair,
                      cross_mesh_norm, fe_norm, interpolate_nodal, named_function,
                      perturb_node_nearest, project, seminorm_exact,
                      sobolev_norm_exact_diff, support_measure)
from nearproj.norms import fe_component_norms
from nearproj.space import evaluate

from conftest import random_fe_function


class TestSobolevNormExactDiff:
    def test_projection_of_member_is_zero(self, mesh1d8, rng):
        s = build_space(mesh1d8, 1, dirichlet=True)
        g = random_fe_function(s, rng)
        u = FunctionSpec(value=lambda x: np.array([evaluate(g, p)[0] for p in x]),
                         gradient=lambda x: np.array([evaluate(g, p)[1] for p in x]))
        r = project(s, MASS, u)
        assert sobolev_norm_exact_diff(r, u, NormSpec(0, 2)) <= 1e-11

    def test_norm_of_sin_against_zero(self, mesh1d8, sin1d):
        s = build_space(mesh1d8, 1, dirichlet=True)
        zero = FeFunction(s, np.zeros(s.n_dofs))
        val = sobolev_norm_exact_diff(zero, sin1d, NormSpec(0, 2))
        assert val == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_interpolant_error_matches_simpson_oracle(self, mesh1d8, sin1d):
        s = build_space(mesh1d8, 1, dirichlet=True)
        f = interpolate_nodal(s, sin1d)
        xs = np.linspace(0.0, 1.0, 100001)
        vals = np.array([evaluate(f, (x,))[0] for x in xs])
        diff2 = (vals - np.sin(np.pi * xs)) ** 2
        oracle = math.sqrt(scipy_simpson(diff2, xs))
        assert sobolev_norm_exact_diff(f, sin1d, NormSpec(0, 2)) == \
            pytest.approx(oracle, abs=1e-8)

    def test_missing_gradient_raises(self, mesh1d8):
        s = build_space(mesh1d8, 1, dirichlet=True)
        f = FeFunction(s, np.zeros(s.n_dofs))
        with pytest.raises(InvalidArgumentError):
            sobolev_norm_exact_diff(f, FunctionSpec(value=lambda x: x[:, 0]),
                                    NormSpec(1, 2))

    def test_region_restriction(self, mesh1d8, sin1d):
        s = build_space(mesh1d8, 1, dirichlet=True)
        zero = FeFunction(s, np.zeros(s.n_dofs))
        full = sobolev_norm_exact_diff(zero, sin1d, NormSpec(0, 2))
        left = sobolev_norm_exact_diff(zero, sin1d,
                                       NormSpec(0, 2, region=frozenset(range(4))))
        right = sobolev_norm_exact_diff(zero, sin1d,
                                        NormSpec(0, 2, region=frozenset(range(4, 8))))
        assert math.hypot(left, right) == pytest.approx(full, abs=1e-13)


def scipy_simpson(y, x):
    from scipy.integrate import simpson
    return simpson(y, x=x)


class TestCrossMeshNorm:
    def test_identical_functions_identical_meshes(self, mesh1d8, rng):
        pair = classify_pair(mesh1d8, mesh1d8, 1.0)
        s = build_space(mesh1d8, 1, dirichlet=True)
        f = random_fe_function(s, rng)
        g = FeFunction(build_space(mesh1d8, 1, dirichlet=True), f.coeffs)
        d = CrossMeshDiff(f, g, pair)
        assert cross_mesh_norm(d, NormSpec(0, 2)) <= 1e-15

    def test_1d_hat_closed_form(self, pair1d8):
        # hat at the moved node of the perturbed grid vs zero on the uniform one:
        # integral of hat^2 over intervals of lengths l1, l2 is (l1 + l2)/3
        sb = build_space(pair1d8.mesh_b, 1, dirichlet=True)
        sa = build_space(pair1d8.mesh_a, 1, dirichlet=True)
        coeffs = np.zeros(sb.n_dofs)
        coeffs[2] = 1.0
        l1, l2 = 0.28125 - 0.125, 0.375 - 0.28125
        expect = math.sqrt((l1 + l2) / 3.0)
        d = CrossMeshDiff(FeFunction(sa, np.zeros(sa.n_dofs)),
                          FeFunction(sb, coeffs), pair1d8)
        assert cross_mesh_norm(d, NormSpec(0, 2)) == pytest.approx(expect, abs=1e-13)
        assert expect == pytest.approx(0.28868, abs=5e-6)

    def test_reference_value_level_one(self, pair1d8, sin1d):
        sa = build_space(pair1d8.mesh_a, 1, dirichlet=True)
        sb = build_space(pair1d8.mesh_b, 1, dirichlet=True)
        d = CrossMeshDiff(project(sa, MASS, sin1d), project(sb, MASS, sin1d), pair1d8)
        assert cross_mesh_norm(d, NormSpec(0, 2)) == pytest.approx(3.2150e-03,
                                                                   rel=5e-4)

    def test_same_mesh_reduction(self, mesh2d4, rng):
        pair = classify_pair(mesh2d4, mesh2d4, 2.0)
        s = build_space(mesh2d4, 1, dirichlet=True)
        s2 = build_space(mesh2d4, 1, dirichlet=True)
        f = random_fe_function(s, rng)
        g = random_fe_function(s2, rng)
        for spec in (NormSpec(0, 2), NormSpec(1, 2)):
            cross = cross_mesh_norm(CrossMeshDiff(f, g, pair), spec)
            same = fe_norm(FeFunction(s, f.coeffs - g.coeffs), spec)
            assert cross == pytest.approx(same, abs=1e-13)

    def test_triangle_inequality(self, pair2d4, sin2d, rng):
        sa = build_space(pair2d4.mesh_a, 1, dirichlet=True)
        sb = build_space(pair2d4.mesh_b, 1, dirichlet=True)
        f = random_fe_function(sa, rng)
        g = random_fe_function(sb, rng)
        for spec in (NormSpec(0, 2), NormSpec(1, 2)):
            cross = cross_mesh_norm(CrossMeshDiff(f, g, pair2d4), spec)
            bound = (sobolev_norm_exact_diff(f, sin2d, spec)
                     + sobolev_norm_exact_diff(g, sin2d, spec))
            assert cross <= bound + 1e-10

    def test_gradient_norm_cross_mesh(self, pair2d4, rng):
        # H1 norm dominated by its L2 part plus gradient part; check monotone
        sa = build_space(pair2d4.mesh_a, 1, dirichlet=True)
        sb = build_space(pair2d4.mesh_b, 1, dirichlet=True)
        f = random_fe_function(sa, rng)
        g = random_fe_function(sb, rng)
        d = CrossMeshDiff(f, g, pair2d4)
        l2 = cross_mesh_norm(d, NormSpec(0, 2))
        h1 = cross_mesh_norm(d, NormSpec(1, 2))
        assert h1 >= l2

    def test_eta_must_be_two(self, pair1d8, rng):
        sa = build_space(pair1d8.mesh_a, 1, dirichlet=True)
        sb = build_space(pair1d8.mesh_b, 1, dirichlet=True)
        d = CrossMeshDiff(random_fe_function(sa, rng), random_fe_function(sb, rng),
                          pair1d8)
        with pytest.raises(InvalidArgumentError):
            cross_mesh_norm(d, NormSpec(0, 4))

    def test_degree_mismatch_raises(self, pair1d8):
        sa = build_space(pair1d8.mesh_a, 1, dirichlet=True)
        sb = build_space(pair1d8.mesh_b, 2, dirichlet=True)
        with pytest.raises(InvalidArgumentError):
            CrossMeshDiff(FeFunction(sa, np.zeros(sa.n_dofs)),
                          FeFunction(sb, np.zeros(sb.n_dofs)), pair1d8)

    def test_region_filter_full_set_matches(self, pair2d4, rng):
        sa = build_space(pair2d4.mesh_a, 1, dirichlet=True)
        sb = build_space(pair2d4.mesh_b, 1, dirichlet=True)
        d = CrossMeshDiff(random_fe_function(sa, rng), random_fe_function(sb, rng),
                          pair2d4)
        everything = frozenset(range(pair2d4.mesh_a.n_elements))
        full = cross_mesh_norm(d, NormSpec(0, 2))
        restricted = cross_mesh_norm(d, NormSpec(0, 2, region=everything))
        assert restricted == pytest.approx(full, abs=1e-14)

    @pytest.mark.parametrize("n", [4, 8])
    def test_clipping_conservation_runs(self, n, sin2d):
        # every cross_mesh_norm call verifies fragment-area conservation at 1e-10
        from nearproj import perturb_boundary_band
        m = build_uniform_square(n)
        moved = perturb_boundary_band(m, m.h / np.sqrt(2), (m.h / 4, 0.0))
        pair = classify_pair(m, moved, 1.0)
        sa = build_space(m, 1, dirichlet=True)
        sb = build_space(moved, 1, dirichlet=True)
        d = CrossMeshDiff(project(sa, MASS, sin2d), project(sb, MASS, sin2d), pair)
        assert cross_mesh_norm(d, NormSpec(0, 2)) > 0


class TestSeminormExact:
    def test_sin_analytic(self, sin1d):
        assert seminorm_exact(sin1d, 2, math.inf) == pytest.approx(np.pi ** 2)
        assert seminorm_exact(sin1d, 2, 2) == pytest.approx(np.pi ** 2 / np.sqrt(2))

    def test_power_function_sup_gradient(self):
        # dense-sampling oracle: sup |(2-1/p) x^(1-1/p) - 1| on [0,1] is 1, at x=0
        u = named_function("power_p4")
        xs = np.linspace(0.0, 1.0, 2000001)[:, None]
        oracle = np.abs(u.gradient(xs)[:, 0]).max()
        assert oracle == pytest.approx(1.0, abs=1e-6)
        assert seminorm_exact(u, 1, math.inf) == pytest.approx(oracle, abs=1e-6)

    def test_unavailable_raises(self, sin1d):
        with pytest.raises(InvalidArgumentError):
            seminorm_exact(sin1d, 3, 2)

    def test_approximation_flagged_path(self, sin1d):
        val = seminorm_exact(sin1d, 1, math.inf, approximate_ok=True)
        assert val == pytest.approx(np.pi, rel=1e-6)


class TestSupportMeasure:
    def test_single_hat(self, mesh1d8):
        s = build_space(mesh1d8, 1, dirichlet=True)
        coeffs = np.zeros(s.n_dofs)
        coeffs[4] = 1.0
        assert support_measure(FeFunction(s, coeffs)) == pytest.approx(0.25,
                                                                       abs=1e-14)

    def test_zero_function(self, mesh1d8):
        s = build_space(mesh1d8, 1, dirichlet=True)
        assert support_measure(FeFunction(s, np.zeros(s.n_dofs))) == 0.0

    def test_projector_difference_support(self, pair1d8, rng):
        # supp(pi_h f - f) lies inside the union of supports of the dropped
        # shape functions (the halo of the differing elements)
        from nearproj import intersection_project
        from nearproj.space import shared_dof_mask
        s = build_space(pair1d8.mesh_a, 1, dirichlet=True)
        other = build_space(pair1d8.mesh_b, 1, dirichlet=True)
        keep = shared_dof_mask(pair1d8, s, other)
        halo_elements = {e for dof in np.where(~keep)[0]
                         for e in s.dof_elements[dof]}
        halo_measure = pair1d8.mesh_a.element_measures[sorted(halo_elements)].sum()
        for _ in range(20):
            f = random_fe_function(s, rng)
            g = intersection_project(pair1d8, f, other_space=other)
            d = FeFunction(s, f.coeffs - g.coeffs)
            assert support_measure(d) <= halo_measure + 1e-14


class TestHolderSupportInequality:
    @pytest.mark.parametrize("eta", [4.0, math.inf])
    @pytest.mark.parametrize("k", [0, 1])
    def test_random_fe_functions(self, eta, k, rng):
        # ||f||_{k,2} <= |supp f|^(1/2 - 1/eta) ||f||_{k,eta} with norms taken
        # as sums of per-derivative component norms; 1.01 slack covers the
        # sampled supremum at eta = inf
        meshes = [build_uniform_interval(13), build_uniform_square(5)]
        count = 0
        while count < 50:
            mesh = meshes[count % 2]
            degree = 1 + (count % 4 < 2)
            s = build_space(mesh, degree, dirichlet=False)
            f = random_fe_function(s, rng, sparsity=0.3)
            supp = support_measure(f)
            if supp == 0.0:
                continue
            count += 1
            lhs = sum(fe_component_norms(f, k, 2.0))
            rhs = supp ** (0.5 - (0.0 if math.isinf(eta) else 1.0 / eta)) \
                * sum(fe_component_norms(f, k, eta))
            assert lhs <= 1.01 * rhs
