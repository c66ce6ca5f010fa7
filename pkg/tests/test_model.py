import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rotenberg as rt
from rotenberg.errors import ValidationError

from conftest import make_model
from oracles import boundary_apply_quad, int_mes_sides_quad


class TestModelParams:
    def test_valid(self):
        p = rt.ModelParams(0.0, 1.0, 0.5, 0.5)
        assert p.reproduction_total == 1.0

    @pytest.mark.parametrize("a,b,p,q", [
        (-0.1, 1.0, 1.0, 0.0),   # a < 0
        (1.0, 1.0, 1.0, 0.0),    # a == b
        (2.0, 1.0, 1.0, 0.0),    # a > b
        (0.0, 1.0, -0.2, 0.5),   # p < 0
        (0.0, 1.0, 0.0, 0.0),    # p + q == 0
    ])
    def test_invalid(self, a, b, p, q):
        with pytest.raises(ValidationError):
            rt.ModelParams(a, b, p, q)


class TestVelocitySpace:
    def test_midpoint_weights_sum_to_interval(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        s = rt.VelocitySpace.midpoint(params, 37)
        assert s.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert s.nodes[0] > 1.0 and s.nodes[-1] < 2.0

    def test_nodes_stay_interior_when_a_is_zero(self):
        params = rt.ModelParams(0.0, 1.0, 1.0, 0.0)
        s = rt.VelocitySpace.midpoint(params, 50)
        assert s.nodes[0] == pytest.approx(0.01)
        assert np.all(s.nodes > 0)

    def test_discrete_exact_sums(self):
        params = rt.ModelParams(1.0, 2.0, 0.5, 0.5)
        s = rt.VelocitySpace.discrete(params, [1.25, 1.5, 1.75], [0.2, 0.5, 0.3])
        assert s.integrate(np.array([1.0, 1.0, 1.0])) == 1.0

    def test_rejects_nodes_outside_interval(self):
        params = rt.ModelParams(1.0, 2.0, 0.5, 0.5)
        with pytest.raises(ValidationError):
            rt.VelocitySpace.discrete(params, [1.0, 1.5], [0.5, 0.5])

    def test_refined_doubles_resolution(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        s = rt.VelocitySpace.midpoint(params, 10).refined(2)
        assert s.n == 20


class TestKernelValidation:
    def test_constant_kernel_exact_under_midpoint(self, model_const_12):
        rep = rt.validate_kernel(model_const_12.kernel, model_const_12.space, 1e-10)
        assert rep.passed and rep.max_row_deviation < 1e-12

    def test_three_quarters_row_deviation_shrinks(self):
        params = rt.ModelParams(0.0, 1.0, 1.0, 0.0)
        kern = rt.builtin_kernel("three-quarters", params)
        devs = []
        for n in (100, 400, 1600):
            space = rt.VelocitySpace.midpoint(params, n)
            devs.append(rt.validate_kernel(kern, space, 1.0).max_row_deviation)
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 0.02

    def test_tabulated_scaled_row_fails(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 40)
        mat = np.ones((40, 40))
        mat[7] *= 1.1
        kern = rt.Kernel("bad", matrix=mat, nodes=space.nodes)
        rep = rt.validate_kernel(kern, space, 1e-3)
        assert not rep.passed
        assert rep.max_row_deviation == pytest.approx(0.1, rel=1e-9)
        assert rep.worst_row_velocity == pytest.approx(space.nodes[7])

    def test_negative_value_reported_with_location(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 10)
        mat = np.ones((10, 10))
        mat[3, 4] = -0.5
        rep = rt.validate_kernel(rt.Kernel("neg", matrix=mat, nodes=space.nodes), space, 1e-3)
        assert not rep.passed
        assert rep.negative_location == (pytest.approx(space.nodes[3]),
                                         pytest.approx(space.nodes[4]))

    def test_tabulated_renormalizes_small_deviation(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 30)
        mat = np.ones((30, 30)) * (1.0 + 5e-4)
        kern = rt.tabulated_kernel(mat, space.nodes, space)
        rows = kern.matrix_on(space) @ space.weights
        np.testing.assert_allclose(rows, 1.0, atol=1e-14)

    def test_tabulated_rejects_large_deviation(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 30)
        with pytest.raises(ValidationError, match="renormalization tolerance"):
            rt.tabulated_kernel(np.ones((30, 30)) * 1.1, space.nodes, space)

    def test_daughters_faster_is_exact_in_the_continuum(self):
        # rows integrate to 1 analytically; the discrete deficit shrinks slowly
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        kern = rt.builtin_kernel("daughters-faster", params)
        from scipy.integrate import quad
        fn = kern._func
        for w in (1.2, 1.7, 1.95):
            val = quad(lambda v: float(fn(np.asarray(w), np.asarray(v))), w, 2.0)[0]
            assert val == pytest.approx(1.0, abs=1e-10)


class TestL1Norm:
    def test_unit_box(self):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 50)
        f = rt.uniform_density(space, 80, normalize=False)
        assert f.l1_norm() == pytest.approx(1.0, abs=1e-13)

    def test_zero(self, space_12):
        f = rt.DensityField(np.zeros((40, space_12.n)), space_12)
        assert f.l1_norm() == 0.0

    def test_linear_in_x(self, space_12):
        f = rt.linear_x_density(space_12, 200, normalize=False)
        assert f.l1_norm() == pytest.approx(0.5, abs=1e-6)

    @given(st.floats(-3.0, 3.0, allow_nan=False))
    @settings(max_examples=20, deadline=None)
    def test_absolute_homogeneity(self, alpha):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 20)
        rng = np.random.default_rng(3)
        f = rt.DensityField(rng.uniform(0, 1, (30, 20)), space)
        assert (alpha * f).l1_norm() == pytest.approx(abs(alpha) * f.l1_norm(), rel=1e-12)

    def test_triangle_inequality(self, rng):
        params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
        space = rt.VelocitySpace.midpoint(params, 25)
        f = rt.DensityField(rng.normal(size=(40, 25)), space)
        g = rt.DensityField(rng.normal(size=(40, 25)), space)
        assert (f + g).l1_norm() <= f.l1_norm() + g.l1_norm() + 1e-12


class TestBoundaryMeasure:
    def test_dirac_branch_only(self, rng):
        model = make_model(1.0, 2.0, 0.0, 1.0)
        bm = model.boundary_measure()
        g = rng.uniform(0.5, 2.0, size=model.space.n)
        v = model.space.nodes[17]
        assert rt.apply_boundary_measure(bm, v, g) == pytest.approx(g[17], rel=1e-14)

    def test_constant_kernel_g_one(self):
        # p=1, q=0 on (1,2): integral of w dw / (b-a) = 1.5, scaled by 1/v
        model = make_model(1.0, 2.0, 1.0, 0.0)
        bm = model.boundary_measure()
        for idx in (0, 33, 99):
            v = model.space.nodes[idx]
            got = rt.apply_boundary_measure(bm, v, lambda w: np.ones_like(w))
            assert got == pytest.approx(1.5 / v, rel=1e-13)

    def test_matches_adaptive_quadrature(self, rng):
        model = make_model(1.0, 2.0, 0.7, 0.3, n_v=400)
        bm = model.boundary_measure()
        kern_fn = lambda w, v: np.asarray(1.0) + 0 * np.asarray(w)
        g = lambda w: np.sin(3 * w) + 2.0
        v = model.space.nodes[250]
        want = boundary_apply_quad(model.params, kern_fn, v, g)
        got = rt.apply_boundary_measure(bm, v, g)
        assert got == pytest.approx(want, rel=1e-5)

    def test_g_equiv_one_identity(self):
        # applying to g == 1 gives p v^{-1} int w k(w,v) dw + q
        model = make_model(1.0, 2.0, 0.4, 0.3)
        bm = model.boundary_measure()
        v = model.space.nodes[50]
        got = rt.apply_boundary_measure(bm, v, np.ones(model.space.n))
        assert got == pytest.approx(0.4 * 1.5 / v + 0.3, rel=1e-12)

    def test_rejects_non_node(self):
        model = make_model(1.0, 2.0, 1.0, 0.0)
        with pytest.raises(ValidationError):
            rt.apply_boundary_measure(model.boundary_measure(), 1.23456, np.ones(100))

    def test_linearity_and_monotonicity(self, rng):
        model = make_model(1.0, 2.0, 0.6, 0.4)
        bm = model.boundary_measure()
        g1 = rng.uniform(0.0, 1.0, model.space.n)
        g2 = g1 + rng.uniform(0.0, 1.0, model.space.n)
        v = model.space.nodes[42]
        a1 = rt.apply_boundary_measure(bm, v, g1)
        a2 = rt.apply_boundary_measure(bm, v, g2)
        assert a1 <= a2 + 1e-14
        lin = rt.apply_boundary_measure(bm, v, 2.0 * g1 + g2)
        assert lin == pytest.approx(2.0 * a1 + a2, rel=1e-12)


class TestIntMesIdentity:
    @pytest.mark.parametrize("p,q", [(0.5, 0.5), (1.0, 0.0), (0.25, 0.25), (1.5, 0.3)])
    @pytest.mark.parametrize("g", [lambda w: np.ones_like(w),
                                   lambda w: w,
                                   lambda w: w**2])
    def test_constant_kernel_exact(self, p, q, g):
        model = make_model(1.0, 2.0, p, q, n_v=200)
        out = rt.int_mes_identity(model.boundary_measure(), g)
        assert out["deviation"] <= 1e-6

    def test_zero_function(self):
        model = make_model(1.0, 2.0, 0.5, 0.5)
        out = rt.int_mes_identity(model.boundary_measure(), lambda w: 0.0 * w)
        assert out["lhs"] == 0.0 and out["rhs"] == 0.0

    def test_three_quarters_kernel_quadrature_rate(self):
        # singular kernel: deviation shrinks with refinement
        devs = []
        for n in (100, 200, 400):
            model = make_model(0.0, 1.0, 1.0, 0.0, kernel="three-quarters", n_v=n)
            devs.append(rt.int_mes_identity(model.boundary_measure(), lambda w: w)["deviation"])
        assert devs[0] > devs[1] > devs[2]

    def test_matches_adaptive_quadrature(self):
        model = make_model(1.0, 2.0, 0.8, 0.1, n_v=300)
        g = lambda w: np.cos(w)
        out = rt.int_mes_identity(model.boundary_measure(), g)
        kern_fn = lambda w, v: 1.0
        lhs, rhs = int_mes_sides_quad(model.params, kern_fn, g)
        assert out["lhs"] == pytest.approx(lhs, rel=1e-5)
        assert out["rhs"] == pytest.approx(rhs, rel=1e-5)

    def test_deviation_drops_at_quadrature_order(self):
        # halving the mesh must cut the deviation by at least ~2x once the
        # kernel row integrals are inexact (tabulated slightly-off kernel)
        devs = []
        for n in (50, 100, 200):
            params = rt.ModelParams(1.0, 2.0, 1.0, 0.0)
            space = rt.VelocitySpace.midpoint(params, n)
            v = space.nodes[None, :]
            # analytic row integral is exactly 1; midpoint sees the curvature
            mat = np.repeat(1.0 + 0.3 * ((v - 1.5) ** 2 - 1.0 / 12.0), n, axis=0)
            kern = rt.Kernel("curved", matrix=mat, nodes=space.nodes)
            model = rt.Model(params, space, kern)
            devs.append(rt.int_mes_identity(model.boundary_measure(), lambda w: w**3)["deviation"])
        assert devs[0] / devs[1] > 2.0 and devs[1] / devs[2] > 2.0
