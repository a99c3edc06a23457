import mpmath
import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from hfdae import (
    Grid,
    UpperToeplitz,
    build_op_matrices,
    expand_function,
    frac_integrate,
    gamma_fn,
    rl_integral_power,
    toeplitz_apply,
)


class TestGamma:
    def test_known_values(self):
        assert gamma_fn(1.0) == 1.0
        assert_allclose(gamma_fn(0.5), 1.7724538509055159, rtol=1e-15)
        assert_allclose(gamma_fn(3.5), 3.3233509704478426, rtol=1e-15)

    def test_domain(self):
        for bad in (0.0, -1.0, -0.5, np.nan):
            with pytest.raises(ValueError):
                gamma_fn(bad)

    def test_accuracy_against_mpmath(self):
        xs = np.geomspace(1e-3, 30.0, 200)
        for x in xs:
            ref = float(mpmath.gamma(x))
            assert abs(gamma_fn(x) - ref) <= 1e-12 * abs(ref)


class TestToeplitz:
    def test_unit_impulse_reproduces_row(self):
        mat = UpperToeplitz([2.0, 3.0, 5.0])
        assert_allclose(toeplitz_apply([1.0, 0.0, 0.0], mat), [2.0, 3.0, 5.0])

    def test_hand_convolution(self):
        assert_allclose(toeplitz_apply([1.0, 1.0], UpperToeplitz([0.0, 1.0])), [0.0, 1.0])

    def test_zero_coeffs(self):
        mat = UpperToeplitz(np.arange(5.0))
        assert np.all(toeplitz_apply(np.zeros(5), mat) == 0.0)

    def test_shape_error(self):
        with pytest.raises(ValueError, match="does not match"):
            toeplitz_apply([1.0, 2.0], UpperToeplitz([1.0, 2.0, 3.0]))

    def test_matches_dense_product(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 7, 40):
            row = rng.standard_normal(n)
            coeffs = rng.standard_normal(n)
            dense = scipy.linalg.toeplitz(np.r_[row[0], np.zeros(n - 1)], row)
            assert_allclose(
                toeplitz_apply(coeffs, UpperToeplitz(row)), coeffs @ dense, rtol=1e-13, atol=1e-13
            )

    def test_fft_path_agrees_with_direct(self):
        rng = np.random.default_rng(5)
        for n in (1, 3, 64, 300):
            row = rng.standard_normal(n)
            coeffs = rng.standard_normal(n)
            mat = UpperToeplitz(row)
            direct = toeplitz_apply(coeffs, mat, method="direct")
            fast = toeplitz_apply(coeffs, mat, method="fft")
            scale = np.max(np.abs(direct)) + 1.0
            assert np.max(np.abs(direct - fast)) <= 1e-12 * scale

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="method"):
            toeplitz_apply([1.0], UpperToeplitz([1.0]), method="magic")


class TestOpMatrices:
    def test_order_one_reduction(self):
        # at order 1 the four matrices collapse to the classical running sums
        for m in (1, 4, 16, 64):
            g = Grid(m, 1.0)
            h = g.h
            mats = build_op_matrices(1.0, g)
            assert_allclose(mats.p_ss.row, h * np.r_[0.0, np.ones(m - 1)], rtol=0, atol=1e-13)
            assert_allclose(mats.p_st.row, h * np.r_[1.0, np.zeros(m - 1)], rtol=0, atol=1e-13)
            assert_allclose(mats.p_ts.row, 0.5 * h * np.r_[0.0, np.ones(m - 1)], rtol=0, atol=1e-13)
            assert_allclose(mats.p_tt.row, 0.5 * h * np.r_[1.0, np.zeros(m - 1)], rtol=0, atol=1e-13)

    def test_half_order_first_entries(self):
        g = Grid(8, 8.0)  # h = 1 so the scale factors drop out
        mats = build_op_matrices(0.5, g)
        a1 = 1.0 / gamma_fn(1.5)
        a2 = 1.0 / gamma_fn(2.5)
        assert mats.p_ss.row[0] == 0.0
        assert_allclose(mats.p_ss.row[1] / a1, 1.0, rtol=1e-14)
        assert_allclose(mats.p_st.row[0], a1, rtol=1e-14)
        assert_allclose(mats.p_st.row[1] / a1, -0.5857864376269049, rtol=1e-13)
        assert mats.p_ts.row[0] == 0.0
        assert_allclose(mats.p_ts.row[1] / a2, 1.0, rtol=1e-14)
        assert_allclose(mats.p_tt.row[0], a2, rtol=1e-14)
        assert_allclose(mats.p_tt.row[1] / a2, 0.3284271247461903, rtol=1e-13)

    def test_rows_match_stated_formulas(self):
        rng = np.random.default_rng(2)
        for alpha in rng.uniform(0.05, 1.0, 6):
            g = Grid(37, 2.0)
            h = g.h
            m = g.m
            mats = build_op_matrices(alpha, g)
            a1 = h**alpha / gamma_fn(alpha + 1)
            a2 = h**alpha / gamma_fn(alpha + 2)
            k = np.arange(1, m, dtype=float)
            assert_allclose(mats.p_ss.row[1:], a1 * (k**alpha - (k - 1) ** alpha), rtol=1e-13)
            assert_allclose(
                mats.p_st.row[1:],
                a1 * ((k + 1) ** alpha - 2 * k**alpha + (k - 1) ** alpha),
                rtol=1e-12,
                atol=1e-15 * a1,
            )
            assert_allclose(
                mats.p_ts.row[1:],
                a2 * (k ** (alpha + 1) - (k - 1) ** alpha * (k + alpha)),
                rtol=1e-13,
            )
            assert_allclose(
                mats.p_tt.row[1:],
                a2
                * (
                    (k + 1) ** (alpha + 1)
                    - (k + 1 + alpha) * k**alpha
                    - k ** (alpha + 1)
                    + (k + alpha) * (k - 1) ** alpha
                ),
                rtol=1e-12,
                atol=1e-14 * a2,
            )

    def test_order_domain(self):
        g = Grid(4, 1.0)
        for bad in (0.0, -0.5, 1.0001, np.nan):
            with pytest.raises(ValueError):
                build_op_matrices(bad, g)

    def test_hold_increments_positive_decreasing(self):
        for alpha in (0.1, 0.25, 0.5, 0.75, 0.99, 1.0):
            mats = build_op_matrices(alpha, Grid(200, 1.0))
            incr = mats.p_ss.row[1:]
            assert np.all(incr > 0.0)
            assert np.all(np.diff(incr) <= 0.0)
            if alpha < 1.0:
                assert np.all(np.diff(incr) < 0.0)

    def test_cache_returns_identical_object(self):
        g = Grid(12, 1.0)
        assert build_op_matrices(0.5, g) is build_op_matrices(0.5, Grid(12, 1.0))


class TestFracIntegrate:
    def test_zero(self):
        out = frac_integrate(expand_function(lambda t: 0.0, Grid(6, 1.0)), 0.7)
        assert np.all(out.node_values == 0.0)

    def test_constant_node_exact(self):
        g = Grid(4, 1.0)
        out = frac_integrate(expand_function(lambda t: 1.0, g), 0.5)
        assert_allclose(out.node_values[1], 0.5641895835477563, rtol=1e-14)
        expected = [rl_integral_power(0.0, 0.5, t) for t in g.nodes()]
        assert_allclose(out.node_values, expected, rtol=1e-13, atol=1e-15)

    def test_linear_tail(self):
        out = frac_integrate(expand_function(lambda t: t, Grid(10, 1.0)), 0.5)
        assert_allclose(out.tail, 0.752252778063675, rtol=1e-13)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
    @pytest.mark.parametrize("m", [4, 16, 64])
    def test_node_exact_for_affine(self, alpha, m):
        g = Grid(m, 1.0)
        a, b = 0.8, -1.3
        out = frac_integrate(expand_function(lambda t: a + b * t, g), alpha)
        nodes = g.nodes()
        expected = a * np.array([rl_integral_power(0, alpha, t) for t in nodes]) + b * np.array(
            [rl_integral_power(1, alpha, t) for t in nodes]
        )
        assert np.max(np.abs(out.node_values - expected)) <= 1e-10

    def test_output_ramp_matches_toeplitz_products(self):
        g = Grid(9, 1.0)
        s = expand_function(np.exp, g)
        alpha = 0.6
        out = frac_integrate(s, alpha)
        mats = build_op_matrices(alpha, g)
        ramp = toeplitz_apply(s.cs, mats.p_st) + toeplitz_apply(s.ds, mats.p_tt)
        assert_allclose(out.ds, ramp, rtol=1e-12, atol=1e-15)

    def test_quadratic_refinement_ratio(self):
        # second-order node accuracy: doubling m divides the error by ~4
        alpha = 0.5
        errs = []
        for m in (8, 16, 32, 64):
            g = Grid(m, 1.0)
            out = frac_integrate(expand_function(lambda t: t**2, g), alpha)
            exact = np.array([rl_integral_power(2, alpha, t) for t in g.nodes()])
            errs.append(np.max(np.abs(out.node_values - exact)))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(ratios >= 3.6) and np.all(ratios <= 4.4)

    def test_approximate_semigroup(self):
        # J^b(J^a f) vs J^(a+b) f at the nodes, second-order in h
        a, b = 0.3, 0.4
        diffs = []
        for m in (16, 32, 64):
            g = Grid(m, 1.0)
            s = expand_function(np.exp, g)
            two_step = frac_integrate(frac_integrate(s, a), b)
            one_step = frac_integrate(s, a + b)
            diffs.append(np.max(np.abs(two_step.node_values - one_step.node_values)))
        ratios = np.array(diffs[:-1]) / np.array(diffs[1:])
        assert np.all(ratios >= 3.0) and np.all(ratios <= 5.0)
        assert diffs[-1] < 1e-4
