import numpy as np
import pytest
from numpy.testing import assert_allclose

from hfdae import (
    Grid,
    basis_hold,
    basis_inner_products,
    basis_ramp,
    evaluate,
    expand_composite,
    expand_function,
    expand_samples,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0, 1.0)
    with pytest.raises(ValueError):
        Grid(4, 0.0)
    with pytest.raises(ValueError):
        Grid(4, np.inf)
    g = Grid(4, 1.0)
    assert g.h == 0.25
    assert_allclose(g.nodes(), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert g.node(4) == 1.0  # pinned to t_end even when m*h rounds away


def test_grid_nodes_strictly_increasing():
    for m in (1, 7, 10, 33, 300):
        g = Grid(m, 1.0)
        assert np.all(np.diff(g.nodes()) > 0)
        assert g.nodes()[-1] == 1.0


def test_expand_samples_linear():
    g = Grid(2, 0.2)
    s = expand_samples([0.0, 0.1, 0.2], g)
    assert_allclose(s.cs, [0.0, 0.1])
    assert_allclose(s.ds, [0.1, 0.1])
    assert s.tail == 0.2


def test_expand_samples_zero():
    g = Grid(3, 1.0)
    s = expand_samples(np.zeros(4), g)
    assert np.all(s.cs == 0) and np.all(s.ds == 0) and s.tail == 0


def test_expand_samples_squares():
    g = Grid(10, 1.0)
    s = expand_samples([(j * 0.1) ** 2 for j in range(11)], g)
    assert_allclose(s.cs[3], 0.09)
    assert_allclose(s.ds[3], 0.07)


def test_expand_samples_shape_error():
    g = Grid(4, 1.0)
    with pytest.raises(ValueError, match="5 node samples"):
        expand_samples([0.0, 1.0, 2.0], g)


def test_expand_function_constant():
    s = expand_function(lambda t: 1.0, Grid(6, 2.0))
    assert np.all(s.cs == 1.0) and np.all(s.ds == 0.0) and s.tail == 1.0


def test_expand_function_power():
    s = expand_function(lambda t: t**2.5, Grid(10, 1.0))
    assert_allclose(s.cs[4], 0.10119288512538815, rtol=1e-15)


def test_expand_function_sin_tail():
    s = expand_function(np.sin, Grid(10, 1.0))
    assert_allclose(s.tail, 0.8414709848078965, rtol=1e-15)


def test_expand_function_nonfinite_names_node():
    def f(t):
        return np.nan if t > 0.25 else 1.0

    with pytest.raises(ValueError, match="node 2"):
        expand_function(f, Grid(4, 1.0))


def test_expand_composite_identity():
    g = Grid(5, 1.0)
    s = expand_function(lambda t: t**2, g)
    out = expand_composite(lambda t, x: x, [s])
    assert_allclose(out.node_values, s.node_values, rtol=0, atol=0)


def test_expand_composite_product():
    g = Grid(4, 1.0)
    x = expand_function(lambda t: t, g)
    out = expand_composite(lambda t, a, b: a * b, [x, x])
    assert_allclose(out.cs[2], 0.25)


def test_expand_composite_cancellation():
    g = Grid(8, 1.0)
    x = expand_function(lambda t: t, g)
    out = expand_composite(lambda t, a: a**2 - t**2, [x])
    assert np.all(out.node_values == 0.0)


def test_expand_composite_grid_mismatch():
    a = expand_function(lambda t: t, Grid(4, 1.0))
    b = expand_function(lambda t: t, Grid(5, 1.0))
    with pytest.raises(ValueError, match="different grid"):
        expand_composite(lambda t, x, y: x + y, [a, b])


def test_composition_commutes_with_sampling():
    # composite node values equal N applied to node samples, exactly
    g = Grid(9, 1.0)
    rng = np.random.default_rng(7)
    a = expand_samples(rng.standard_normal(10), g)
    b = expand_samples(rng.standard_normal(10), g)
    out = expand_composite(lambda t, x, y: np.sin(x) * y + t, [a, b])
    nodes = g.nodes()
    expected = np.sin(a.node_values) * b.node_values + nodes
    assert np.all(out.node_values == expected)


def test_evaluate_linear_reproduction():
    g = Grid(10, 1.0)
    s = expand_function(lambda t: t, g)
    assert evaluate(s, 0.05) == 0.05
    for t in np.random.default_rng(0).uniform(0, 1, 50):
        assert_allclose(evaluate(s, t), t, rtol=0, atol=1e-15)


def test_evaluate_general_linear_exact():
    g = Grid(13, 2.0)
    for a, b in [(0.0, 1.0), (2.5, -1.75), (-3.0, 0.125)]:
        s = expand_function(lambda t: a + b * t, g)
        ts = np.random.default_rng(1).uniform(0, 2, 40)
        assert_allclose(evaluate(s, ts), a + b * ts, rtol=1e-14, atol=1e-14)


def test_evaluate_node_consistency():
    g = Grid(11, 1.0)
    samples = np.random.default_rng(3).standard_normal(12)
    s = expand_samples(samples, g)
    for j, t in enumerate(g.nodes()):
        assert evaluate(s, t) == samples[j]


def test_evaluate_chord_midpoint():
    s = expand_function(lambda t: t**2, Grid(2, 1.0))
    assert_allclose(evaluate(s, 0.25), 0.125)


def test_evaluate_endpoint_returns_tail():
    s = expand_function(np.cos, Grid(7, 1.0))
    assert evaluate(s, 1.0) == s.tail


def test_evaluate_domain_error():
    s = expand_function(np.cos, Grid(7, 1.0))
    with pytest.raises(ValueError, match="outside"):
        evaluate(s, -0.01)
    with pytest.raises(ValueError, match="outside"):
        evaluate(s, 1.01)


def test_series_immutable():
    s = expand_function(np.sin, Grid(4, 1.0))
    with pytest.raises(ValueError):
        s.cs[0] = 3.0


def test_basis_disjoint_supports():
    g = Grid(5, 1.0)
    ts = np.linspace(0.0, 1.0, 101)
    for i in range(5):
        for j in range(5):
            if i == j:
                continue
            assert np.all(basis_hold(g, i, ts) * basis_hold(g, j, ts) == 0.0)
            assert np.all(basis_ramp(g, i, ts) * basis_ramp(g, j, ts) == 0.0)
            assert np.all(basis_hold(g, i, ts) * basis_ramp(g, j, ts) == 0.0)


def test_inner_products():
    g = Grid(4, 1.0)
    table = basis_inner_products(g)
    h = g.h
    assert_allclose(table.hold_hold[1, 1], h, rtol=1e-14)
    assert table.hold_hold[1, 2] == 0.0
    assert_allclose(table.ramp_ramp[2, 2], 0.08333333333333333, rtol=1e-14)
    # direct integration of the disjoint-support ramps: off-diagonals vanish
    off = table.ramp_ramp - np.diag(np.diag(table.ramp_ramp))
    assert np.all(off == 0.0)
    assert_allclose(np.diag(table.hold_hold), np.full(4, h), rtol=1e-14)
    assert_allclose(np.diag(table.ramp_ramp), np.full(4, h / 3), rtol=1e-14)
    assert_allclose(np.diag(table.hold_ramp), np.full(4, h / 2), rtol=1e-14)
