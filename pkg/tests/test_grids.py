import numpy as np
import pytest

from shadowkink.grids import Grid1D, graded, layer_grid


def test_uniform_grid_basics():
    g = Grid1D.uniform(-1.0, 2.0, 7)
    assert g.n == 7
    assert g.nodes[0] == -1.0 and g.nodes[-1] == 2.0
    assert np.allclose(g.spacing, 0.5)


def test_nodes_must_increase():
    with pytest.raises(ValueError):
        Grid1D.from_nodes([0.0, 1.0, 1.0, 2.0])


@pytest.mark.parametrize("eps", [0.02, 0.005])
def test_layer_grid_spacing_caps(eps):
    g = layer_grid(-2.0, 2.0, eps, 1.0, base_cells=400, centers=(0.0,))
    assert g.max_spacing_within(0.0, 4 * eps) <= eps / 8
    w = eps ** (2 / 3)
    for c in (-1.0, 1.0):
        assert g.max_spacing_within(c, 4 * w) <= w / 8


def test_layer_grid_symmetric_nodes():
    g = layer_grid(-2.0, 2.0, 0.01, 1.0, base_cells=400, centers=(0.0,))
    assert np.array_equal(g.nodes, -g.nodes[::-1])
    assert 0.0 in g.nodes


def test_refine_halves_spacing_smoothly():
    g1 = layer_grid(-2.0, 2.0, 0.01, 1.0, base_cells=200)
    g2 = layer_grid(-2.0, 2.0, 0.01, 1.0, base_cells=200, refine=2.0)
    assert g2.n == pytest.approx(2 * g1.n, rel=0.02)
    # spacing at matched locations halves
    mid = np.interp(0.5, g1.nodes, np.arange(g1.n))
    h1 = np.interp(0.5, g1.nodes[:-1], g1.spacing)
    h2 = np.interp(0.5, g2.nodes[:-1], g2.spacing)
    assert h2 == pytest.approx(h1 / 2, rel=0.05)


def test_graded_spacing_varies_smoothly():
    # dh/dx stays bounded and refine-invariant: per-cell spacing changes are
    # O(h) with a fixed slope, which keeps the stencils second order
    g1 = graded(-2.0, 2.0, 0.01, bands=[(0.5, 0.001, 0.05), (-0.5, 0.001, 0.05)])
    g2 = graded(-2.0, 2.0, 0.01, bands=[(0.5, 0.001, 0.05), (-0.5, 0.001, 0.05)], refine=2.0)
    for g in (g1, g2):
        slope = np.abs(np.diff(g.spacing)) / g.spacing[:-1]
        assert np.max(slope) < 0.7
    h1 = np.interp(0.52, g1.nodes[:-1], g1.spacing)
    h2 = np.interp(0.52, g2.nodes[:-1], g2.spacing)
    assert h2 == pytest.approx(h1 / 2, rel=0.1)
