"""Solver tests.  The minimizer is cross-checked against an explicit
gradient-flow relaxation of the same discrete energy: forward-Euler steps of
v_t = eps^2 v'' + mu v - v^3 + eps a f on an independent uniform grid, started
from a generic profile, which knows nothing about the Newton path."""

import numpy as np
import pytest

import shadowkink as sk
from shadowkink.errors import NonconvergenceError, PreconditionError, TopologyError
from shadowkink.grids import Grid1D
from shadowkink.kink import _seed_values
from shadowkink.util import sign_changes

from conftest import A_HALF


def gradient_flow_zero(spec, eps, a, L=2.0, rtol=1e-6):
    h = eps / 8
    n = int(round(2 * L / h)) + 1
    x = np.linspace(-L, L, n)
    mux, fx = spec.mu(x), spec.f(x)
    v = np.sign(x + 0.8) * np.sqrt(np.maximum(mux, 0.0))
    v[0] = v[-1] = 0.0
    tau = 0.9 * min(h**2 / (2 * eps**2), 0.4)
    r = np.zeros(n)
    for k in range(500_000):
        r[1:-1] = (
            eps**2 * (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
            + mux[1:-1] * v[1:-1]
            - v[1:-1] ** 3
            + eps * a * fx[1:-1]
        )
        if k % 1000 == 0 and np.max(np.abs(r)) < rtol:
            break
        v[1:-1] += tau * r[1:-1]
    sgn = np.where(np.abs(v) > 1e-12, np.sign(v), 0.0)
    nz = np.nonzero(sgn)[0]
    flips = np.nonzero(np.diff(sgn[nz]) != 0)[0]
    assert len(flips) == 1
    i, j = nz[flips[0]], nz[flips[0] + 1]
    return x[i] - v[i] * (x[j] - x[i]) / (v[j] - v[i]), h


# --- energy -----------------------------------------------------------------

def test_energy_of_zero_profile(spec_i):
    g = Grid1D.uniform(-2.0, 2.0, 401)
    assert sk.energy(np.zeros(401), g, spec_i, 0.01, 0.5) == 0.0


def test_energy_of_bulk_profile_is_negative(spec_i):
    g = Grid1D.uniform(-2.0, 2.0, 2001)
    v = np.sqrt(np.clip(spec_i.mu(g.nodes), 0.0, None))
    assert sk.energy(v, g, spec_i, 0.01, 0.1) < 0.0


def test_energy_reflection_symmetry(spec_i, ladder_i):
    sol = ladder_i["solutions"][0.01]
    reflected = -sol.values[::-1]
    e1 = sk.energy(sol.values, sol.grid, spec_i, sol.epsilon, sol.a)
    e2 = sk.energy(reflected, sol.grid, spec_i, sol.epsilon, sol.a)
    assert abs(e1 - e2) <= 1e-12


def test_energy_rejects_nonfinite(spec_i):
    g = Grid1D.uniform(-2.0, 2.0, 11)
    v = np.zeros(11)
    v[3] = np.nan
    with pytest.raises(PreconditionError):
        sk.energy(v, g, spec_i, 0.01, 0.5)


# --- the minimizer ----------------------------------------------------------

def test_minimizer_matches_gradient_flow(spec_i):
    sol = sk.solve_minimizer(spec_i, 0.02, A_HALF)
    rho_flow, h_flow = gradient_flow_zero(spec_i, 0.02, A_HALF)
    cell = max(h_flow, sol.grid.max_spacing_within(sol.rho, 2 * h_flow))
    assert abs(sol.rho - rho_flow) <= cell


def test_locate_zero_matches_gradient_flow_finer(spec_i, ladder_i):
    sol = ladder_i["solutions"][0.01]
    rho_flow, h_flow = gradient_flow_zero(spec_i, 0.01, A_HALF)
    cell = max(h_flow, sol.grid.max_spacing_within(sol.rho, 2 * h_flow))
    assert abs(sk.locate_zero(sol) - rho_flow) <= cell


def test_minimizer_postconditions(ladder_i):
    for eps, sol in ladder_i["solutions"].items():
        assert sol.residual_inf <= 1e-10
        assert sol.energy < 0.0
        assert sol.rho < 0.0
        count, _ = sign_changes(sol.values, sol.grid.nodes)
        assert count == 1
        assert sol.second_variation_min is not None
        scale = max(1.0, float(np.max(np.abs(sol.values))))
        assert sol.second_variation_min >= -1e-8 * scale


def test_minimizer_edge_pinned_offsets_shrink(ladder_i, spec_i):
    offs = [abs(ladder_i["solutions"][e].rho + spec_i.xi) for e in (0.02, 0.01, 0.005, 0.0025)]
    assert all(b < a for a, b in zip(offs, offs[1:]))


def test_minimizer_supercritical_zero_near_origin(spec_i, thresholds_i):
    a = 2.0 * thresholds_i.a_star_upper
    rhos = {}
    for eps in (0.02, 0.01):
        sol = sk.solve_minimizer(spec_i, eps, a)
        assert abs(sol.rho) <= 5 * eps
        rhos[eps] = sol.rho
    assert abs(rhos[0.01]) <= abs(rhos[0.02]) + 1e-9


def test_minimizer_energy_ordering(spec_i, ladder_i):
    sol = ladder_i["solutions"][0.01]
    sq = np.sqrt(np.clip(spec_i.mu(sol.grid.nodes), 0.0, None))
    for name in ("step", "plus", "minus", "antistep"):
        seed = _seed_values(name, sol.grid.nodes, sq)
        assert sol.energy < sk.energy(seed, sol.grid, spec_i, sol.epsilon, sol.a)


def test_minimizer_quotient_bound(ladder_i, etas_i):
    sol = ladder_i["solutions"][0.005]
    eta = etas_i[0.005]
    report = sk.division_diagnostic(sol, eta)
    assert report.max_w_left < 1.0 + 1e-8


def test_minimizer_rejects_bad_amplitude(spec_i):
    with pytest.raises(PreconditionError):
        sk.solve_minimizer(spec_i, 0.01, 0.0)
    with pytest.raises(PreconditionError):
        sk.solve_minimizer(spec_i, 0.01, -1.0)


def test_minimizer_rejects_epsilon_above_ladder(spec_i):
    with pytest.raises(PreconditionError):
        sk.solve_minimizer(spec_i, 0.5, A_HALF)


def test_minimizer_nonconvergence_diagnostics(spec_i):
    cfg = sk.SolverConfig(max_iters=1)
    with pytest.raises(NonconvergenceError) as err:
        sk.solve_minimizer(spec_i, 0.02, A_HALF, cfg)
    assert "seeds" in err.value.context
    assert set(err.value.context["seeds"]) == {"step", "plus", "minus", "antistep"}


def test_minimizer_deterministic(spec_i):
    s1 = sk.solve_minimizer(spec_i, 0.02, A_HALF)
    s2 = sk.solve_minimizer(spec_i, 0.02, A_HALF)
    assert s1.values.tobytes() == s2.values.tobytes()
    assert s1.rho == s2.rho and s1.energy == s2.energy


# --- locate_zero ------------------------------------------------------------

def test_locate_zero_odd_linear():
    g = Grid1D.uniform(-1.0, 1.0, 21)
    sol = sk.KinkSolution(0.01, 0.5, g, g.nodes.copy(), 0.0, np.nan, 0.0, 0)
    assert sk.locate_zero(sol) == pytest.approx(0.0, abs=1e-15)


def test_locate_zero_linear_interpolation_arithmetic():
    nodes = np.array([0.0, 1.0, 2.0, 3.0])
    g = Grid1D.from_nodes(nodes)
    sol = sk.KinkSolution(0.01, 0.5, g, np.array([-2.0, -1.0, 3.0, 4.0]), 0.0, np.nan, 0.0, 0)
    assert sk.locate_zero(sol) == pytest.approx(1.25, abs=1e-15)


def test_locate_zero_topology_errors():
    g = Grid1D.uniform(0.0, 1.0, 5)
    flat = sk.KinkSolution(0.01, 0.5, g, np.ones(5), 0.0, np.nan, 0.0, 0)
    with pytest.raises(TopologyError):
        sk.locate_zero(flat)
    wiggly = sk.KinkSolution(0.01, 0.5, g, np.array([1.0, -1.0, 1.0, -1.0, 1.0]), 0.0, np.nan, 0.0, 0)
    with pytest.raises(TopologyError):
        sk.locate_zero(wiggly)


# --- the half-line solution -------------------------------------------------

def test_eta_degenerate_forcing_limits_to_bulk_profile(spec_i):
    eta = sk.solve_eta(spec_i, 0.01, 0.0)
    x = eta.grid.nodes
    window = x >= -0.7
    dev = np.max(np.abs(eta.values[window] + np.sqrt(np.clip(spec_i.mu(x[window]), 0.0, None))))
    assert dev <= 0.01


def test_eta_corner_band(spec_i, etas_i):
    eta = etas_i[0.01]
    x = eta.grid.nodes
    t = x + spec_i.xi
    band = (t >= 5 * 0.01 ** (2 / 3)) & (t <= 0.3)
    dev = np.abs(eta.values[band] + np.sqrt(spec_i.mu_prime_neg_xi * t[band]))
    assert np.max(dev / np.sqrt(t[band])) <= 0.2    # sweep-measured constant ~0.08
    assert np.all(eta.values[1:] < 0.0)
    assert eta.residual_inf <= 1e-10


def test_eta_two_grid_consistency(spec_i):
    from scipy.interpolate import CubicSpline

    e1 = sk.solve_eta(spec_i, 0.01, A_HALF, sk.SolverConfig(refine=1.0))
    e2 = sk.solve_eta(spec_i, 0.01, A_HALF, sk.SolverConfig(refine=2.0))
    diff = np.max(np.abs(CubicSpline(e2.grid.nodes, e2.values)(e1.grid.nodes) - e1.values))
    assert diff <= 2e-5    # O(h^2) at these resolutions
