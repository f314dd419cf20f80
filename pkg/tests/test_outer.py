import math

import numpy as np
import pytest

import shadowkink as sk
from shadowkink.errors import MarginError, WindowError

from conftest import A_HALF


def test_root_vanishing_forcing(spec_i):
    # f(0) = 0, so the root continuous in eps from zero is zero itself
    assert sk.outer_root(spec_i, 0.01, A_HALF, 0.0) == 0.0


def test_root_matches_leading_term_at_cubic_rate(spec_i):
    x = -1.5
    devs = {}
    for eps in (0.01, 0.005):
        nu = sk.outer_root(spec_i, eps, A_HALF, x)
        assert nu < 0.0
        devs[eps] = abs(nu - (-eps * A_HALF * spec_i.f(x) / spec_i.mu(x)))
    ratio = devs[0.01] / devs[0.005]
    assert 6.0 <= ratio <= 10.0       # eps^3 correction halves by ~8


def test_root_tracks_small_branch_among_three(spec_i):
    # inside the well all three roots are real and separated; the returned
    # one must be the root continuous in eps from zero
    eps, a, x = 0.01, 0.5, -0.5
    nu = sk.outer_root(spec_i, eps, a, x)
    mu, f = float(spec_i.mu(x)), float(spec_i.f(x))
    roots = np.roots([-1.0, 0.0, mu, eps * a * f])
    real = np.sort(roots[np.abs(roots.imag) < 1e-12].real)
    assert len(real) == 3
    small = real[np.argmin(np.abs(real))]
    assert nu == pytest.approx(small, abs=1e-12)


def test_root_margin_error_when_forcing_too_large(spec_i):
    # forcing pushed beyond the fold: the small-root neighborhood is gone
    with pytest.raises(MarginError):
        sk.outer_root(spec_i, 1.0, 5.0, -0.9)


def test_corner_expansion_leading_term(spec_i):
    t = 0.09
    val = sk.corner_expansion_eta(spec_i, 1e-9, A_HALF, -spec_i.xi + t)
    assert val == pytest.approx(-math.sqrt(spec_i.mu_prime_neg_xi * t), abs=1e-6)


def test_corner_expansion_correction_coefficient(spec_i):
    # for the gradient pair f = -mu'/2 the correction coefficient is -a/4
    a, eps, t = 0.8, 0.01, 0.2
    val = sk.corner_expansion_eta(spec_i, eps, a, -spec_i.xi + t)
    lead = -math.sqrt(spec_i.mu_prime_neg_xi * t)
    assert (val - lead) == pytest.approx((-a / 4.0) * eps / t, rel=1e-12)


def test_corner_expansion_window(spec_i):
    with pytest.raises(WindowError):
        sk.corner_expansion_eta(spec_i, 0.01, A_HALF, -spec_i.xi + 1e-4)
    with pytest.raises(WindowError):
        sk.corner_expansion_eta(spec_i, 0.01, A_HALF, -spec_i.xi + 0.9)


@pytest.mark.parametrize("eps", [0.01, 0.005])
def test_corner_expansion_tracks_eta(spec_i, eps):
    """|eta - expansion| <= C (eps^2 t^(-5/2) + eps); C from a sweep over the
    tested eps range (the expansion truncates the edge Taylor series, so the
    constant holds on the desk-scale window, not asymptotically in t)."""
    eta = sk.solve_eta(spec_i, eps, A_HALF)
    x = eta.grid.nodes
    t = x + spec_i.xi
    band = (t >= eps ** (2 / 3)) & (t <= 0.3)
    for i in np.nonzero(band)[0]:
        dev = abs(eta.values[i] - sk.corner_expansion_eta(spec_i, eps, A_HALF, x[i]))
        assert dev <= 8.0 * (eps**2 * t[i] ** -2.5 + eps)
