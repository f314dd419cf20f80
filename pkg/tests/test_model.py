import json
import math

import numpy as np
import pytest

import shadowkink as sk
from shadowkink.errors import (
    AmbiguousRootError,
    DegenerateQuotientError,
    NoRootError,
    PreconditionError,
    ValidationError,
)
from shadowkink.model import _FAMILIES

SQRT2 = math.sqrt(2.0)

# brute-force oracle for the rational/gaussian pair: 4e6-point cumulative
# Simpson in u = sqrt(x+xi); the infimum is the edge limit
# sqrt(2) mu'(-xi) / (2 |f(-xi)|) = e / sqrt(2)
A_LOWER_II = 1.922115407205
# the supremum is approached at x -> 0-, limit sqrt(2) (-mu''(0)) / (2 f'(0)) = 2 sqrt(2)
A_UPPER_II = 2.0 * SQRT2


def test_find_xi_builtin_families():
    assert sk.PotentialSpec.builtin("rational-grad").xi == pytest.approx(1.0, abs=1e-12)
    assert sk.PotentialSpec.builtin("cosine-grad").xi == pytest.approx(math.pi / 2, abs=1e-12)
    assert sk.PotentialSpec.builtin("gauss-grad").xi == pytest.approx(1.0, abs=1e-12)


def test_find_xi_no_root(spec_i):
    with pytest.raises(NoRootError):
        sk.find_xi(spec_i, (1.5, 2.0))


def test_find_xi_ambiguous():
    spec = sk.PotentialSpec.builtin("cosine-grad")
    with pytest.raises(AmbiguousRootError):
        sk.find_xi(spec, (1.0, 8.0))  # cos has three roots there


def test_validate_builtin_pairs(spec_i, spec_ii):
    for spec in (spec_i, spec_ii):
        report = sk.validate_assumptions(spec, 512)
        assert report.passed, [c.name for c in report.failures()]


def test_validate_rejects_nonintegrable_forcing(spec_i):
    bad = sk.PotentialSpec(
        family_id="custom",
        params=(),
        mu=spec_i.mu,
        mu_prime=spec_i.mu_prime,
        f=lambda x: np.asarray(x, float),
        f_prime=lambda x: np.ones_like(np.asarray(x, float)),
        xi=1.0,
    )
    report = sk.validate_assumptions(bad, 512)
    failed = {c.name for c in report.failures()}
    assert "f-integrable" in failed
    with pytest.raises(ValidationError):
        bad.require_valid()


def test_validate_needs_enough_samples(spec_i):
    with pytest.raises(PreconditionError):
        sk.validate_assumptions(spec_i, 50)


def test_thresholds_gradient_pair_is_sqrt2(thresholds_i):
    assert thresholds_i.a_star_lower == pytest.approx(SQRT2, abs=1e-6)
    assert thresholds_i.a_star_upper == pytest.approx(SQRT2, abs=1e-6)
    assert 0.0 < thresholds_i.a_star_lower <= thresholds_i.a_star_upper


def test_thresholds_gradient_pair_family_independent(spec_gauss):
    # the telescoping of the integral does not depend on the mu family
    report = spec_gauss.thresholds()
    assert report.a_star_lower == pytest.approx(SQRT2, abs=1e-6)
    assert report.a_star_upper == pytest.approx(SQRT2, abs=1e-6)


def test_thresholds_gaussian_forcing_oracle(thresholds_ii):
    assert thresholds_ii.a_star_lower == pytest.approx(A_LOWER_II, abs=1e-6)
    assert thresholds_ii.a_star_upper == pytest.approx(A_UPPER_II, abs=1e-4)
    # infimum sits at the edge for this pair
    assert thresholds_ii.argmin_x == pytest.approx(-1.0, abs=1e-3)


def test_thresholds_scale_linearly_in_f(spec_i):
    c = 3.7
    scaled = sk.PotentialSpec(
        family_id="custom",
        params=(),
        mu=spec_i.mu,
        mu_prime=spec_i.mu_prime,
        f=lambda x: c * spec_i.f(x),
        f_prime=lambda x: c * spec_i.f_prime(x),
        xi=spec_i.xi,
    )
    base = sk.compute_thresholds(spec_i, quad_n=4000)
    rep = sk.compute_thresholds(scaled, quad_n=4000)
    assert rep.a_star_lower == pytest.approx(base.a_star_lower / c, rel=1e-10)
    assert rep.a_star_upper == pytest.approx(base.a_star_upper / c, rel=1e-10)


def test_thresholds_quad_n_precondition(spec_i):
    with pytest.raises(PreconditionError):
        sk.compute_thresholds(spec_i, quad_n=100)


def test_thresholds_degenerate_denominator():
    # f identically zero near the edge starves the denominator integral
    x = np.linspace(-2.0, 2.0, 401)
    mu = (1 - x**2) / (1 + x**2)
    f = np.where(np.abs(x) > 1.9, x - np.sign(x) * 1.9, 0.0) * 1e-3
    spec = sk.PotentialSpec.from_table(x, mu, f)
    with pytest.raises((DegenerateQuotientError, ValidationError)):
        sk.compute_thresholds(spec)


def test_thresholds_deterministic(spec_i):
    r1 = sk.compute_thresholds(spec_i, quad_n=8000)
    r2 = sk.compute_thresholds(spec_i, quad_n=8000)
    assert r1.to_json() == r2.to_json()
    assert r1.a_star_lower.hex() == r2.a_star_lower.hex()


def test_alpha_of_special_values(spec_i):
    assert sk.alpha_of(spec_i, SQRT2).alpha == pytest.approx(-0.5, abs=1e-12)
    # alpha = -a / (2 sqrt(2)) after substituting f(-xi) = -mu'(-xi)/2
    assert sk.alpha_of(spec_i, SQRT2 / 2).alpha == pytest.approx(-0.25, abs=1e-12)


@pytest.mark.parametrize("a", [0.1, 0.37, 1.0, 2.5])
def test_alpha_of_linearity(spec_i, a):
    one = sk.alpha_of(spec_i, a).alpha
    two = sk.alpha_of(spec_i, 2 * a).alpha
    assert two == pytest.approx(2 * one, rel=1e-14)
    assert one < 0.0


def test_alpha_of_rejects_nonpositive_amplitude(spec_i):
    with pytest.raises(PreconditionError):
        sk.alpha_of(spec_i, 0.0)


def test_spec_json_round_trip(spec_i):
    blob = json.dumps(spec_i.to_json())
    again = sk.PotentialSpec.from_json(blob)
    assert again.family_id == "rational-grad"
    assert again.xi == pytest.approx(spec_i.xi, abs=1e-14)


def test_tabulated_spec_matches_builtin(spec_i):
    x = np.linspace(-3.0, 3.0, 1201)
    tab = sk.PotentialSpec.from_table(x, spec_i.mu(x), spec_i.f(x))
    assert tab.xi == pytest.approx(1.0, abs=1e-6)
    assert tab.validation().passed
    rep = sk.compute_thresholds(tab, quad_n=4000)
    assert rep.a_star_lower == pytest.approx(SQRT2, abs=1e-3)
    blob = tab.to_json()
    assert "table" in blob
    again = sk.PotentialSpec.from_json(blob)
    assert again.xi == pytest.approx(tab.xi, abs=1e-12)


def test_registry_covers_expected_families():
    assert {"rational-grad", "rational-gauss", "gauss-grad", "cosine-grad"} <= set(_FAMILIES)
