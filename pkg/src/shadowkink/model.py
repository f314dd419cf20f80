"""Coefficient pairs (mu, f) and their variational amplitude thresholds.

The equation under study is

    eps^2 v'' + mu(x) v - v^3 + eps a f(x) = 0,

where mu is even with a single positive root xi (so mu > 0 exactly on
(-xi, xi)) and f is odd, positive on (0, inf), and integrable.  Two
amplitudes separate the qualitative regimes of the energy minimizer:

    a_upper(x) = sqrt(2) (mu(0)^(3/2) - mu(x)^(3/2)) / (3 int_x^0 |f| sqrt(mu)),
    a_lower(x) = sqrt(2) mu(x)^(3/2) / (3 int_{-xi}^x |f| sqrt(mu)),

with a^* the sup of the first over [-xi, 0) and a_* the inf of the second
over (-xi, 0].  For the special pair f = -mu'/2 the integral telescopes to
mu^(3/2)/3 and both quotients are identically sqrt(2), which is the main
consistency anchor for the quadrature below.

The quotients are 0/0 at one endpoint each, so the inner integral is
computed after the substitution x = -xi + u^2 which removes the square-root
corner of the integrand at -xi; cumulative composite Simpson in u then gives
every scan point from a single pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    AmbiguousRootError,
    DegenerateQuotientError,
    InvalidSpecError,
    NoRootError,
    PreconditionError,
    ValidationError,
)

SQRT2 = math.sqrt(2.0)

# Gauss-Legendre rule for partial cells of the cumulative integral.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(7)


def _rational_mu(x):
    x = np.asarray(x, dtype=float)
    return (1.0 - x * x) / (1.0 + x * x)


def _rational_mu_prime(x):
    x = np.asarray(x, dtype=float)
    return -4.0 * x / (1.0 + x * x) ** 2


_FAMILIES = {
    # mu = (1-x^2)/(1+x^2) with the gradient forcing f = -mu'/2
    "rational-grad": dict(
        mu=_rational_mu,
        mu_prime=_rational_mu_prime,
        f=lambda x: 2.0 * np.asarray(x, float) / (1.0 + np.asarray(x, float) ** 2) ** 2,
        f_prime=lambda x: (2.0 - 6.0 * np.asarray(x, float) ** 2)
        / (1.0 + np.asarray(x, float) ** 2) ** 3,
        bracket=(0.5, 2.0),
        l_val=2.0,
    ),
    # same mu, generic odd integrable forcing
    "rational-gauss": dict(
        mu=_rational_mu,
        mu_prime=_rational_mu_prime,
        f=lambda x: np.asarray(x, float) * np.exp(-np.asarray(x, float) ** 2),
        f_prime=lambda x: (1.0 - 2.0 * np.asarray(x, float) ** 2)
        * np.exp(-np.asarray(x, float) ** 2),
        bracket=(0.5, 2.0),
        l_val=2.0,
    ),
    # mu = (1-x^2) exp(-x^2); monotone only up to sqrt(2), so the validation
    # window must stay inside that
    "gauss-grad": dict(
        mu=lambda x: (1.0 - np.asarray(x, float) ** 2) * np.exp(-np.asarray(x, float) ** 2),
        mu_prime=lambda x: -2.0
        * np.asarray(x, float)
        * (2.0 - np.asarray(x, float) ** 2)
        * np.exp(-np.asarray(x, float) ** 2),
        f=lambda x: np.asarray(x, float)
        * (2.0 - np.asarray(x, float) ** 2)
        * np.exp(-np.asarray(x, float) ** 2),
        f_prime=lambda x: (2.0 - 7.0 * np.asarray(x, float) ** 2 + 2.0 * np.asarray(x, float) ** 4)
        * np.exp(-np.asarray(x, float) ** 2),
        bracket=(0.5, 1.3),
        l_val=1.2,
    ),
    # restricted test family; not integrable, used for root finding only
    "cosine-grad": dict(
        mu=lambda x: np.cos(np.asarray(x, float)),
        mu_prime=lambda x: -np.sin(np.asarray(x, float)),
        f=lambda x: 0.5 * np.sin(np.asarray(x, float)),
        f_prime=lambda x: 0.5 * np.cos(np.asarray(x, float)),
        bracket=(1.0, 2.0),
        l_val=2.0,
    ),
}


@dataclass
class PotentialSpec:
    """A coefficient pair (mu, f) with hand-coded derivatives and root xi."""

    family_id: str
    params: tuple
    mu: callable
    mu_prime: callable
    f: callable
    f_prime: callable
    xi: float
    l_val: float = 2.0
    table: dict | None = None
    _validation: "AssumptionReport | None" = field(default=None, repr=False)
    _thresholds: dict = field(default_factory=dict, repr=False)

    @classmethod
    def builtin(cls, family_id: str, params=()) -> "PotentialSpec":
        if family_id not in _FAMILIES:
            raise InvalidSpecError(
                f"unknown family '{family_id}'", known=sorted(_FAMILIES)
            )
        fam = _FAMILIES[family_id]
        spec = cls(
            family_id=family_id,
            params=tuple(params),
            mu=fam["mu"],
            mu_prime=fam["mu_prime"],
            f=fam["f"],
            f_prime=fam["f_prime"],
            xi=float("nan"),
            l_val=fam["l_val"],
        )
        spec.xi = find_xi(spec, fam["bracket"])
        return spec

    @classmethod
    def from_table(cls, x, mu, f) -> "PotentialSpec":
        """Tabulated pair; derivatives differentiate the cubic interpolant."""
        x = np.asarray(x, dtype=float)
        mu_s = CubicSpline(x, np.asarray(mu, dtype=float))
        f_s = CubicSpline(x, np.asarray(f, dtype=float))
        mu_p = mu_s.derivative()
        f_p = f_s.derivative()
        spec = cls(
            family_id="table",
            params=(),
            mu=mu_s,
            mu_prime=mu_p,
            f=f_s,
            f_prime=f_p,
            xi=float("nan"),
            l_val=float(min(x[-1], -x[0])) * 0.9,
            table={"x": x.tolist(), "mu": np.asarray(mu, float).tolist(), "f": np.asarray(f, float).tolist()},
        )
        spec.xi = find_xi(spec, (1e-6, float(x[-1]) * 0.999))
        return spec

    # -- derived scalars ---------------------------------------------------
    @property
    def mu0(self) -> float:
        return float(self.mu(0.0))

    @property
    def mu_prime_neg_xi(self) -> float:
        return float(self.mu_prime(-self.xi))

    @property
    def f_neg_xi(self) -> float:
        return float(self.f(-self.xi))

    # -- validation and threshold caches -----------------------------------
    def validation(self, n_samples: int = 512, L_val: float | None = None) -> "AssumptionReport":
        if self._validation is None:
            self._validation = validate_assumptions(self, n_samples, L_val)
        return self._validation

    def require_valid(self):
        rep = self.validation()
        if not rep.passed:
            bad = rep.failures()[0]
            raise ValidationError(
                f"assumption clause '{bad.name}' fails at x = {bad.worst_x:.6g}",
                clause=bad.name,
                witness_x=bad.worst_x,
                witness_value=bad.worst_value,
                failing=[c.name for c in rep.failures()],
            )
        return self

    def thresholds(self, quad_n: int = 20000, refine_tol: float = 1e-10) -> "ThresholdReport":
        key = (quad_n, refine_tol)
        if key not in self._thresholds:
            self._thresholds[key] = compute_thresholds(self, quad_n, refine_tol)
        return self._thresholds[key]

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        out = {"family": self.family_id, "params": list(self.params)}
        if self.table is not None:
            out["table"] = self.table
        return out

    @classmethod
    def from_json(cls, obj) -> "PotentialSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        family = obj.get("family")
        if family == "table":
            tab = obj.get("table")
            if not tab:
                raise InvalidSpecError("family 'table' requires a table block")
            return cls.from_table(tab["x"], tab["mu"], tab["f"])
        return cls.builtin(family, obj.get("params", ()))


@dataclass(frozen=True)
class ClauseCheck:
    name: str
    passed: bool
    worst_x: float
    worst_value: float
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_x": self.worst_x,
            "worst_value": self.worst_value,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class AssumptionReport:
    clauses: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self):
        return [c for c in self.clauses if not c.passed]

    def to_json(self) -> dict:
        return {"passed": self.passed, "clauses": [c.to_json() for c in self.clauses]}


@dataclass(frozen=True)
class ThresholdReport:
    a_star_lower: float
    a_star_upper: float
    argmin_x: float
    argmax_x: float
    quadrature_n: int
    refinement_tol: float

    def to_json(self) -> dict:
        return {
            "a_star_lower": self.a_star_lower,
            "a_star_upper": self.a_star_upper,
            "argmin_x": self.argmin_x,
            "argmax_x": self.argmax_x,
            "quadrature_n": self.quadrature_n,
            "refinement_tol": self.refinement_tol,
        }


@dataclass(frozen=True)
class AlphaValue:
    alpha: float
    a: float

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "a": self.a}


def find_xi(spec: PotentialSpec, bracket) -> float:
    """Positive root of mu on ``bracket`` by bisection to machine bracket width.

    A 512-point scan first checks that mu changes sign exactly once there;
    several crossings contradict monotone decay of mu on (0, inf).
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    xs = np.linspace(lo, hi, 512)
    ms = np.asarray(spec.mu(xs), dtype=float)
    signs = np.sign(ms[np.abs(ms) > 1e-13])
    crossings = int(np.sum(np.diff(signs) != 0))
    if crossings > 1:
        raise AmbiguousRootError(
            "mu changes sign more than once on the bracket", bracket=[lo, hi], crossings=crossings
        )
    flo, fhi = float(spec.mu(lo)), float(spec.mu(hi))
    if abs(flo) <= 1e-12:
        return lo
    if abs(fhi) <= 1e-12:
        return hi
    if flo * fhi > 0:
        raise NoRootError("mu does not change sign on the bracket", bracket=[lo, hi])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = float(spec.mu(mid))
        if fm == 0.0:
            lo = hi = mid
            break
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    root = 0.5 * (lo + hi)
    if abs(float(spec.mu(root))) > 1e-12:
        raise NoRootError("bisection stalled away from a root", x=root, mu=float(spec.mu(root)))
    return float(root)


def _simpson(vals, h) -> float:
    n = len(vals) - 1
    if n % 2 == 1:
        raise ValueError("needs an even interval count")
    return float(h / 3.0 * (vals[0] + vals[-1] + 4.0 * np.sum(vals[1:-1:2]) + 2.0 * np.sum(vals[2:-2:2])))


def validate_assumptions(spec: PotentialSpec, n_samples: int = 512, L_val: float | None = None) -> AssumptionReport:
    """Check the structural clauses on (mu, f) by sampling.

    Clauses: evenness of mu, oddness of f, mu' < 0 and f > 0 on (0, L_val],
    boundedness of mu, tail integrability of f (dyadic tail integrals must
    decay), and the root/slope data at xi.  The returned report carries a
    pass flag and the worst sample per clause; nothing is raised here so a
    failing spec can still be inspected.
    """
    if n_samples < 100:
        raise PreconditionError("n_samples must be at least 100", n_samples=n_samples)
    if L_val is None:
        L_val = spec.l_val
    x = np.linspace(0.0, L_val, n_samples + 1)[1:]
    clauses = []

    even_dev = np.abs(np.asarray(spec.mu(x)) - np.asarray(spec.mu(-x)))
    i = int(np.argmax(even_dev))
    clauses.append(ClauseCheck("mu-even", bool(even_dev[i] <= 1e-12), float(x[i]), float(even_dev[i])))

    odd_dev = np.abs(np.asarray(spec.f(x)) + np.asarray(spec.f(-x)))
    i = int(np.argmax(odd_dev))
    clauses.append(ClauseCheck("f-odd", bool(odd_dev[i] <= 1e-12), float(x[i]), float(odd_dev[i])))

    mup = np.asarray(spec.mu_prime(x))
    i = int(np.argmax(mup))
    clauses.append(ClauseCheck("mu-decreasing", bool(np.all(mup < 0.0)), float(x[i]), float(mup[i])))

    fv = np.asarray(spec.f(x))
    i = int(np.argmin(fv))
    clauses.append(ClauseCheck("f-positive", bool(np.all(fv > 0.0)), float(x[i]), float(fv[i])))

    far = np.linspace(-max(4.0 * spec.xi, 2.0 * L_val), max(4.0 * spec.xi, 2.0 * L_val), 1024)
    mu_far = np.asarray(spec.mu(far))
    i = int(np.argmax(np.abs(mu_far)))
    clauses.append(
        ClauseCheck(
            "mu-bounded",
            bool(np.all(np.isfinite(mu_far))),
            float(far[i]),
            float(np.abs(mu_far[i])),
            detail="max |mu| over the wide sample window",
        )
    )

    # dyadic tail integrals of |f|; a diverging integral makes them grow
    if spec.table is not None:
        clauses.append(ClauseCheck("f-integrable", True, 0.0, 0.0, detail="tabulated: finite support"))
    else:
        tail_lo = max(L_val, 2.0 * spec.xi)
        tails = []
        for k in range(7):
            a_k, b_k = tail_lo * 2.0**k, tail_lo * 2.0 ** (k + 1)
            xs = np.linspace(a_k, b_k, 257)
            tails.append(_simpson(np.abs(np.asarray(spec.f(xs))), xs[1] - xs[0]))
        # ties at the underflow floor are convergence, not growth
        growing = [k for k in range(1, len(tails)) if tails[k] >= tails[k - 1] and tails[k] > 1e-30]
        bad = growing[0] if growing else 0
        clauses.append(
            ClauseCheck(
                "f-integrable",
                not growing,
                float(tail_lo * 2.0**bad),
                float(tails[bad]),
                detail="dyadic tail integrals of |f| must decrease",
            )
        )

    mu_xi = abs(float(spec.mu(spec.xi)))
    clauses.append(ClauseCheck("mu-root", bool(mu_xi <= 1e-12), float(spec.xi), mu_xi))
    slope = float(spec.mu_prime(-spec.xi))
    clauses.append(ClauseCheck("mu-slope-at-edge", bool(slope > 0.0), float(-spec.xi), slope))

    return AssumptionReport(tuple(clauses))


class _CornerQuadrature:
    """Cumulative integral of |f| sqrt(mu_+) from -xi, in the variable u = sqrt(x+xi)."""

    def __init__(self, spec: PotentialSpec, quad_n: int):
        self.spec = spec
        self.xi = spec.xi
        n = quad_n + (quad_n % 2)
        self.h = math.sqrt(self.xi) / n
        self.u = np.linspace(0.0, math.sqrt(self.xi), n + 1)
        g = self._integrand(self.u)
        inc = (g[0:-2:2] + 4.0 * g[1:-1:2] + g[2::2]) * (self.h / 3.0)
        # cumulative at even nodes; odd nodes by the 3-point half-cell rule
        even = np.concatenate([[0.0], np.cumsum(inc)])
        cum = np.empty(n + 1)
        cum[0::2] = even
        cum[1::2] = even[:-1] + (self.h / 12.0) * (5.0 * g[0:-1:2] + 8.0 * g[1::2] - g[2::2])
        self.cum = cum
        self.total = float(even[-1])

    def _integrand(self, u):
        x = -self.xi + u * u
        mu = np.clip(np.asarray(self.spec.mu(x), dtype=float), 0.0, None)
        return np.abs(np.asarray(self.spec.f(x), dtype=float)) * np.sqrt(mu) * 2.0 * u

    def at(self, x: float) -> float:
        """Integral from -xi to x, for any x in (-xi, 0]."""
        u = math.sqrt(max(x + self.xi, 0.0))
        k = min(int(u / self.h), len(self.u) - 1)
        base, u0 = self.cum[k], self.u[k]
        if u <= u0:
            return float(base)
        mid, half = 0.5 * (u0 + u), 0.5 * (u - u0)
        pts = mid + half * _GL_X
        return float(base + half * np.dot(_GL_W, self._integrand(pts)))


def compute_thresholds(spec: PotentialSpec, quad_n: int = 20000, refine_tol: float = 1e-10) -> ThresholdReport:
    """Compute (a_*, a^*) by dense scan plus refinement of the two quotients.

    The scan runs on the interior window [-xi + xi/quad_n, -xi/quad_n]; both
    quotients are 0/0 at one endpoint, so when the best scan point is at the
    window edge the refinement walks geometrically toward the endpoint while
    the quotient stays finite and keeps improving.  Near x = 0 both numerator
    and denominator vanish quadratically and their floating-point cancellation
    limits how far the walk may go, hence the larger floor on that side.
    """
    spec.require_valid()
    if quad_n < 200:
        raise PreconditionError("quad_n must be at least 200", quad_n=quad_n)
    xi = spec.xi
    quad = _CornerQuadrature(spec, quad_n)
    mu0_32 = spec.mu0**1.5

    def lower_q(x: float) -> float:
        den = 3.0 * quad.at(x)
        if den < 1e-14:
            raise DegenerateQuotientError("denominator integral below 1e-14", x=x, integral=den / 3.0)
        return SQRT2 * float(spec.mu(x)) ** 1.5 / den

    def upper_q(x: float) -> float:
        den = 3.0 * (quad.total - quad.at(x))
        if den < 1e-14:
            raise DegenerateQuotientError("denominator integral below 1e-14", x=x, integral=den / 3.0)
        return SQRT2 * (mu0_32 - float(spec.mu(x)) ** 1.5) / den

    delta = xi / quad_n
    xs = -xi + quad.u**2
    mask = (xs >= -xi + delta) & (xs <= -delta)
    scan_x = xs[mask]
    mu_scan = np.clip(np.asarray(spec.mu(scan_x), dtype=float), 0.0, None)
    cum_scan = quad.cum[mask]
    if np.any(cum_scan < 1e-14):
        bad = scan_x[cum_scan < 1e-14][0]
        raise DegenerateQuotientError("denominator integral below 1e-14", x=float(bad))
    lower_vals = SQRT2 * mu_scan**1.5 / (3.0 * cum_scan)
    upper_vals = SQRT2 * (mu0_32 - mu_scan**1.5) / (3.0 * (quad.total - cum_scan))
    if not (np.all(np.isfinite(lower_vals)) and np.all(np.isfinite(upper_vals))):
        raise DegenerateQuotientError("non-finite quotient on the scan grid")

    floor_edge = 1e-8 * max(xi, 1.0)   # toward -xi: no cancellation
    floor_zero = 1e-5 * max(xi, 1.0)   # toward 0: quadratic cancellation in both parts

    def refine(vals, func, minimize):
        better = (lambda a, b: a < b) if minimize else (lambda a, b: a > b)
        i = int(np.argmin(vals)) if minimize else int(np.argmax(vals))
        best_x, best_v = float(scan_x[i]), float(vals[i])
        if 0 < i < len(scan_x) - 1:
            best_x, best_v = _golden(func, float(scan_x[i - 1]), float(scan_x[i + 1]), better, refine_tol)
        if i == 0:  # walk toward -xi
            best_x, best_v = _walk(func, -xi, best_x, floor_edge, better, best_x, best_v)
        if i == len(scan_x) - 1:  # walk toward 0
            best_x, best_v = _walk(func, 0.0, best_x, floor_zero, better, best_x, best_v)
        return best_x, best_v

    argmin_x, a_lower = refine(lower_vals, lower_q, minimize=True)
    argmax_x, a_upper = refine(upper_vals, upper_q, minimize=False)

    if not (0.0 < a_lower and np.isfinite(a_upper)):
        raise DegenerateQuotientError("threshold quotients are not finite and positive")
    if a_lower > a_upper * (1.0 + 1e-9):
        raise DegenerateQuotientError(
            "lower threshold exceeds upper threshold", a_lower=a_lower, a_upper=a_upper
        )
    return ThresholdReport(
        a_star_lower=float(a_lower),
        a_star_upper=float(a_upper),
        argmin_x=float(argmin_x),
        argmax_x=float(argmax_x),
        quadrature_n=int(quad_n),
        refinement_tol=float(refine_tol),
    )


def _golden(func, lo, hi, better, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if better(fc, fd):
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def _walk(func, endpoint, start_x, floor, better, best_x, best_v):
    gap = abs(start_x - endpoint) / 2.0
    sign = 1.0 if start_x > endpoint else -1.0
    while gap > floor:
        x = endpoint + sign * gap
        try:
            v = func(x)
        except DegenerateQuotientError:
            break
        if not np.isfinite(v):
            break
        if better(v, best_v):
            best_x, best_v = x, v
        gap /= 2.0
    return best_x, best_v


def alpha_of(spec: PotentialSpec, a: float) -> AlphaValue:
    """Map a forcing amplitude to the Painleve-II parameter
    alpha = a f(-xi) / (sqrt(2) mu'(-xi)); negative for every a > 0."""
    if a <= 0.0:
        raise PreconditionError("a must be positive", a=a)
    spec.require_valid()
    slope = spec.mu_prime_neg_xi
    if slope <= 0.0:
        raise InvalidSpecError("mu'(-xi) must be positive", mu_prime=slope)
    alpha = a * spec.f_neg_xi / (SQRT2 * slope)
    if alpha >= 0.0:
        raise InvalidSpecError("alpha must come out negative for a valid pair", alpha=alpha)
    return AlphaValue(alpha=float(alpha), a=float(a))
