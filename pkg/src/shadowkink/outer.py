"""Outer algebraic root and the two-term corner expansion.

Away from the layers, dropping the eps^2 v'' term reduces the equation to
the cubic

    mu(x) nu - nu^3 + eps a f(x) = 0.

Where mu(x) < 0 the cubic is strictly monotone and has one real root, close
to -eps a f(x)/mu(x).  Where mu(x) > 0 there may be three real roots; the
branch of interest is the one continuous in eps from nu = 0, which lives in
(-sqrt(mu/3), sqrt(mu/3)) where the cubic is increasing.  Newton is seeded
at -eps a f/mu and guarded so it cannot leave that neighborhood.
"""

from __future__ import annotations

import math


from .errors import MarginError, WindowError
from .model import PotentialSpec


def outer_root(spec: PotentialSpec, epsilon: float, a: float, x: float, margin: float = 10.0) -> float:
    """Root of mu(x) nu - nu^3 + eps a f(x) = 0 continuous in eps from 0.

    Intended for x <= -xi - margin * eps^(2/3), where the root is unique and
    negative; calls inside the well succeed only while Newton stays in the
    small-root basin, otherwise a ``MarginError`` is raised.
    """
    mu = float(spec.mu(x))
    fx = float(spec.f(x))
    c = epsilon * a * fx
    if mu == 0.0:
        raise MarginError("mu vanishes at the evaluation point", x=x)
    nu = -c / mu
    bound = math.sqrt(mu / 3.0) if mu > 0.0 else math.inf
    if abs(nu) >= bound:
        raise MarginError(
            "seed already outside the uniqueness neighborhood", x=x, seed=nu, bound=bound
        )
    scale = max(1.0, abs(mu), abs(c))
    for _ in range(100):
        g = mu * nu - nu**3 + c
        if abs(g) <= 1e-15 * scale:
            break
        dg = mu - 3.0 * nu * nu
        if dg == 0.0:
            raise MarginError("Newton hit a critical point of the cubic", x=x, nu=nu)
        nu -= g / dg
        if abs(nu) >= bound:
            raise MarginError(
                "margin too small: Newton left the uniqueness neighborhood",
                x=x,
                nu=nu,
                bound=bound,
            )
    if mu < 0.0 and a > 0.0 and fx < 0.0 and nu >= 0.0:
        raise MarginError("outer root lost its sign", x=x, nu=nu)
    return float(nu)


def corner_expansion_eta(spec: PotentialSpec, epsilon: float, a: float, x: float, delta: float = 0.5) -> float:
    """Two-term expansion of the negative half-line solution just inside the edge:

        -sqrt(mu'(-xi) (x+xi)) + (a f(-xi) / (2 mu'(-xi))) * eps / (x+xi),

    valid for eps^(2/3) <= x + xi <= delta.
    """
    t = x + spec.xi
    lo = epsilon ** (2.0 / 3.0)
    if not (lo <= t <= delta):
        raise WindowError(
            "x outside the corner expansion window", x=x, window=[-spec.xi + lo, -spec.xi + delta]
        )
    slope = spec.mu_prime_neg_xi
    return float(-math.sqrt(slope * t) + (a * spec.f_neg_xi / (2.0 * slope)) * epsilon / t)
