"""Energy-minimizing solutions of the forced bistable equation.

The equation

    eps^2 v'' + mu(x) v - v^3 + eps a f(x) = 0      on [-L, L], v(+-L) = 0

is the Euler-Lagrange equation of

    E[v] = int (eps^2/2) v'^2 - (mu/2) v^2 + v^4/4 - eps a f v dx,

so the solver minimizes the discrete energy: damped Newton on the
second-order finite-difference system, with an Armijo line search on a
cell-based quadrature of E whose gradient is exactly the (weighted) discrete
residual.  Global minimality cannot be certified numerically; it is
approximated by running four seed profiles down a decreasing-eps
continuation ladder, keeping the converged candidate of lowest energy, and
checking that the second-variation matrix there is positive semidefinite.

Every returned solution is reflected, if needed, so its unique zero
satisfies rho < 0 (the functional is invariant under v -> -v(-x) because mu
is even and f odd, so the two minimizers form a mirror pair).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import NonconvergenceError, PreconditionError, TopologyError
from .grids import Grid1D, layer_grid
from .model import PotentialSpec
from .outer import outer_root
from .util import sign_changes

_DEFAULT_LADDER = (0.08, 0.0566, 0.04, 0.0283, 0.02, 0.0141, 0.01, 0.00707, 0.005, 0.00354, 0.0025)
_SEED_NAMES = ("step", "plus", "minus", "antistep")


@dataclass
class SolverConfig:
    L: float | None = None          # truncation half-length; defaults to xi + 1
    n: int = 400                    # base cell count across the domain
    tol: float = 1e-10
    max_iters: int = 60
    damping_min: float = 1e-4
    continuation_eps: tuple = _DEFAULT_LADDER
    seeds: tuple = _SEED_NAMES
    layer_centers: tuple = (0.0,)
    refine: float = 1.0
    check_second_variation: bool = True

    def __post_init__(self):
        if self.tol <= 0:
            raise PreconditionError("tol must be positive", tol=self.tol)
        eps = tuple(self.continuation_eps)
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise PreconditionError("continuation_eps must be strictly decreasing")


@dataclass
class KinkSolution:
    epsilon: float
    a: float
    grid: Grid1D
    values: np.ndarray
    energy: float
    rho: float
    residual_inf: float
    newton_iters: int
    spec: PotentialSpec = field(repr=False, default=None)
    second_variation_min: float | None = None
    seed: str = ""
    canonicalized: bool = False

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "a": self.a,
            "family": self.spec.family_id if self.spec else None,
            "rho": self.rho,
            "energy": self.energy,
            "residual_inf": self.residual_inf,
            "newton_iters": self.newton_iters,
            "n_nodes": self.grid.n,
            "left": self.grid.left,
            "right": self.grid.right,
            "second_variation_min": self.second_variation_min,
            "seed": self.seed,
            "canonicalized": self.canonicalized,
        }


@dataclass
class EtaSolution:
    epsilon: float
    a: float
    grid: Grid1D
    values: np.ndarray
    residual_inf: float
    newton_iters: int = 0
    spec: PotentialSpec = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "a": self.a,
            "family": self.spec.family_id if self.spec else None,
            "residual_inf": self.residual_inf,
            "newton_iters": self.newton_iters,
            "n_nodes": self.grid.n,
            "left": self.grid.left,
            "right": self.grid.right,
        }


def energy(values, grid: Grid1D, spec: PotentialSpec, epsilon: float, a: float) -> float:
    """Trapezoidal quadrature of the energy density, with the derivative taken
    by centered differences at interior nodes and one-sided at the ends."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise PreconditionError("values must be finite")
    x = grid.nodes
    dv = np.empty_like(v)
    dv[1:-1] = (v[2:] - v[:-2]) / (x[2:] - x[:-2])
    dv[0] = (v[1] - v[0]) / (x[1] - x[0])
    dv[-1] = (v[-1] - v[-2]) / (x[-1] - x[-2])
    g = (
        0.5 * epsilon**2 * dv**2
        - 0.5 * np.asarray(spec.mu(x)) * v**2
        + 0.25 * v**4
        - epsilon * a * np.asarray(spec.f(x)) * v
    )
    return float(np.trapezoid(g, x))


class _Discretization:
    """Residual, banded Jacobian and consistent energy on a fixed grid."""

    def __init__(self, grid: Grid1D, spec: PotentialSpec, epsilon: float, a: float):
        self.grid = grid
        self.eps = epsilon
        self.a = a
        x = grid.nodes
        self.mux = np.asarray(spec.mu(x), dtype=float)
        self.fx = np.asarray(spec.f(x), dtype=float)
        h = grid.spacing
        self.hm, self.hp = h[:-1], h[1:]
        self.cm = 2.0 / (self.hm * (self.hm + self.hp))
        self.cp = 2.0 / (self.hp * (self.hm + self.hp))
        self.w = np.empty(grid.n)
        self.w[0] = h[0] / 2.0
        self.w[-1] = h[-1] / 2.0
        self.w[1:-1] = (self.hm + self.hp) / 2.0

    def residual(self, v, bc_left: float, bc_right: float):
        r = np.empty_like(v)
        r[0] = v[0] - bc_left
        r[-1] = v[-1] - bc_right
        vi = v[1:-1]
        d2 = self.cm * v[:-2] - (self.cm + self.cp) * vi + self.cp * v[2:]
        r[1:-1] = self.eps**2 * d2 + self.mux[1:-1] * vi - vi**3 + self.eps * self.a * self.fx[1:-1]
        return r

    def jacobian_banded(self, v):
        # solve_banded layout: ab[u + i - j, j] = A[i, j] with (l, u) = (1, 1)
        n = len(v)
        ab = np.zeros((3, n))
        ab[1, 0] = ab[1, -1] = 1.0
        ab[0, 2:] = self.eps**2 * self.cp               # A[i, i+1], i = 1..n-2
        ab[2, :-2] = self.eps**2 * self.cm              # A[i, i-1], i = 1..n-2
        ab[1, 1:-1] = -self.eps**2 * (self.cm + self.cp) + self.mux[1:-1] - 3.0 * v[1:-1] ** 2
        return ab

    def energy_h(self, v) -> float:
        """Cell-based energy whose gradient is -w * residual (used by Armijo)."""
        h = self.grid.spacing
        grad_term = 0.5 * self.eps**2 * np.sum((np.diff(v) / h) ** 2 * h)
        well = -0.5 * self.mux * v**2 + 0.25 * v**4 - self.eps * self.a * self.fx * v
        return float(grad_term + np.sum(self.w * well))


class _NewtonFailure(Exception):
    def __init__(self, reason, residual):
        self.reason = reason
        self.residual = residual


def _newton(disc: _Discretization, v0, bc, tol, max_iters, damping_min, merit="energy"):
    """Damped Newton; step lengths from Armijo on the discrete energy (or on
    the residual norm for non-minimizing problems)."""
    v = np.array(v0, dtype=float)
    v[0], v[-1] = bc
    for it in range(max_iters):
        r = disc.residual(v, *bc)
        rn = float(np.max(np.abs(r)))
        if not math.isfinite(rn):
            raise _NewtonFailure("non-finite residual", rn)
        if rn <= tol:
            return v, it, rn
        d = solve_banded((1, 1), disc.jacobian_banded(v), -r)
        accepted = False
        if merit == "energy":
            e0 = disc.energy_h(v)
            slope = float(np.sum(-disc.w * r * d))
            t = 1.0
            while t >= damping_min:
                vt = v + t * d
                if disc.energy_h(vt) <= e0 + 1e-4 * t * slope:
                    v, accepted = vt, True
                    break
                t /= 2.0
        if not accepted:
            t = 1.0
            while t >= damping_min:
                vt = v + t * d
                rt = disc.residual(vt, *bc)
                if np.max(np.abs(rt)) < (1.0 - 1e-4 * t) * rn:
                    v, accepted = vt, True
                    break
                t /= 2.0
        if not accepted:
            raise _NewtonFailure("line search stalled", rn)
    r = disc.residual(v, *bc)
    rn = float(np.max(np.abs(r)))
    if rn <= tol:
        return v, max_iters, rn
    raise _NewtonFailure("iteration limit", rn)


def _seed_values(name, x, mu_plus_sqrt):
    if name == "step":
        return np.sign(x) * mu_plus_sqrt
    if name == "plus":
        return mu_plus_sqrt.copy()
    if name == "minus":
        return -mu_plus_sqrt
    if name == "antistep":
        return -np.sign(x) * mu_plus_sqrt
    raise PreconditionError(f"unknown seed '{name}'")


def _make_grid(spec, L, eps, config, left=None, right=None):
    return layer_grid(
        left if left is not None else -L,
        right if right is not None else L,
        eps,
        spec.xi,
        base_cells=config.n,
        centers=config.layer_centers,
        refine=config.refine,
    )


def solve_minimizer(spec: PotentialSpec, epsilon: float, a: float, config: SolverConfig | None = None) -> KinkSolution:
    """Lowest-energy solution with exactly one sign change.

    Four seed profiles (+-sqrt(mu+) and the two step profiles) are each
    continued down the eps ladder, re-gridding and re-interpolating at every
    rung; among the converged candidates with a single sign change the one
    of least energy wins.  The result is reflected so that rho < 0.
    """
    config = config or SolverConfig()
    if a <= 0.0:
        raise PreconditionError("a must be positive", a=a)
    if epsilon <= 0.0:
        raise PreconditionError("epsilon must be positive", epsilon=epsilon)
    spec.require_valid()
    if epsilon > config.continuation_eps[0]:
        raise PreconditionError(
            "epsilon exceeds the top of the continuation ladder",
            epsilon=epsilon,
            ladder_top=config.continuation_eps[0],
        )
    L = config.L if config.L is not None else spec.xi + 1.0
    if L < spec.xi + 0.5:
        raise PreconditionError("L must be at least xi + 0.5", L=L, xi=spec.xi)

    rungs = [e for e in config.continuation_eps if e > epsilon * (1.0 + 1e-12)] + [epsilon]
    candidates = []
    diagnostics = {}
    for seed_name in config.seeds:
        v = None
        prev_grid = None
        failure = None
        for eps_k in rungs:
            grid = _make_grid(spec, L, eps_k, config)
            x = grid.nodes
            if v is None:
                v = _seed_values(seed_name, x, np.sqrt(np.clip(np.asarray(spec.mu(x)), 0.0, None)))
            else:
                v = CubicSpline(prev_grid.nodes, v)(x)
            disc = _Discretization(grid, spec, eps_k, a)
            try:
                v, iters, rn = _newton(disc, v, (0.0, 0.0), config.tol, config.max_iters, config.damping_min)
            except _NewtonFailure as exc:
                failure = {"eps": eps_k, "reason": exc.reason, "residual": exc.residual}
                break
            prev_grid = grid
        if failure is not None:
            diagnostics[seed_name] = failure
            continue
        count, _ = sign_changes(v, grid.nodes)
        e = energy(v, grid, spec, epsilon, a)
        diagnostics[seed_name] = {"energy": e, "sign_changes": count, "residual": rn}
        candidates.append((seed_name, grid, v, e, count, iters, rn))

    if not candidates:
        raise NonconvergenceError("no seed converged", seeds=diagnostics)
    kinks = [c for c in candidates if c[4] == 1]
    if not kinks:
        best = min(candidates, key=lambda c: c[3])
        sol = _assemble(spec, epsilon, a, best, config, canonicalize=False)
        raise TopologyError(
            f"converged solution has {best[4]} sign changes, expected 1",
            solution=sol,
            sign_changes=best[4],
            seeds=diagnostics,
        )
    best = min(kinks, key=lambda c: c[3])
    best = _refine_at_zero(spec, epsilon, a, best, config, L)
    return _assemble(spec, epsilon, a, best, config, canonicalize=True)


def _refine_at_zero(spec, epsilon, a, candidate, config, L):
    """Re-solve once on a grid that declares the found zero as a layer center.

    The zero is read off by linear interpolation, so its error carries an
    oscillatory cell-position component of size h_cell^2; placing an
    eps-scale band at +-rho shrinks the crossing cell well below the smooth
    discretization error and keeps grid-halving studies clean second order.
    """
    seed_name, grid, v, e, count, iters, rn = candidate
    _, zero = sign_changes(v, grid.nodes)
    if zero is None:
        return candidate
    centers = tuple(sorted(set(config.layer_centers) | {abs(zero), -abs(zero)}))
    fine = layer_grid(-L, L, epsilon, spec.xi, base_cells=config.n, centers=centers, refine=config.refine)
    disc = _Discretization(fine, spec, epsilon, a)
    v2 = CubicSpline(grid.nodes, v)(fine.nodes)
    try:
        v2, iters2, rn2 = _newton(disc, v2, (0.0, 0.0), config.tol, config.max_iters, config.damping_min)
    except _NewtonFailure:
        return candidate
    count2, _ = sign_changes(v2, fine.nodes)
    if count2 != count:
        return candidate
    return (seed_name, fine, v2, energy(v2, fine, spec, epsilon, a), count2, iters + iters2, rn2)


def _assemble(spec, epsilon, a, candidate, config, canonicalize) -> KinkSolution:
    seed_name, grid, v, e, count, iters, rn = candidate
    flipped = False
    if canonicalize:
        _, zero = sign_changes(v, grid.nodes)
        if zero is not None and zero > 0.0:
            # mirror grid by construction: -v(-x) is v reversed and negated
            v = -v[::-1]
            flipped = True
    sol = KinkSolution(
        epsilon=epsilon,
        a=a,
        grid=grid,
        values=v,
        energy=energy(v, grid, spec, epsilon, a),
        rho=float("nan"),
        residual_inf=rn,
        newton_iters=iters,
        spec=spec,
        seed=seed_name,
        canonicalized=flipped,
    )
    if count == 1:
        sol.rho = locate_zero(sol)
    if config.check_second_variation:
        sol.second_variation_min = second_variation_min(sol)
    return sol


def locate_zero(sol: KinkSolution) -> float:
    """Linear-interpolation root between the unique sign-change node pair."""
    count, zero = sign_changes(sol.values, sol.grid.nodes)
    if count != 1:
        raise TopologyError(f"expected exactly one sign change, found {count}", sign_changes=count)
    return float(zero)


def second_variation_min(sol: KinkSolution) -> float:
    """Smallest eigenvalue of the (interior) Hessian of the discrete energy."""
    h = sol.grid.spacing
    w = 0.5 * (h[:-1] + h[1:])
    mux = np.asarray(sol.spec.mu(sol.grid.nodes[1:-1]))
    diag = sol.epsilon**2 * (1.0 / h[:-1] + 1.0 / h[1:]) + w * (3.0 * sol.values[1:-1] ** 2 - mux)
    off = -sol.epsilon**2 / h[1:-1]
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0), eigvals_only=True)
    return float(vals[0])


def solve_eta(spec: PotentialSpec, epsilon: float, a: float, config: SolverConfig | None = None, match: KinkSolution | None = None) -> EtaSolution:
    """Negative half-line solution on [-L, 0].

    Left boundary takes the outer algebraic root at -L (zero when a = 0);
    the right boundary imposes a one-sided second-order Neumann condition
    eta'(0) = 0.  Seeded at -sqrt(mu+) and continued down the eps ladder.
    The solution must stay negative at interior nodes; for a = 0 the far
    tail underflows toward zero, so the sign check there uses a tolerance.

    Pass ``match`` to finish on the left half of that kink's grid: sharing
    nodes lets the discretization errors of the two solves cancel in the
    quotient v/eta, which otherwise drowns the structural bound w < 1 in
    O(h^2) noise where eta is small.
    """
    config = config or SolverConfig()
    if a < 0.0:
        raise PreconditionError("a must be nonnegative", a=a)
    if epsilon <= 0.0:
        raise PreconditionError("epsilon must be positive", epsilon=epsilon)
    spec.require_valid()
    L = config.L if config.L is not None else spec.xi + 1.0
    rungs = [e for e in config.continuation_eps if e > epsilon * (1.0 + 1e-12)] + [epsilon]
    v = None
    prev_grid = None
    for eps_k in rungs:
        # reuse the left half of the full-domain grid so that eta and the
        # kink share nodes on [-L, 0]; their discretization errors then
        # cancel in the quotient diagnostic instead of polluting it
        full = _make_grid(spec, L, eps_k, config)
        mid = int(np.argmin(np.abs(full.nodes)))
        grid = Grid1D.from_nodes(full.nodes[: mid + 1])
        x = grid.nodes
        if v is None:
            v = -np.sqrt(np.clip(np.asarray(spec.mu(x)), 0.0, None))
        else:
            v = CubicSpline(prev_grid.nodes, v)(x)
        bc_left = outer_root(spec, eps_k, a, -L)
        disc = _EtaDiscretization(grid, spec, eps_k, a, bc_left)
        try:
            v, iters, rn = disc.newton(v, config.tol, config.max_iters, config.damping_min)
        except _NewtonFailure as exc:
            raise NonconvergenceError(
                "eta solve failed", eps=eps_k, reason=exc.reason, residual=exc.residual
            ) from None
        prev_grid = grid
    if match is not None:
        mid = int(np.argmin(np.abs(match.grid.nodes)))
        grid = Grid1D.from_nodes(match.grid.nodes[: mid + 1])
        v = CubicSpline(prev_grid.nodes, v)(grid.nodes)
        disc = _EtaDiscretization(grid, spec, epsilon, a, outer_root(spec, epsilon, a, grid.left))
        try:
            v, iters, rn = disc.newton(v, config.tol, config.max_iters, config.damping_min)
        except _NewtonFailure as exc:
            raise NonconvergenceError(
                "eta solve failed on the matched grid", reason=exc.reason, residual=exc.residual
            ) from None
    interior = v[1:]
    bad = interior >= 0.0 if a > 0.0 else interior > 1e-8 * float(np.max(np.abs(v)))
    if np.any(bad):
        i = int(np.argmax(interior))
        raise TopologyError(
            "eta is not negative at an interior node", x=float(grid.nodes[1 + i]), value=float(interior[i])
        )
    return EtaSolution(epsilon=epsilon, a=a, grid=grid, values=v, residual_inf=rn, newton_iters=iters, spec=spec)


class _EtaDiscretization(_Discretization):
    """Half-line problem: Dirichlet at -L, one-sided Neumann row at 0."""

    def __init__(self, grid, spec, epsilon, a, bc_left):
        super().__init__(grid, spec, epsilon, a)
        self.bc_left = bc_left
        x = grid.nodes
        xa, xb, xc = x[-3], x[-2], x[-1]
        self.d_a = (xc - xb) / ((xa - xb) * (xa - xc))
        self.d_b = (xc - xa) / ((xb - xa) * (xb - xc))
        self.d_c = (2.0 * xc - xa - xb) / ((xc - xa) * (xc - xb))

    def residual_eta(self, v):
        r = self.residual(v, self.bc_left, v[-1])  # placeholder last row, replaced below
        r[-1] = self.d_a * v[-3] + self.d_b * v[-2] + self.d_c * v[-1]
        return r

    def newton(self, v0, tol, max_iters, damping_min):
        v = np.array(v0, dtype=float)
        v[0] = self.bc_left
        for it in range(max_iters):
            r = self.residual_eta(v)
            rn = float(np.max(np.abs(r)))
            if not math.isfinite(rn):
                raise _NewtonFailure("non-finite residual", rn)
            if rn <= tol:
                return v, it, rn
            # layout: ab[u + i - j, j] = A[i, j] with (l, u) = (2, 1)
            ab = np.zeros((4, len(v)))
            ab[1, 0] = 1.0                                  # Dirichlet row 0
            ab[0, 2:] = self.eps**2 * self.cp               # A[i, i+1]
            ab[2, :-2] = self.eps**2 * self.cm              # A[i, i-1]
            ab[1, 1:-1] = -self.eps**2 * (self.cm + self.cp) + self.mux[1:-1] - 3.0 * v[1:-1] ** 2
            # Neumann row couples the last three nodes
            ab[3, -3] = self.d_a
            ab[2, -2] = self.d_b
            ab[1, -1] = self.d_c
            d = solve_banded((2, 1), ab, -r)
            t = 1.0
            accepted = False
            while t >= damping_min:
                vt = v + t * d
                rt = self.residual_eta(vt)
                if np.max(np.abs(rt)) < (1.0 - 1e-4 * t) * rn:
                    v, accepted = vt, True
                    break
                t /= 2.0
            if not accepted:
                raise _NewtonFailure("line search stalled", rn)
        r = self.residual_eta(v)
        rn = float(np.max(np.abs(r)))
        if rn <= tol:
            return v, max_iters, rn
        raise _NewtonFailure("iteration limit", rn)
