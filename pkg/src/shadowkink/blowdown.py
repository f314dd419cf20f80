"""Corner blow-down comparisons, zero-location scaling, and layer diagnostics.

Near the left edge -xi of the well the minimizer obeys the rescaling

    v(x) ≈ sqrt(2) (mu'(-xi) eps)^(1/3) * ( -Y(s) ),
    x = -xi - eps^(2/3) s / mu'(-xi)^(1/3),

where Y solves the Painlevé-II profile equation at alpha = a f(-xi) /
(sqrt(2) mu'(-xi)).  The routines here rescale computed kinks into the s
variable, compare them against both profile branches, predict the kink's
zero from the profile's zero, fit the measured zero offsets |rho + xi|
against eps^(2/3), and run the division diagnostic w = v / eta.

Note on signs: the measured zero may sit on either side of -xi (its side is
determined by the sign of the profile's zero_s), so offsets are reported as
magnitudes with the signed value kept alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import MissingZeroError, PreconditionError, WindowError
from .kink import EtaSolution, KinkSolution
from .model import alpha_of
from .painleve import PainleveSolution


@dataclass(frozen=True)
class BlowupReport:
    epsilon: float
    a: float
    alpha: float
    s_window: tuple
    sup_error: float
    matched_branch: str
    sup_error_plus: float
    sup_error_minus: float | None

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "a": self.a,
            "alpha": self.alpha,
            "s_window": list(self.s_window),
            "sup_error": self.sup_error,
            "matched_branch": self.matched_branch,
            "sup_error_plus": self.sup_error_plus,
            "sup_error_minus": self.sup_error_minus,
        }


@dataclass(frozen=True)
class ScalingReport:
    eps_list: tuple
    rho_list: tuple
    offsets: tuple                  # |rho + xi| per run
    signed_offsets: tuple
    fitted_exponent: float
    fit_r2: float
    ratio_max: float                # max offsets / eps^(2/3)
    ratio_min: float
    predicted_offsets: tuple | None
    dropped_largest: bool
    excluded_eps: tuple

    def to_json(self) -> dict:
        return {
            "eps_list": list(self.eps_list),
            "rho_list": list(self.rho_list),
            "offsets": list(self.offsets),
            "signed_offsets": list(self.signed_offsets),
            "fitted_exponent": self.fitted_exponent,
            "fit_r2": self.fit_r2,
            "ratio_max": self.ratio_max,
            "ratio_min": self.ratio_min,
            "predicted_offsets": list(self.predicted_offsets) if self.predicted_offsets else None,
            "dropped_largest": self.dropped_largest,
            "excluded_eps": list(self.excluded_eps),
        }


@dataclass(frozen=True)
class OuterReport:
    window: tuple
    max_error: float
    order_ratio: float

    def to_json(self) -> dict:
        return {"window": list(self.window), "max_error": self.max_error, "order_ratio": self.order_ratio}


@dataclass(frozen=True)
class DivisionReport:
    x: np.ndarray
    w: np.ndarray
    max_w_left: float
    layer_width_measured: float | None
    layer_width_predicted: float
    width_ratio: float | None
    plateau_plus: tuple | None      # (min w, max w) on the +1 plateau window
    plateau_minus: tuple | None
    plateau_plus_window: tuple | None
    plateau_plus_window_kind: str
    plateau_minus_window: tuple | None
    degenerate: bool = False        # v == eta boundary case

    def to_json(self) -> dict:
        return {
            "max_w_left": self.max_w_left,
            "layer_width_measured": self.layer_width_measured,
            "layer_width_predicted": self.layer_width_predicted,
            "width_ratio": self.width_ratio,
            "plateau_plus": list(self.plateau_plus) if self.plateau_plus else None,
            "plateau_minus": list(self.plateau_minus) if self.plateau_minus else None,
            "plateau_plus_window": list(self.plateau_plus_window) if self.plateau_plus_window else None,
            "plateau_plus_window_kind": self.plateau_plus_window_kind,
            "plateau_minus_window": list(self.plateau_minus_window) if self.plateau_minus_window else None,
            "degenerate": self.degenerate,
            "n_points": int(len(self.x)),
        }


def _scales(spec, epsilon):
    slope = spec.mu_prime_neg_xi
    lam = epsilon ** (2.0 / 3.0) / slope ** (1.0 / 3.0)
    amp = 1.0 / (math.sqrt(2.0) * (slope * epsilon) ** (1.0 / 3.0))
    return lam, amp


def rescale_blowup(kink: KinkSolution, spec, s_window, num: int = 801):
    """Sample the corner rescaling of a kink on ``s_window``.

    Returns (s, rescaled) with the kink cubic-interpolated between nodes:
    linear interpolation would inject O(h^2 eps^(-1/3)) noise into the
    magnified profile.
    """
    lam, amp = _scales(spec, kink.epsilon)
    s = np.linspace(float(s_window[0]), float(s_window[1]), num)
    x = -spec.xi - lam * s
    if x.min() < kink.grid.left - 1e-12 or x.max() > kink.grid.right + 1e-12:
        raise WindowError(
            "rescaled window escapes the computational domain",
            x_range=[float(x.min()), float(x.max())],
            domain=[kink.grid.left, kink.grid.right],
        )
    v = CubicSpline(kink.grid.nodes, kink.values)(x)
    return s, amp * v


def compare_blowup(kink: KinkSolution, pii_plus: PainleveSolution, pii_minus: PainleveSolution | None, s_window, num: int = 801) -> BlowupReport:
    """Sup-norm distance of the rescaled kink to -Y for both branches.

    The sign-changing branch is guaranteed only for alpha near zero; pass
    ``pii_minus=None`` when it is unavailable and the comparison degenerates
    to the positive branch.
    """
    spec = kink.spec
    if pii_minus is not None and abs(pii_plus.alpha - pii_minus.alpha) > 1e-12:
        raise PreconditionError(
            "profile branches are at different alpha", plus=pii_plus.alpha, minus=pii_minus.alpha
        )
    alpha = alpha_of(spec, kink.a).alpha
    if abs(alpha - pii_plus.alpha) > 1e-9:
        raise PreconditionError(
            "profiles are not at alpha(a)", expected=alpha, got=pii_plus.alpha
        )
    s, resc = rescale_blowup(kink, spec, s_window, num)
    err_p = float(np.max(np.abs(resc + CubicSpline(pii_plus.grid.nodes, pii_plus.values)(s))))
    err_m = None
    if pii_minus is not None:
        err_m = float(np.max(np.abs(resc + CubicSpline(pii_minus.grid.nodes, pii_minus.values)(s))))
    matched = "plus" if err_m is None or err_p <= err_m else "minus"
    return BlowupReport(
        epsilon=kink.epsilon,
        a=kink.a,
        alpha=alpha,
        s_window=(float(s_window[0]), float(s_window[1])),
        sup_error=err_p if matched == "plus" else err_m,
        matched_branch=matched,
        sup_error_plus=err_p,
        sup_error_minus=err_m,
    )


def predict_zero(spec, a: float | None, epsilon: float, pii_minus: PainleveSolution) -> float:
    """Kink zero predicted from the profile zero:
    rho = -xi - eps^(2/3) zero_s / mu'(-xi)^(1/3).

    When ``a`` is given, the profile must sit at alpha(a).
    """
    if pii_minus.sign_changes != 1 or pii_minus.zero_s is None:
        raise MissingZeroError(
            "profile must have exactly one recorded zero", sign_changes=pii_minus.sign_changes
        )
    if a is not None:
        expected = alpha_of(spec, a).alpha
        if abs(expected - pii_minus.alpha) > 1e-9:
            raise PreconditionError(
                "profile is not at alpha(a)", expected=expected, got=pii_minus.alpha
            )
    lam, _ = _scales(spec, epsilon)
    return float(-spec.xi - lam * pii_minus.zero_s)


def fit_zero_scaling(runs, spec, pii_minus: PainleveSolution | None = None, drop_largest: bool = True) -> ScalingReport:
    """Least-squares exponent of log |rho + xi| against log eps.

    Runs with a vanishing offset are excluded with a warning entry (the
    scaling statement bounds |rho + xi|, which can in principle be tiny).
    When five or more points survive, the largest eps is dropped if doing so
    improves R^2 by more than 0.05 (the coarsest run may sit outside the
    asymptotic regime); the report records that decision.
    """
    runs = sorted(((float(e), float(r)) for e, r in runs), reverse=True)
    if len({e for e, _ in runs}) < 4:
        raise PreconditionError("need at least 4 runs at distinct eps", n=len(runs))
    eps = np.array([e for e, _ in runs])
    rho = np.array([r for _, r in runs])
    signed = rho + spec.xi
    offs = np.abs(signed)
    keep = offs > 0.0
    excluded = tuple(float(e) for e in eps[~keep])
    if np.count_nonzero(keep) < 4:
        raise PreconditionError("fewer than 4 usable offsets after exclusions", excluded=list(excluded))
    eps_k, offs_k = eps[keep], offs[keep]

    def fit(e, o):
        slope, intercept = np.polyfit(np.log(e), np.log(o), 1)
        pred = slope * np.log(e) + intercept
        ss_res = float(np.sum((np.log(o) - pred) ** 2))
        ss_tot = float(np.sum((np.log(o) - np.mean(np.log(o))) ** 2))
        r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
        return float(slope), float(r2)

    slope, r2 = fit(eps_k, offs_k)
    dropped = False
    if drop_largest and len(eps_k) >= 5:
        slope2, r22 = fit(eps_k[1:], offs_k[1:])
        if r22 > r2 + 0.05:
            slope, r2, dropped = slope2, r22, True
            eps_k, offs_k = eps_k[1:], offs_k[1:]

    ratios = offs_k / eps_k ** (2.0 / 3.0)
    predicted = None
    if pii_minus is not None:
        predicted = tuple(abs(predict_zero(spec, None, e, pii_minus) + spec.xi) for e in eps)
    return ScalingReport(
        eps_list=tuple(float(e) for e in eps),
        rho_list=tuple(float(r) for r in rho),
        offsets=tuple(float(o) for o in offs),
        signed_offsets=tuple(float(sv) for sv in signed),
        fitted_exponent=slope,
        fit_r2=r2,
        ratio_max=float(np.max(ratios)),
        ratio_min=float(np.min(ratios)),
        predicted_offsets=predicted,
        dropped_largest=dropped,
        excluded_eps=excluded,
    )


def tanh_layer_check(kink: KinkSolution, spec=None) -> float:
    """Sup deviation of the interior layer from the squeezed tanh template

        sqrt(mu(rho)) * tanh( sqrt(mu(rho)/2) (x - rho) / eps )

    over |x - rho| <= 6 eps.  Only meaningful above the upper threshold,
    where the sign change sits in the bulk; below it the transition is a
    corner profile instead and the call is rejected.
    """
    spec = spec or kink.spec
    thr = spec.thresholds()
    if kink.a <= thr.a_star_upper:
        raise PreconditionError(
            "tanh template applies only above the upper threshold",
            a=kink.a,
            a_star_upper=thr.a_star_upper,
        )
    rho = kink.rho
    x = kink.grid.nodes
    mask = np.abs(x - rho) <= 6.0 * kink.epsilon
    if np.count_nonzero(mask) < 8:
        raise WindowError("layer window contains too few grid nodes", nodes=int(np.count_nonzero(mask)))
    amp = math.sqrt(float(spec.mu(rho)))
    template = amp * np.tanh(math.sqrt(float(spec.mu(rho)) / 2.0) * (x[mask] - rho) / kink.epsilon)
    return float(np.max(np.abs(kink.values[mask] - template)))


def division_diagnostic(kink: KinkSolution, eta: EtaSolution, delta: float = 0.3, boundary_margin: float = 0.25) -> DivisionReport:
    """Quotient diagnostic w = v / eta on the half line.

    Checks the structural bound w < 1 left of the kink zero, measures the
    width of the w-transition (between the w = +0.9 and w = -0.9 crossings),
    and reports the plateau ranges.  The predicted width uses
    eps / sqrt(|rho + xi|); the measured zero can sit slightly outside the
    edge, so the magnitude is the meaningful scale.  The +1 plateau window
    [-xi + 5 eps, rho - 5 width] from the matched-layer picture is empty at
    moderate eps; in that case the check falls back to the outer window left
    of the corner.
    """
    spec = kink.spec
    if abs(kink.epsilon - eta.epsilon) > 1e-14 or abs(kink.a - eta.a) > 1e-14:
        raise PreconditionError(
            "kink and eta must share (eps, a)",
            kink=[kink.epsilon, kink.a],
            eta=[eta.epsilon, eta.a],
        )
    thr = spec.thresholds()
    if not (0.0 < kink.a < thr.a_star_lower):
        raise PreconditionError(
            "division diagnostic applies below the lower threshold",
            a=kink.a,
            a_star_lower=thr.a_star_lower,
        )
    x = eta.grid.nodes
    ev = eta.values
    mask = np.abs(ev) >= 1e-8
    dropped = x[~mask]
    if dropped.size and np.any(dropped > eta.grid.left + 0.25):
        raise PreconditionError(
            "eta vanishes inside the window", x=float(dropped[dropped > eta.grid.left + 0.25][0])
        )
    x = x[mask]
    ev = ev[mask]
    idx = np.searchsorted(kink.grid.nodes, x)
    if np.all(idx < kink.grid.n) and np.array_equal(kink.grid.nodes[idx], x):
        v = kink.values[idx]          # shared nodes: no interpolation noise
    else:
        v = CubicSpline(kink.grid.nodes, kink.values)(x)
    w = v / ev
    rho = kink.rho

    if np.array_equal(kink.values, eta.values) and kink.grid.n == eta.grid.n:
        return DivisionReport(
            x=x, w=w, max_w_left=float(np.max(w)), layer_width_measured=None,
            layer_width_predicted=float("nan"), width_ratio=None, plateau_plus=None,
            plateau_minus=None, plateau_plus_window=None, plateau_plus_window_kind="degenerate",
            plateau_minus_window=None, degenerate=True,
        )

    left = x < rho
    max_w_left = float(np.max(w[left])) if np.any(left) else float("nan")

    offset = abs(rho + spec.xi)
    eps_t = kink.epsilon / math.sqrt(offset) if offset > 0 else float("nan")

    def crossing(level):
        hits = np.nonzero((w[:-1] - level) * (w[1:] - level) <= 0.0)[0]
        if hits.size == 0:
            return None
        i = hits[int(np.argmin(np.abs(0.5 * (x[hits] + x[hits + 1]) - rho)))]
        return float(x[i] + (level - w[i]) * (x[i + 1] - x[i]) / (w[i + 1] - w[i]))

    x_hi = crossing(0.9)
    x_lo = crossing(-0.9)
    measured = None
    ratio = None
    if x_hi is not None and x_lo is not None and x_lo > x_hi:
        measured = float(x_lo - x_hi)
        if math.isfinite(eps_t) and eps_t > 0:
            ratio = measured / eps_t

    def band(lo, hi):
        m = (x >= lo) & (x <= hi)
        if np.count_nonzero(m) < 2:
            return None
        return (float(np.min(w[m])), float(np.max(w[m])))

    spec_lo = -spec.xi + 5.0 * kink.epsilon
    spec_hi = rho - 5.0 * eps_t if math.isfinite(eps_t) else -math.inf
    if spec_hi > spec_lo:
        plus_window = (spec_lo, spec_hi)
        plus_kind = "matched-layer"
    else:
        corner = max(eps_t if math.isfinite(eps_t) else 0.0, kink.epsilon ** (2.0 / 3.0))
        plus_window = (float(x[0] + boundary_margin), min(rho, -spec.xi) - 5.0 * corner)
        plus_kind = "outer-fallback"
    plateau_plus = band(*plus_window) if plus_window[1] > plus_window[0] else None
    minus_window = (rho + 5.0 * eps_t, -delta) if math.isfinite(eps_t) else None
    plateau_minus = band(*minus_window) if minus_window and minus_window[1] > minus_window[0] else None

    return DivisionReport(
        x=x,
        w=w,
        max_w_left=max_w_left,
        layer_width_measured=measured,
        layer_width_predicted=float(eps_t),
        width_ratio=ratio,
        plateau_plus=plateau_plus,
        plateau_minus=plateau_minus,
        plateau_plus_window=tuple(float(b) for b in plus_window),
        plateau_plus_window_kind=plus_kind,
        plateau_minus_window=tuple(float(b) for b in minus_window) if minus_window else None,
        degenerate=False,
    )


def outer_deviation(kink: KinkSolution, window) -> tuple:
    """Max |v + eps a f/mu| over grid nodes in ``window`` (outside the well)."""
    x = kink.grid.nodes
    m = (x >= float(window[0])) & (x <= float(window[1]))
    if not np.any(m):
        raise WindowError("outer window contains no grid nodes", window=list(window))
    mu = np.asarray(kink.spec.mu(x[m]))
    if np.any(mu >= 0.0):
        raise WindowError("outer window must stay outside the well", window=list(window))
    dev = np.abs(kink.values[m] + kink.epsilon * kink.a * np.asarray(kink.spec.f(x[m])) / mu)
    i = int(np.argmax(dev))
    return float(dev[i]), float(x[m][i])


def outer_order_report(kink_coarse: KinkSolution, kink_fine: KinkSolution, window=None) -> OuterReport:
    """Error-halving ratio of the leading outer approximation.

    ``window`` defaults to [grid.left + 0.5, -xi - 0.3]; the left margin
    keeps the Dirichlet truncation artifact (a Theta(eps) mismatch pinned at
    the boundary node) out of the measurement.
    """
    if kink_coarse.epsilon <= kink_fine.epsilon:
        kink_coarse, kink_fine = kink_fine, kink_coarse
    spec = kink_fine.spec
    if window is None:
        window = (kink_fine.grid.left + 0.5, -spec.xi - 0.3)
    err_c, _ = outer_deviation(kink_coarse, window)
    err_f, _ = outer_deviation(kink_fine, window)
    return OuterReport(
        window=(float(window[0]), float(window[1])),
        max_error=err_f,
        order_ratio=float(err_c / err_f),
    )
