"""One-dimensional graded grids.

Solutions of the forced bistable equation develop interior layers of width
O(eps) and corner layers of width O(eps^(2/3)) at the edges of the well, so
the grids used by the solvers refine smoothly inside bands around those
locations.  Node placement comes from integrating a smooth density function,
which keeps the spacing slowly varying (needed for second-order behaviour of
the centered difference stencils).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator


@dataclass(frozen=True)
class Grid1D:
    left: float
    right: float
    n: int
    nodes: np.ndarray
    spacing: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nodes[0] != self.left or self.nodes[-1] != self.right:
            raise ValueError("nodes must span [left, right] exactly")
        if np.any(self.spacing <= 0):
            raise ValueError("nodes must be strictly increasing")

    @classmethod
    def from_nodes(cls, nodes) -> "Grid1D":
        nodes = np.asarray(nodes, dtype=float)
        return cls(float(nodes[0]), float(nodes[-1]), len(nodes), nodes, np.diff(nodes))

    @classmethod
    def uniform(cls, left: float, right: float, n_nodes: int) -> "Grid1D":
        return cls.from_nodes(np.linspace(left, right, n_nodes))

    def max_spacing_within(self, center: float, dist: float) -> float:
        """Largest cell size among cells intersecting [center-dist, center+dist]."""
        lo, hi = center - dist, center + dist
        mask = (self.nodes[1:] > lo) & (self.nodes[:-1] < hi)
        if not np.any(mask):
            return 0.0
        return float(np.max(self.spacing[mask]))


def _band_density(x, h_base, bands):
    lam = np.full_like(x, 1.0 / h_base)
    for center, h_cap, halfwidth in bands:
        extra = max(0.0, 1.0 / h_cap - 1.0 / h_base)
        if extra > 0.0:
            lam += extra * np.exp(-(((x - center) / halfwidth) ** 4))
    return lam


def _integrate_nodes(left, right, h_base, bands):
    probes = [np.linspace(left, right, 4097)]
    for center, _h, w in bands:
        lo = max(left, center - 6.0 * w)
        hi = min(right, center + 6.0 * w)
        if hi > lo:
            probes.append(np.linspace(lo, hi, 2049))
    x = np.unique(np.concatenate(probes))
    lam = _band_density(x, h_base, bands)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (lam[1:] + lam[:-1]) * np.diff(x))])
    total = cum[-1]
    n_cells = max(8, int(np.ceil(total)))
    # monotone-cubic inversion keeps the node mapping C^1; piecewise-linear
    # inversion would put first-order kinks into the spacing and degrade the
    # second-order convergence of the difference stencils
    inverse = PchipInterpolator(cum, x)
    nodes = inverse(np.linspace(0.0, total, n_cells + 1))
    nodes[0], nodes[-1] = left, right
    return nodes


def graded(left: float, right: float, h_base: float, bands=(), refine: float = 1.0) -> Grid1D:
    """Graded grid from a density 1/h_base plus smooth bumps 1/h_cap over bands.

    ``bands`` is a sequence of (center, h_cap, halfwidth).  ``refine`` scales
    the whole density, so refine=2 halves every spacing while keeping the
    grading shape (used for convergence studies).
    """
    if right <= left:
        raise ValueError("right must exceed left")
    h_base = h_base / refine
    bands = [(c, h / refine, w) for c, h, w in bands]
    symmetric = abs(left + right) <= 1e-14 * max(1.0, abs(right))
    if symmetric:
        half_bands = [(abs(c), h, w) for c, h, w in bands]
        mirrored = all(
            any(abs(c + c2) <= 1e-14 or abs(c - c2) <= 1e-14 for c2, _h, _w in half_bands)
            for c, _h, _w in half_bands
        )
        if mirrored:
            # build one half and mirror so the node set is exactly symmetric
            half = _integrate_nodes(0.0, right, h_base, half_bands)
            nodes = np.concatenate([-half[:0:-1], half])
            return Grid1D.from_nodes(nodes)
    return Grid1D.from_nodes(_integrate_nodes(left, right, h_base, bands))


def layer_grid(
    left: float,
    right: float,
    eps: float,
    xi: float,
    base_cells: int = 400,
    centers=(0.0,),
    refine: float = 1.0,
) -> Grid1D:
    """Grid resolving O(eps) layers at ``centers`` and O(eps^(2/3)) corner
    layers at +-xi (those inside the domain).

    Caps: spacing <= eps/10 within ~6 eps of each declared center, and
    <= eps^(2/3)/10 within ~6 eps^(2/3) of the corners; base spacing
    (right-left)/base_cells elsewhere.
    """
    h_base = (right - left) / base_cells
    w_corner = eps ** (2.0 / 3.0)
    bands = []
    for c in centers:
        if left <= c <= right:
            bands.append((float(c), eps / 10.0, 6.0 * eps))
    for c in (-xi, xi):
        if left - 1e-12 <= c <= right + 1e-12:
            bands.append((float(c), w_corner / 10.0, 6.0 * w_corner))
    return graded(left, right, h_base, bands, refine=refine)
