"""Inverse-power-law potential |x|^(-alpha) on the torus and its Gaussian-window
(Fefferman-de la Llave) representation.

The representation writes s^(-alpha) as a constant times the integral over
window radius r and center z of exp(-|x-z|^2/r^2) exp(-|y-z|^2/r^2), with the
radial measure dr / r^(d+1+alpha).  The radial integral is realized by a
log-spaced quadrature whose last node also carries the exact power-law tail
mass beyond r_max (the Gaussian factor is flat out there, so truncating instead
would lose O((s/r_max)^alpha) of the value).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from hflab.lattice import Field, Grid, fft, ifft


def fdl_constant(alpha: float, dim: int) -> float:
    """Normalization making the Gaussian-window representation of s^(-alpha) exact.

    C = [ (pi/2)^(d/2) * 2^(alpha/2 - 1) * Gamma(alpha/2) ]^(-1); equals 4/pi^2
    at alpha = 1 in three dimensions.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    return 1.0 / ((np.pi / 2.0) ** (dim / 2.0) * 2.0 ** (alpha / 2.0 - 1.0) * gamma(alpha / 2.0))


def z_integral(x: np.ndarray, y: np.ndarray, r: float) -> float:
    """Center integral of a window pair: (pi r^2/2)^(d/2) exp(-|x-y|^2 / (2 r^2))."""
    if r <= 0:
        raise ValueError("window radius must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError("positions must have matching dimensions")
    d = x.size
    s2 = float(np.sum((x - y) ** 2))
    return (np.pi * r**2 / 2.0) ** (d / 2.0) * np.exp(-s2 / (2.0 * r**2))


@dataclass(frozen=True)
class RadialQuadrature:
    """Log-spaced radial nodes with dr-weights for the window-scale integral.

    Trapezoid in log r; the last weight additionally carries r_max/alpha, the
    exact mass of the power-law measure on [r_max, inf) relative to the
    integrand value at r_max.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    cutoff: float | None = None

    def __post_init__(self):
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if self.cutoff is not None and not (
            self.nodes[0] < self.cutoff <= self.nodes[-1]
        ):
            raise ValueError("cutoff must lie inside the node range")

    def export_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r_node,weight\n")
            for r, w in zip(self.nodes, self.weights):
                fh.write(f"{r:.17g},{w:.17g}\n")


def radial_quadrature(
    alpha: float, r_min: float = 1e-3, r_max: float = 1e3, n_nodes: int = 400
) -> RadialQuadrature:
    if not (0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    logs = np.linspace(np.log(r_min), np.log(r_max), n_nodes)
    nodes = np.exp(logs)
    step = logs[1] - logs[0]
    weights = np.full(n_nodes, step)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    weights = weights * nodes
    weights[-1] += r_max / alpha
    return RadialQuadrature(nodes=nodes, weights=weights, alpha=alpha)


def fdl_reconstruct(s: float, alpha: float, quad: RadialQuadrature, dim: int = 3) -> float:
    """Quadrature value of the window representation at separation s (target s^-alpha)."""
    if s <= 0:
        raise ValueError("separation must be positive")
    if abs(quad.alpha - alpha) > 1e-14:
        raise ValueError("quadrature was built for a different alpha")
    if quad.nodes[0] > s / 20.0 or quad.nodes[-1] < 20.0 * s:
        warnings.warn(
            f"quadrature range [{quad.nodes[0]:g}, {quad.nodes[-1]:g}] does not bracket "
            f"[{s / 20.0:g}, {20.0 * s:g}]; reconstruction accuracy is degraded",
            stacklevel=2,
        )
    r = quad.nodes
    integrand = (
        fdl_constant(alpha, dim)
        * r ** (-(dim + 1 + alpha))
        * (np.pi * r**2 / 2.0) ** (dim / 2.0)
        * np.exp(-(s**2) / (2.0 * r**2))
    )
    return float(np.sum(quad.weights * integrand))


def split_quadrature(quad: RadialQuadrature, epsilon: float, alpha: float) -> dict:
    """Split nodes at the optimized cutoff k = epsilon^(1/(3-alpha)).

    Near part holds r < k, far part r >= k; weights are untouched, so the two
    parts exactly repartition the unsplit rule.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    k = epsilon ** (1.0 / (3.0 - alpha))
    near = quad.nodes < k
    parts = {}
    for name, mask in (("near", near), ("far", ~near)):
        if not np.any(mask):
            parts[name] = None
            continue
        parts[name] = RadialQuadrature(
            nodes=quad.nodes[mask], weights=quad.weights[mask], alpha=quad.alpha
        )
    parts["cutoff"] = k
    return parts


@dataclass(frozen=True)
class PowerLawPotential:
    """Grid realization of |x|^(-alpha) with per-cell regularization.

    V(x) = min(|x|_per^(-alpha), h^(-alpha)): exact at every site with
    |x|_per >= h, clipped only where the singularity sits.
    """

    grid: Grid
    alpha: float
    values: np.ndarray
    regularization: str = "cell-clip"

    @property
    def on_site(self) -> float:
        return float(self.grid.h ** (-self.alpha))


def power_law_potential(grid: Grid, alpha: float) -> PowerLawPotential:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    dist = grid.min_image_distance()
    with np.errstate(divide="ignore"):
        raw = dist ** (-alpha)
    values = np.minimum(raw, grid.h ** (-alpha))
    return PowerLawPotential(grid=grid, alpha=alpha, values=values)


def gaussian_window(grid: Grid, center: np.ndarray, radius: float) -> np.ndarray:
    """Window exp(-|x-z|^2 / r^2) with minimum-image displacement from z."""
    if radius <= 0:
        raise ValueError("window radius must be positive")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size != grid.dim:
        raise ValueError("center must have one coordinate per grid axis")
    d2 = np.zeros(grid.shape)
    half = grid.length / 2.0
    for axis in range(grid.dim):
        coord = grid.coordinate_mesh(axis)
        delta = np.mod(coord - center[axis] + half, grid.length) - half
        d2 = d2 + delta**2
    return np.exp(-d2 / radius**2)


def convolve_potential(rho: Field, potential: PowerLawPotential) -> Field:
    """Periodic convolution (V * rho)(x) = h^d sum_y V(x-y) rho(y) via FFT."""
    if rho.grid != potential.grid:
        raise ValueError("density and potential live on different grids")
    imag_max = float(np.max(np.abs(rho.values.imag))) if rho.values.size else 0.0
    scale = max(1.0, float(np.max(np.abs(rho.values))))
    if imag_max > 1e-10 * scale:
        raise ValueError("density must be real within 1e-10 relative")
    g = rho.grid
    v_hat = fft(g, potential.values.astype(complex))
    out = ifft(g, v_hat * fft(g, rho.values)) * g.cell_volume
    return Field(g, out.real.astype(complex))
