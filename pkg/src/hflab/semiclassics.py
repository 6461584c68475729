"""Semiclassical structure diagnostics: position/momentum commutators, their
trace norms and diagonal densities, the discrete maximal function, and the
window-commutator trace bound audit.

The position operator has no canonical torus analogue, so two conventions are
exposed: plain coordinate multiplication (for states supported in the central
half of the box) and the periodic phase exp(2 pi i x / L) with the commutator
rescaled by L / (2 pi) (for delocalized states).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hflab.lattice import (
    DenseOperator,
    Field,
    absolute_value,
    operator_norms,
    spectral_multiplier_operator,
)

PLAIN = "plain"
PERIODIC = "periodic"


def min_holder_p(alpha: float, delta: float) -> float:
    """Smallest admissible Lp index for the commutator-density budget."""
    denom = 3.0 - 2.0 * alpha - 6.0 * delta
    if denom <= 0:
        raise ValueError("no admissible p: need 3 - 2*alpha - 6*delta > 0")
    return 6.0 / denom


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Exponent block for the commutator diagnostics.

    delta in (0, 1/2); lp_exponent is the Lp index of the density-norm budget
    (conjugate q is derived).  `admissible_for` checks the Hoelder constraint
    p > 6 / (3 - 2*alpha - 6*delta) for a given interaction exponent.
    """

    delta: float = 0.1
    lp_exponent: float = 6.0
    position_convention: str = PLAIN
    window_radii: tuple = ()
    window_centers: tuple = ()

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta}")
        if self.lp_exponent <= 1.0:
            raise ValueError("lp_exponent must exceed 1")
        if self.position_convention not in (PLAIN, PERIODIC):
            raise ValueError("position convention must be 'plain' or 'periodic'")

    @property
    def q_exponent(self) -> float:
        return self.lp_exponent / (self.lp_exponent - 1.0)

    def admissible_for(self, alpha: float) -> bool:
        try:
            return self.lp_exponent > min_holder_p(alpha, self.delta)
        except ValueError:
            return False


def commutator_position(omega: DenseOperator, axis: int,
                        convention: str = PLAIN) -> DenseOperator:
    """[X_axis, omega] with X the chosen coordinate convention.

    periodic: (L / 2 pi) * [exp(2 pi i x / L), omega], which reduces to the
    plain commutator for states far from the wrap-around seam.
    """
    g = omega.grid
    coords = g.coordinate_mesh(axis).reshape(-1)
    if convention == PLAIN:
        x = coords
        scale = 1.0
    elif convention == PERIODIC:
        x = np.exp(2j * np.pi * coords / g.length)
        scale = g.length / (2.0 * np.pi)
    else:
        raise ValueError("convention must be 'plain' or 'periodic'")
    mat = x[:, None] * omega.matrix - omega.matrix * x[None, :]
    return DenseOperator(g, scale * mat)


def commutator_momentum(omega: DenseOperator, axis: int, epsilon: float) -> DenseOperator:
    """[-i eps d/dx_axis, omega] via the spectral derivative."""
    g = omega.grid
    mult = epsilon * g.momentum_mesh()[axis]
    p_op = spectral_multiplier_operator(g, mult)
    return DenseOperator(g, p_op.matrix @ omega.matrix - omega.matrix @ p_op.matrix)


def diagonal_density(op: DenseOperator) -> Field:
    """Diagonal kernel of an operator as a field: rho(z) = A(z;z) = diag / h^d."""
    g = op.grid
    vals = np.real(np.diag(op.matrix)) / g.cell_volume
    return Field(g, vals.reshape(g.shape).astype(complex))


def field_lp_norm(f: Field, p: float) -> float:
    vals = np.abs(f.values)
    if np.isinf(p):
        return float(np.max(vals))
    return float((f.grid.cell_volume * np.sum(vals**p)) ** (1.0 / p))


def _commutator_trace_norm(diag_vals: np.ndarray, omega: np.ndarray) -> float:
    """tr|[diag(v), omega]| for real v and Hermitian omega (anti-Hermitian fast path)."""
    comm = diag_vals[:, None] * omega - omega * diag_vals[None, :]
    herm = 1j * comm
    herm = 0.5 * (herm + herm.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(herm))))


def _periodic_box_sum(a: np.ndarray, radius: int, axis: int) -> np.ndarray:
    """Centered periodic window sum of width 2*radius + 1 along one axis."""
    if radius == 0:
        return a
    m = a.shape[axis]
    tiled = np.concatenate([a, a, a], axis=axis)
    csum = np.cumsum(tiled, axis=axis)
    zero = np.zeros_like(np.take(csum, [0], axis=axis))
    csum = np.concatenate([zero, csum], axis=axis)
    idx = np.arange(m) + m
    hi = np.take(csum, idx + radius + 1, axis=axis)
    lo = np.take(csum, idx - radius, axis=axis)
    return hi - lo


def maximal_function(rho: Field) -> Field:
    """Discrete maximal function over centered periodic cubes of every admissible radius.

    rho*(z) = max over window radius w of the cube average; dominates rho
    pointwise (w = 0 gives rho back) and is monotone in rho.
    """
    vals = np.real(rho.values)
    if np.min(vals) < -1e-12:
        raise ValueError("maximal function requires a nonnegative density")
    vals = np.maximum(vals, 0.0)
    g = rho.grid
    best = vals.copy()
    for w in range(1, (g.m - 1) // 2 + 1):
        avg = vals
        for axis in range(g.dim):
            avg = _periodic_box_sum(avg, w, axis)
        avg = avg / float((2 * w + 1) ** g.dim)
        best = np.maximum(best, avg)
    return Field(g, best.astype(complex))


@dataclass
class CommutatorReport:
    """Per-axis commutator diagnostics of a one-particle projection."""

    axis: int
    convention: str
    position_trace_norm: float
    momentum_trace_norm: float
    density_l1: float
    density_lp: float
    lp_exponent: float


def commutator_report(omega: DenseOperator, epsilon: float,
                      config: DiagnosticsConfig) -> list:
    rows = []
    for axis in range(omega.grid.dim):
        pos = commutator_position(omega, axis, config.position_convention)
        mom = commutator_momentum(omega, axis, epsilon)
        dens = diagonal_density(absolute_value(pos))
        rows.append(
            CommutatorReport(
                axis=axis,
                convention=config.position_convention,
                position_trace_norm=operator_norms(pos)["trace_norm"],
                momentum_trace_norm=operator_norms(mom)["trace_norm"],
                density_l1=field_lp_norm(dens, 1.0),
                density_lp=field_lp_norm(dens, config.lp_exponent),
                lp_exponent=config.lp_exponent,
            )
        )
    return rows


@dataclass
class WindowCommutatorRow:
    radius: float
    center: tuple
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else np.inf


@dataclass
class WindowCommutatorAudit:
    rows: list
    fitted_constant: float
    fitted_exponent: float
    predicted_exponent: float | None
    degenerate_rows: int


def window_commutator_audit(omega: DenseOperator, config: DiagnosticsConfig,
                            radii=None, centers=None) -> WindowCommutatorAudit:
    """Trace-norm bound audit for window commutators.

    For each sampled (r, z): LHS = tr|[chi_(r,z), omega]| against the constant-free
    budget RHS = r^(3/2 - 3 delta) * sum_i ||rho_i||_1^(1/6 + delta) *
    (rho_i*(z))^(5/6 - delta) built from the position-commutator densities.
    Reports the fitted constant max(LHS/RHS) and the least-squares r-exponent of
    the z-averaged LHS; the 3/2 - 3 delta prediction applies to 3d states only.
    """
    from hflab.potentials import gaussian_window

    g = omega.grid
    delta = config.delta
    if radii is None:
        radii = np.exp(np.linspace(np.log(g.h), np.log(g.length / 2.0), 7))
    if centers is None:
        per_axis = {1: 8, 2: 3, 3: 2}[g.dim]
        step = max(1, g.m // per_axis)
        pts = g.axis_coordinates()[step // 2 :: step]
        if g.dim == 1:
            centers = [(float(c),) for c in pts]
        else:
            import itertools

            centers = list(itertools.product((float(c) for c in pts), repeat=g.dim))
    dens_l1, dens_max = [], []
    for axis in range(g.dim):
        comm = commutator_position(omega, axis, config.position_convention)
        dens = diagonal_density(absolute_value(comm))
        dens_l1.append(field_lp_norm(dens, 1.0))
        dens_max.append(maximal_function(dens))

    def locate(center):
        return tuple(
            int(round(center[axis] / g.h)) % g.m for axis in range(g.dim)
        )

    rows = []
    degenerate = 0
    for r in radii:
        for z in centers:
            chi_vals = gaussian_window(g, np.array(z), float(r)).reshape(-1)
            lhs = _commutator_trace_norm(chi_vals, omega.matrix)
            site = locate(z)
            rhs = 0.0
            for axis in range(g.dim):
                mstar = float(np.real(dens_max[axis].values[site]))
                rhs += dens_l1[axis] ** (1.0 / 6.0 + delta) * mstar ** (5.0 / 6.0 - delta)
            rhs *= float(r) ** (1.5 - 3.0 * delta)
            if rhs <= 1e-12 and lhs > 1e-12:
                degenerate += 1
            rows.append(WindowCommutatorRow(float(r), tuple(z), lhs, rhs))

    finite = [row.ratio for row in rows if np.isfinite(row.ratio)]
    fitted_c = float(np.max(finite)) if finite else np.inf
    radii = np.asarray(radii, dtype=float)
    means = []
    for r in radii:
        vals = [row.lhs for row in rows if row.radius == r]
        means.append(np.mean(vals))
    means = np.asarray(means)
    keep = means > 1e-14
    if np.count_nonzero(keep) >= 2:
        slope = np.polyfit(np.log(radii[keep]), np.log(means[keep]), 1)[0]
    else:
        slope = np.nan
    predicted = 1.5 - 3.0 * delta if g.dim == 3 else None
    return WindowCommutatorAudit(
        rows=rows,
        fitted_constant=fitted_c,
        fitted_exponent=float(slope),
        predicted_exponent=predicted,
        degenerate_rows=degenerate,
    )


def window_audit_to_csv(audit: WindowCommutatorAudit, path) -> None:
    with open(path, "w") as fh:
        fh.write("r,z,lhs,rhs,ratio\n")
        for row in audit.rows:
            z = ";".join(f"{c:.17g}" for c in row.center)
            fh.write(f"{row.radius:.17g},{z},{row.lhs:.17g},{row.rhs:.17g},{row.ratio:.17g}\n")


@dataclass
class DensityBudgetRow:
    """One time sample of the commutator-density budget, per axis."""

    time: float
    axis: int
    norm_l1: float
    norm_lp: float
    over_n_eps: float


def commutator_density_series(snapshots, n_particles: int, epsilon: float,
                              config: DiagnosticsConfig) -> dict:
    """Per-time budget sum_i (||rho_i||_1 + ||rho_i||_p) divided by N * eps.

    `snapshots` is an iterable of (time, DenseOperator) pairs of dense
    projections sampled along a trajectory.  The verdict is the sup over the
    samples; whether it stays bounded is measured, not assumed.
    """
    rows = []
    totals = []
    for t, omega in snapshots:
        total = 0.0
        for axis in range(omega.grid.dim):
            comm = commutator_position(omega, axis, config.position_convention)
            dens = diagonal_density(absolute_value(comm))
            l1 = field_lp_norm(dens, 1.0)
            lp = field_lp_norm(dens, config.lp_exponent)
            total += l1 + lp
            rows.append(
                DensityBudgetRow(
                    time=float(t),
                    axis=axis,
                    norm_l1=l1,
                    norm_lp=lp,
                    over_n_eps=(l1 + lp) / (n_particles * epsilon),
                )
            )
        totals.append(total / (n_particles * epsilon))
    return {
        "rows": rows,
        "sup_over_n_eps": float(np.max(totals)) if totals else np.nan,
        "series": np.asarray(totals),
    }


def density_series_to_csv(result: dict, fitted_c: float, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,axis,norm_L1,norm_Lp,over_N_eps,fitted_C\n")
        for row in result["rows"]:
            fh.write(
                f"{row.time:.17g},{row.axis},{row.norm_l1:.17g},"
                f"{row.norm_lp:.17g},{row.over_n_eps:.17g},{fitted_c:.17g}\n"
            )
