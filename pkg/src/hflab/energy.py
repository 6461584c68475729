"""Kinetic-energy inequality chain audits on generated and propagated states.

Works with the trace-N density rho(x) = omega(x;x).  Constants are measured
and regression-tested, never compared to sharp continuum constants: the grid
and the torus change them.

Two printed-source discrepancies are resolved here in favor of internal
consistency (see the interpolation link): the pair-energy Lebesgue index is
6/(6-alpha) -- the unique index for which the double integral of
rho(x) rho(y) / |x-y|^alpha is controlled by a homogeneous norm square in 3d
and the one consistent with the interpolation exponents (12-5alpha)/6 and
5alpha/6 -- and the Young split of N^(1-5alpha/6) ||rho||^(5alpha/6) closes
with the alpha-independent pair ((2-alpha)/2 N, (alpha/2) N^(-2/3)
||rho||^(5/3)).  The 6/(5-alpha) norm is still recorded for reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hflab.hartree_fock import SlaterState, hf_energy
from hflab.lattice import DenseOperator, Field, ScaledParams
from hflab.potentials import PowerLawPotential
from hflab.semiclassics import field_lp_norm


def charge_density(state) -> Field:
    """rho(x) = omega(x;x): integral equals the particle number."""
    if isinstance(state, SlaterState):
        vals = np.sum(np.abs(state.orbitals) ** 2, axis=0)
        return Field(state.grid, vals.astype(complex))
    if isinstance(state, DenseOperator):
        g = state.grid
        vals = np.real(np.diag(state.matrix)) / g.cell_volume
        return Field(g, vals.reshape(g.shape).astype(complex))
    raise TypeError("expected a SlaterState or DenseOperator")


def kinetic_trace(state, epsilon_scaled: bool) -> float:
    """tr(-eps^2 Lap) omega when scaled, tr(-Lap) omega otherwise."""
    if isinstance(state, SlaterState):
        g = state.grid
        mult = g.momentum_squared()
        if epsilon_scaled:
            mult = state.params.epsilon**2 * mult
        axes = tuple(range(1, g.dim + 1))
        hat = np.fft.fftn(state.orbitals, axes=axes)
        return float(g.cell_volume * np.sum(mult[None, ...] * np.abs(hat) ** 2) / g.site_count)
    if isinstance(state, DenseOperator):
        g = state.grid
        mult = g.momentum_squared().reshape(-1)
        if epsilon_scaled:
            raise ValueError("dense input carries no scaling block; pass a SlaterState")
        # momentum diagonal of F omega F^-1
        a = np.fft.fftn(state.matrix.reshape(g.shape + g.shape), axes=tuple(range(g.dim)))
        b = np.fft.ifftn(a, axes=tuple(range(g.dim, 2 * g.dim)))
        diag = b.reshape(g.site_count, g.site_count).diagonal()
        return float(np.real(np.sum(mult * diag)))
    raise TypeError("expected a SlaterState or DenseOperator")


def pair_energy(rho: Field, potential: PowerLawPotential, n_particles: int) -> float:
    """(1/N) iint V(x-y) rho(x) rho(y) dx dy on the torus."""
    g = rho.grid
    v_hat = np.fft.fftn(potential.values)
    conv = np.fft.ifftn(v_hat * np.fft.fftn(rho.values.real)).real * g.cell_volume
    return float(g.cell_volume * np.sum(rho.values.real * conv) / n_particles)


def hls_index(alpha: float) -> float:
    """Pair-energy Lebesgue index 6/(6-alpha) (classic 6/5 at alpha = 1)."""
    return 6.0 / (6.0 - alpha)


@dataclass
class ChainLink:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9 * max(1.0, abs(self.rhs))


@dataclass
class EnergyReport:
    kinetic_scaled: float
    kinetic_plain: float
    rho_l1: float
    rho_53: float
    rho_pair_index: float
    rho_pair_index_printed: float
    pair: float
    lieb_thirring_ratio: float
    hls_ratio: float
    links: list

    @property
    def violations(self) -> list:
        return [link.name for link in self.links if not link.holds]


def lieb_thirring_check(state) -> dict:
    """||rho||_{5/3}^{5/3} against tr(-Lap) omega; returns the measured ratio."""
    rho = charge_density(state)
    lhs = field_lp_norm(rho, 5.0 / 3.0) ** (5.0 / 3.0)
    rhs = kinetic_trace(state, epsilon_scaled=False)
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else np.inf}


def hls_potential_check(state, potential: PowerLawPotential,
                        n_particles: int | None = None) -> dict:
    """Pair energy against the norm square at the 6/(6-alpha) index (3d audit)."""
    rho = charge_density(state)
    if rho.grid.dim != 3:
        raise ValueError("the pair-energy norm audit is a 3d statement")
    if n_particles is None:
        n_particles = int(round(field_lp_norm(rho, 1.0)))
    lhs = pair_energy(rho, potential, n_particles)
    q = hls_index(potential.alpha)
    nq = field_lp_norm(rho, q)
    nq_printed = field_lp_norm(rho, 6.0 / (5.0 - potential.alpha))
    rhs = nq**2 / n_particles
    return {
        "lhs": lhs,
        "norm_hls": nq,
        "norm_printed_variant": nq_printed,
        "ratio": lhs / rhs if rhs > 0 else np.inf,
    }


def interpolation_young_chain(state, potential: PowerLawPotential,
                              params: ScaledParams) -> list:
    """Every link of the pair-energy closure, evaluated on both sides.

    interpolation and the Young split are exact inequalities (Hoelder, AM-GM)
    and must hold with zero violations; the first and last links carry measured
    constants and are recorded via their ratios.
    """
    alpha = potential.alpha
    n = params.n_particles
    rho = charge_density(state)
    l1 = field_lp_norm(rho, 1.0)
    l53 = field_lp_norm(rho, 5.0 / 3.0)
    q = hls_index(alpha)
    lq = field_lp_norm(rho, q)
    links = [
        ChainLink(
            "interpolation",
            lq**2,
            l1 ** ((12.0 - 5.0 * alpha) / 6.0) * l53 ** (5.0 * alpha / 6.0),
        ),
        ChainLink(
            "young-split",
            n ** (1.0 - 5.0 * alpha / 6.0) * l53 ** (5.0 * alpha / 6.0),
            (2.0 - alpha) / 2.0 * n + (alpha / 2.0) * n ** (-2.0 / 3.0) * l53 ** (5.0 / 3.0),
        ),
        ChainLink(
            "exponent-identity",
            (12.0 - 5.0 * alpha) / 6.0 + 5.0 * alpha / 6.0,
            2.0,
        ),
    ]
    return links


def energy_report(state: SlaterState, potential: PowerLawPotential) -> EnergyReport:
    p = state.params
    rho = charge_density(state)
    lt = lieb_thirring_check(state)
    pair = pair_energy(rho, potential, p.n_particles)
    q = hls_index(potential.alpha)
    lq = field_lp_norm(rho, q)
    hls_ratio = pair / (lq**2 / p.n_particles) if lq > 0 else np.inf
    links = interpolation_young_chain(state, potential, p)
    links.append(
        ChainLink(
            "pair-energy-closure",
            pair,
            max(hls_ratio, 1.0)
            * (p.n_particles + kinetic_trace(state, epsilon_scaled=True)),
        )
    )
    return EnergyReport(
        kinetic_scaled=kinetic_trace(state, epsilon_scaled=True),
        kinetic_plain=lt["rhs"],
        rho_l1=field_lp_norm(rho, 1.0),
        rho_53=field_lp_norm(rho, 5.0 / 3.0),
        rho_pair_index=lq,
        rho_pair_index_printed=field_lp_norm(rho, 6.0 / (5.0 - potential.alpha)),
        pair=pair,
        lieb_thirring_ratio=lt["ratio"],
        hls_ratio=hls_ratio,
        links=links,
    )


def conservation_transfer_audit(snapshots, potential: PowerLawPotential,
                                margin: float = 1.2) -> dict:
    """Along an HF run: ||rho_t||_{5/3}^{5/3} <= C * eps^-2 E_HF(omega_0).

    C is the time-zero measured ratio; the audit checks the bound with a
    multiplicative margin at every snapshot.
    """
    times, ratios = [], []
    e0 = None
    for t, st in snapshots:
        if e0 is None:
            e0 = hf_energy(st, potential)
        rho = charge_density(st)
        val = field_lp_norm(rho, 5.0 / 3.0) ** (5.0 / 3.0)
        ratios.append(val * st.params.epsilon**2 / e0)
        times.append(t)
    ratios = np.asarray(ratios)
    return {
        "times": np.asarray(times),
        "ratios": ratios,
        "holds": bool(np.all(ratios <= ratios[0] * margin + 1e-12)),
    }


def report_to_csv_row(report: EnergyReport) -> str:
    cells = [
        report.kinetic_scaled,
        report.kinetic_plain,
        report.rho_l1,
        report.rho_53,
        report.rho_pair_index,
        report.rho_pair_index_printed,
        report.pair,
        report.lieb_thirring_ratio,
        report.hls_ratio,
    ]
    return ",".join(f"{c:.17g}" for c in cells)


ENERGY_CSV_HEADER = (
    "kinetic_scaled,kinetic_plain,rho_L1,rho_L53,rho_pair_index,"
    "rho_pair_index_printed,pair,lt_ratio,hls_ratio"
)
