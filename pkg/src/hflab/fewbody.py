"""Exact antisymmetric N-body Schroedinger propagation (N = 2, 3) on small grids.

Ground truth for the mean-field approximation: the same regularized pair
potential and the same spectral kinetic operator as the Hartree-Fock module,
so differences between the two runs isolate the mean-field error.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from hflab.hartree_fock import SlaterState, hf_step
from hflab.lattice import DenseOperator, Grid, ScaledParams
from hflab.potentials import PowerLawPotential

NBODY_SIZE_CAP = 2**22


def _permutation_sign(perm: tuple) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _particle_axes(dim: int, i: int) -> tuple:
    return tuple(range(i * dim, (i + 1) * dim))


@dataclass
class NBodyState:
    """Full N-body wave function on (m^d)^N sites, unit L2(grid) norm."""

    grid: Grid
    n: int
    psi: np.ndarray
    params: ScaledParams
    time: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        expected = self.grid.shape * self.n
        if self.psi.shape != expected:
            raise ValueError(f"psi must have shape {expected}, got {self.psi.shape}")
        if self.grid.site_count**self.n > NBODY_SIZE_CAP:
            raise ValueError("N-body state exceeds the size cap")

    def norm(self) -> float:
        w = self.grid.cell_volume**self.n
        return float(np.sqrt(w) * np.linalg.norm(self.psi))

    def swap(self, i: int, j: int) -> np.ndarray:
        """psi with particles i and j exchanged."""
        axes = list(range(self.n * self.grid.dim))
        for a, b in zip(_particle_axes(self.grid.dim, i), _particle_axes(self.grid.dim, j)):
            axes[a], axes[b] = axes[b], axes[a]
        return np.transpose(self.psi, axes)

    def antisymmetry_defect(self) -> float:
        worst = 0.0
        w = np.sqrt(self.grid.cell_volume**self.n)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                worst = max(worst, w * np.linalg.norm(self.psi + self.swap(i, j)))
        return worst

    def copy(self) -> "NBodyState":
        return NBodyState(self.grid, self.n, self.psi.copy(), self.params, self.time)


def antisymmetrize(grid: Grid, psi_raw: np.ndarray, params: ScaledParams,
                   time: float = 0.0) -> NBodyState:
    """Signed sum over particle permutations, renormalized."""
    n = params.n_particles
    psi_raw = np.asarray(psi_raw, dtype=complex)
    state = NBodyState(grid, n, psi_raw, params, time)
    acc = np.zeros_like(psi_raw)
    for perm in itertools.permutations(range(n)):
        axes = []
        for i in perm:
            axes.extend(_particle_axes(grid.dim, i))
        acc = acc + _permutation_sign(perm) * np.transpose(psi_raw, axes)
    nrm = np.sqrt(grid.cell_volume**n) * np.linalg.norm(acc)
    if nrm < 1e-12:
        raise ValueError("input has no antisymmetric component")
    state.psi = acc / nrm
    return state


def slater_wavefunction(state: SlaterState) -> NBodyState:
    """Determinantal N-body wave function of a Slater state (orthonormal orbitals)."""
    import math

    n = state.params.n_particles
    acc = None
    for perm in itertools.permutations(range(n)):
        term = np.array(1.0, dtype=complex)
        for slot in range(n):
            term = np.multiply.outer(term, state.orbitals[perm[slot]])
        term = _permutation_sign(perm) * term
        acc = term if acc is None else acc + term
    psi = acc / np.sqrt(float(math.factorial(n)))
    return NBodyState(state.grid, n, psi, state.params, state.time)


def pair_interaction_diagonal(grid: Grid, n: int, potential: PowerLawPotential,
                              coupling: float) -> np.ndarray:
    """coupling * sum_{i<j} V(x_i - x_j) as a diagonal array on the product grid."""
    m = grid.m
    idx = np.arange(m)
    # V(x_i - x_j) on the doubled grid, indexed by per-axis index differences
    index_arrays = []
    for axis in range(grid.dim):
        ai = [1] * (2 * grid.dim)
        ai[axis] = m
        aj = [1] * (2 * grid.dim)
        aj[grid.dim + axis] = m
        index_arrays.append((idx.reshape(ai) - idx.reshape(aj)) % m)
    pair_v = potential.values[tuple(index_arrays)]
    out = np.zeros(grid.shape * n)
    for i in range(n):
        for j in range(i + 1, n):
            bshape = [1] * (n * grid.dim)
            for axis in _particle_axes(grid.dim, i):
                bshape[axis] = m
            for axis in _particle_axes(grid.dim, j):
                bshape[axis] = m
            out = out + coupling * pair_v.reshape(bshape)
    return out


def nbody_step(state: NBodyState, potential: PowerLawPotential, dt: float,
               _cache: dict | None = None) -> NBodyState:
    """Strang step: half kinetic (Fourier), full interaction phase, half kinetic."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    g, n, p = state.grid, state.n, state.params
    if _cache is None:
        _cache = {}
    key = (id(potential), dt)
    if _cache.get("key") != key:
        k2_axis = p.epsilon**2 * g.momentum_squared()
        total = np.zeros(g.shape * n)
        for i in range(n):
            shape = [1] * (n * g.dim)
            for k, axis in enumerate(_particle_axes(g.dim, i)):
                shape[axis] = g.m
            total = total + k2_axis.reshape(shape)
        diag = pair_interaction_diagonal(g, n, potential, p.coupling)
        _cache["kin_half"] = np.exp(-1j * (dt / 2.0) * total / p.epsilon)
        _cache["int_full"] = np.exp(-1j * dt * diag / p.epsilon)
        _cache["key"] = key
    psi = np.fft.fftn(state.psi)
    psi = np.fft.ifftn(_cache["kin_half"] * psi)
    psi = _cache["int_full"] * psi
    psi = np.fft.fftn(psi)
    psi = np.fft.ifftn(_cache["kin_half"] * psi)
    return NBodyState(g, n, psi, p, state.time + dt)


def run_nbody(state: NBodyState, potential: PowerLawPotential, dt: float,
              n_steps: int, snapshot_every: int | None = None):
    if snapshot_every is None:
        snapshot_every = max(1, n_steps)
    cache: dict = {}
    current = state.copy()
    snaps = [(current.time, current.copy())]
    for step in range(1, n_steps + 1):
        current = nbody_step(current, potential, dt, cache)
        if step % snapshot_every == 0 or step == n_steps:
            snaps.append((current.time, current.copy()))
    return snaps


def nbody_energy(state: NBodyState, potential: PowerLawPotential) -> float:
    g, n, p = state.grid, state.n, state.params
    k2_axis = p.epsilon**2 * g.momentum_squared()
    total = np.zeros(g.shape * n)
    for i in range(n):
        shape = [1] * (n * g.dim)
        for k, axis in enumerate(_particle_axes(g.dim, i)):
            shape[axis] = g.m
        total = total + k2_axis.reshape(shape)
    hat = np.fft.fftn(state.psi)
    w = g.cell_volume**n
    kinetic = w * np.sum(total * np.abs(hat) ** 2) / g.site_count**n
    diag = pair_interaction_diagonal(g, n, potential, p.coupling)
    pot = w * np.sum(diag * np.abs(state.psi) ** 2)
    return float(kinetic + pot)


def reduced_density(state: NBodyState) -> DenseOperator:
    """One-particle reduced density matrix, normalized to trace N."""
    g, n = state.grid, state.n
    sites = g.site_count
    psi = state.psi.reshape(sites, sites ** (n - 1))
    mat = n * g.cell_volume**n * (psi @ psi.conj().T)
    return DenseOperator(g, mat)


@dataclass
class DistanceRow:
    """Distances between the exact reduced density and the mean-field projection."""

    time: float
    hs: float
    trace: float
    n_fluct: float
    sqrt_n: float
    n: int


def hf_vs_exact_probe(initial: SlaterState, potential: PowerLawPotential,
                      dt: float, n_steps: int, snapshot_every: int) -> list:
    """Run exact and mean-field trajectories from the same Slater data."""
    from hflab.fock import fluctuation_number  # shared one-particle formula

    exact = slater_wavefunction(initial)
    hf_state = initial.copy()
    cache: dict = {}
    rows = []

    def report(t, ex, hfs):
        gamma = reduced_density(ex)
        from hflab.hartree_fock import density_matrix

        omega = density_matrix(hfs)
        diff = gamma.matrix - omega.matrix
        sv = np.linalg.svd(diff, compute_uv=False)
        rows.append(
            DistanceRow(
                time=t,
                hs=float(np.sqrt(np.sum(sv**2))),
                trace=float(np.sum(sv)),
                n_fluct=fluctuation_number(gamma.matrix, omega.matrix),
                sqrt_n=float(np.sqrt(initial.params.n_particles)),
                n=initial.params.n_particles,
            )
        )

    report(0.0, exact, hf_state)
    for step in range(1, n_steps + 1):
        exact = nbody_step(exact, potential, dt, cache)
        hf_state = hf_step(hf_state, potential, dt)
        if step % snapshot_every == 0 or step == n_steps:
            report(exact.time, exact, hf_state)
    return rows


def distance_rows_to_csv(rows: list, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,hs,trace,n_fluct,sqrtN,N\n")
        for r in rows:
            fh.write(
                f"{r.time:.17g},{r.hs:.17g},{r.trace:.17g},"
                f"{r.n_fluct:.17g},{r.sqrt_n:.17g},{r.n}\n"
            )
