"""Periodic lattice substrate: grids, complex fields, dense operators, spectral calculus.

All states live on a uniform periodic box.  Fields carry the L2(grid) inner
product h^d * sum(conj(f) g); dense operators are stored in the plain
matrix-on-amplitudes convention, so np.trace of the matrix equals the operator
trace and the kernel is recovered as matrix / h^d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FIELD_SITE_CAP = 2**20
DENSE_SIDE_CAP = 2**10
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box with `dim` axes and `m` sites per axis.

    Spacing is h = length / m.  Sites sit at coordinates i*h, i = 0..m-1;
    wrap-around distances use the minimum image.  Simulation scenarios use
    power-of-two m >= 8; tiny even m is allowed for oracle grids.
    """

    dim: int
    m: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {self.dim}")
        if self.m < 2 or self.m % 2:
            raise ValueError(f"sites per axis must be even and >= 2, got {self.m}")
        if self.length <= 0:
            raise ValueError(f"box length must be positive, got {self.length}")
        if self.m**self.dim > FIELD_SITE_CAP:
            raise ValueError(
                f"site count {self.m**self.dim} exceeds field cap {FIELD_SITE_CAP}"
            )

    @property
    def h(self) -> float:
        return self.length / self.m

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.dim

    @property
    def site_count(self) -> int:
        return self.m**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis_coordinates(self) -> np.ndarray:
        """Site coordinates along one axis, in [0, length)."""
        return self.h * np.arange(self.m)

    def axis_momenta(self) -> np.ndarray:
        """Discrete momenta 2*pi*n/length for n in [-m/2, m/2)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.m, d=self.h)

    def coordinate_mesh(self, axis: int) -> np.ndarray:
        """Coordinate of every site along `axis`, shaped like a field."""
        x = self.axis_coordinates()
        mesh = [np.ones(self.m)] * self.dim
        mesh[axis] = x
        out = mesh[0]
        for a in mesh[1:]:
            out = np.multiply.outer(out, a)
        return out

    def displacement_mesh(self) -> list:
        """Minimum-image signed displacement from the origin, one array per axis."""
        idx = np.arange(self.m)
        signed = ((idx + self.m // 2) % self.m - self.m // 2) * self.h
        out = []
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.m
            out.append(np.broadcast_to(signed.reshape(shape), self.shape))
        return out

    def min_image_distance(self) -> np.ndarray:
        """Field of minimum-image distances |x|_per from the origin site."""
        d2 = np.zeros(self.shape)
        for disp in self.displacement_mesh():
            d2 = d2 + disp**2
        return np.sqrt(d2)

    def momentum_mesh(self) -> list:
        """Momentum component along each axis, shaped like a field."""
        k = self.axis_momenta()
        out = []
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.m
            out.append(np.broadcast_to(k.reshape(shape), self.shape))
        return out

    def momentum_squared(self) -> np.ndarray:
        k2 = np.zeros(self.shape)
        for km in self.momentum_mesh():
            k2 = k2 + km**2
        return k2


@dataclass(frozen=True)
class ScaledParams:
    """Mean-field scaling block: particle number, interaction exponent, epsilon.

    epsilon defaults to n_particles**(-1/3), the choice that makes kinetic and
    potential energies comparable; the pair coupling is 1/n_particles.
    """

    n_particles: int
    alpha: float = 1.0
    epsilon: float | None = None

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", float(self.n_particles) ** (-1.0 / 3.0))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def coupling(self) -> float:
        return 1.0 / self.n_particles


@dataclass
class Field:
    """Complex field on a grid; values are per-site amplitudes."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def norm(self) -> float:
        return float(np.sqrt(self.grid.cell_volume) * np.linalg.norm(self.values))


def inner(f: Field, g: Field) -> complex:
    """L2 inner product h^d * sum(conj(f) g); conjugate-linear in f."""
    if f.grid != g.grid:
        raise ValueError("inner product requires fields on the same grid")
    return complex(f.grid.cell_volume * np.vdot(f.values, g.values))


def normalized(f: Field) -> Field:
    n = f.norm()
    if n == 0:
        raise ValueError("cannot normalize the zero field")
    return Field(f.grid, f.values / n)


def fft(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(values.reshape(grid.shape))


def ifft(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(values.reshape(grid.shape))


def apply_kinetic(f: Field, params: ScaledParams) -> Field:
    """Kinetic operator -eps^2 * Laplacian as the spectral multiplier eps^2 |k|^2."""
    mult = params.epsilon**2 * f.grid.momentum_squared()
    return Field(f.grid, ifft(f.grid, mult * fft(f.grid, f.values)))


def kinetic_energy(f: Field, params: ScaledParams) -> float:
    """<f, -eps^2 Lap f>, evaluated in Fourier space (always >= 0)."""
    hat = fft(f.grid, f.values)
    mult = params.epsilon**2 * f.grid.momentum_squared()
    return float(f.grid.cell_volume * np.sum(mult * np.abs(hat) ** 2) / f.grid.site_count)


@dataclass
class DenseOperator:
    """Explicit one-particle operator on a grid, side m^d (capped).

    The matrix acts on amplitude vectors by plain matmul, so np.trace gives the
    operator trace and singular values are Schatten data directly.
    """

    grid: Grid
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.grid.site_count
        if n > DENSE_SIDE_CAP:
            raise ValueError(f"dense side {n} exceeds cap {DENSE_SIDE_CAP}")
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}, got {self.matrix.shape}")

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) < tol)

    def apply(self, f: Field) -> Field:
        out = self.matrix @ f.values.reshape(-1)
        return Field(self.grid, out.reshape(self.grid.shape))

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.grid, self.matrix + other.matrix)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.grid, self.matrix - other.matrix)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.grid, self.matrix @ other.matrix)


def operator_norms(op: DenseOperator) -> dict:
    """Schatten diagnostics: operator, Hilbert-Schmidt and trace norms plus the trace."""
    try:
        sv = np.linalg.svd(op.matrix, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular value decomposition failed") from exc
    return {
        "operator_norm": float(sv[0]) if sv.size else 0.0,
        "hs_norm": float(np.sqrt(np.sum(sv**2))),
        "trace_norm": float(np.sum(sv)),
        "trace": complex(np.trace(op.matrix)),
    }


def absolute_value(op: DenseOperator) -> DenseOperator:
    """|A| = (A* A)^(1/2); Hermitian PSD with the singular values of A."""
    try:
        _, sv, vh = np.linalg.svd(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular value decomposition failed") from exc
    return DenseOperator(op.grid, vh.conj().T @ (sv[:, None] * vh))


def trace_norm(op: DenseOperator) -> float:
    return operator_norms(op)["trace_norm"]


def hs_norm(op: DenseOperator) -> float:
    return float(np.linalg.norm(op.matrix))


def identity_operator(grid: Grid) -> DenseOperator:
    return DenseOperator(grid, np.eye(grid.site_count, dtype=complex))


def multiplication_operator(grid: Grid, values: np.ndarray) -> DenseOperator:
    """Diagonal operator multiplying pointwise by `values`."""
    return DenseOperator(grid, np.diag(np.asarray(values, dtype=complex).reshape(-1)))


def spectral_multiplier_operator(grid: Grid, multiplier: np.ndarray) -> DenseOperator:
    """Dense matrix of ifft . diag(multiplier) . fft (e.g. kinetic, -i eps grad)."""
    n = grid.site_count
    cols = np.eye(n, dtype=complex).reshape(grid.shape + (n,))
    axes = tuple(range(grid.dim))
    hat = np.fft.fftn(cols, axes=axes)
    out = np.fft.ifftn(multiplier[..., None] * hat, axes=axes)
    return DenseOperator(grid, out.reshape(n, n))


def kinetic_operator(grid: Grid, params: ScaledParams) -> DenseOperator:
    return spectral_multiplier_operator(grid, params.epsilon**2 * grid.momentum_squared())


def projection_from_orbitals(grid: Grid, orbitals: np.ndarray) -> DenseOperator:
    """Rank-N projection sum_j |f_j><f_j| for orthonormal orbitals (rows)."""
    f = np.asarray(orbitals, dtype=complex).reshape(len(orbitals), -1)
    return DenseOperator(grid, grid.cell_volume * (f.T @ f.conj()))
