"""Fourier representation of periodic fields on the cube [0, 2*pi]^3.

Coefficients are stored in the real-to-complex half-spectrum layout
(n, n, n//2 + 1) and normalized so that

    f(x) = sum_k  f_hat(k) exp(i k.x),

i.e. ``f_hat = rfftn(f) / n**3``. With this normalization the physical
inner product is ``(f, g) = (2 pi)^3 sum_k f_hat(k) conj(g_hat(k))`` over the
full lattice; the half-spectrum sums weight every plane 0 < k_z < n/2 twice.

Scalar fields have coefficient arrays of shape (n, n, n//2+1), vector fields
(3, n, n, n//2+1), and rank-2 tensors (3, 3, n, n, n//2+1) with entry
[i, j] = d_j v_i.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, GridMismatchError, SpectralDomainError

VOLUME = (2.0 * np.pi) ** 3
AXES = (-3, -2, -1)
MEAN_TOL = 1e-12


@dataclass(frozen=True)
class WavenumberGrid:
    """Integer wavevector lattice for an n^3 periodic grid on [0, 2 pi]^3."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ConfigurationError(f"grid.n must be an integer, got {self.n!r}")
        if self.n % 2 or not 8 <= self.n <= 1024:
            raise ConfigurationError(f"grid.n must be even and in [8, 1024], got {self.n}")

    @property
    def spectral_shape(self):
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def physical_shape(self):
        return (self.n, self.n, self.n)

    @property
    def dx(self):
        return 2.0 * np.pi / self.n

    @cached_property
    def kx(self):
        return (np.fft.fftfreq(self.n) * self.n).reshape(-1, 1, 1)

    @cached_property
    def ky(self):
        return (np.fft.fftfreq(self.n) * self.n).reshape(1, -1, 1)

    @cached_property
    def kz(self):
        return (np.fft.rfftfreq(self.n) * self.n).reshape(1, 1, -1)

    @cached_property
    def wavevectors(self):
        """Integer lattice, shape (3, n, n, n//2+1)."""
        k = np.broadcast_arrays(self.kx, self.ky, self.kz)
        return np.stack(k).astype(np.int64)

    @cached_property
    def kd(self):
        """Derivative wavevector: the lattice with Nyquist components zeroed."""
        half = self.n // 2
        kd = self.wavevectors.astype(float)
        kd[np.abs(self.wavevectors) == half] = 0.0
        return kd

    @cached_property
    def k2(self):
        return self.kx**2 + self.ky**2 + self.kz**2

    @cached_property
    def kmag(self):
        return np.sqrt(self.k2)

    @cached_property
    def kd2(self):
        return np.sum(self.kd**2, axis=0)

    @cached_property
    def dealias_mask(self):
        """2/3 rule: keep modes with every |k_i| < n/3."""
        n = self.n
        return (3 * np.abs(self.kx) < n) & (3 * np.abs(self.ky) < n) & (3 * self.kz < n)

    @cached_property
    def weights(self):
        """Hermitian multiplicity of each stored mode in full-lattice sums."""
        w = np.full((1, 1, self.n // 2 + 1), 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        return w

    @cached_property
    def poincare_lambda(self):
        return float(np.min(self.kmag[self.k2 > 0]))

    @cached_property
    def x(self):
        return np.arange(self.n) * self.dx

    def mesh(self):
        """Physical coordinates X, Y, Z, each of shape (n, n, n)."""
        return np.meshgrid(self.x, self.x, self.x, indexing="ij")

    def power_multiplier(self, s):
        """|k|^(2s) with the k=0 entry set to 1 for s == 0 and to 0 otherwise."""
        with np.errstate(divide="ignore"):
            m = np.where(self.k2 > 0, self.k2 ** float(s), 0.0)
        if s == 0:
            m[0, 0, 0] = 1.0
        return m


@lru_cache(maxsize=None)
def make_grid(n):
    """Return the (cached) grid with ``n`` modes per dimension."""
    if isinstance(n, np.integer):
        n = int(n)
    return WavenumberGrid(n)


@dataclass
class SpectralField:
    """Half-spectrum coefficients of a real scalar, vector or tensor field."""

    coeffs: np.ndarray
    grid: WavenumberGrid
    solenoidal: bool = False
    mean_free: bool = False

    def __post_init__(self):
        if self.coeffs.shape[-3:] != self.grid.spectral_shape:
            raise GridMismatchError(
                f"coefficient shape {self.coeffs.shape} does not fit grid n={self.grid.n}"
            )

    @property
    def rank(self):
        return self.coeffs.ndim - 3

    def copy(self):
        return replace(self, coeffs=self.coeffs.copy())

    def _combine(self, other, op):
        check_grids(self, other)
        return SpectralField(
            op(self.coeffs, other.coeffs),
            self.grid,
            solenoidal=self.solenoidal and other.solenoidal,
            mean_free=self.mean_free and other.mean_free,
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return replace(self, coeffs=self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return replace(self, coeffs=-self.coeffs)


@dataclass
class PhysicalField:
    """Grid-point values of a real field, trailing shape (n, n, n)."""

    values: np.ndarray
    grid: WavenumberGrid

    def __post_init__(self):
        if self.values.shape[-3:] != self.grid.physical_shape:
            raise GridMismatchError(
                f"value shape {self.values.shape} does not fit grid n={self.grid.n}"
            )


def check_grids(*fields):
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid n={f.grid.n} does not match n={grid.n}")
    return grid


# -- transforms -------------------------------------------------------------

def forward_array(values, n):
    return sfft.rfftn(values, axes=AXES, norm="forward")


def inverse_array(coeffs, n):
    return sfft.irfftn(coeffs, s=(n, n, n), axes=AXES, norm="forward")


def to_spectral(field):
    c = forward_array(field.values, field.grid.n)
    return SpectralField(c, field.grid)


def to_physical(field):
    return PhysicalField(inverse_array(field.coeffs, field.grid.n), field.grid)


def transform(field, direction):
    """Map a field to the other representation; ``direction`` is 'forward' or 'inverse'."""
    if direction == "forward":
        if not isinstance(field, PhysicalField):
            raise TypeError("forward transform expects a PhysicalField")
        return to_spectral(field)
    if direction == "inverse":
        if not isinstance(field, SpectralField):
            raise TypeError("inverse transform expects a SpectralField")
        return to_physical(field)
    raise ValueError(f"unknown direction {direction!r}")


def from_function(func, grid):
    """Sample ``func(x, y, z)`` on the grid and return its coefficients."""
    values = np.asarray(func(*grid.mesh()), dtype=float)
    return to_spectral(PhysicalField(values, grid))


# -- derivatives and projections ---------------------------------------------

def gradient(f):
    kd = f.grid.kd
    c = f.coeffs[..., None, :, :, :] * (1j * kd)
    return SpectralField(c, f.grid)


def divergence(v):
    if v.rank < 1 or v.coeffs.shape[-4] != 3:
        raise ValueError("divergence needs a vector field")
    c = 1j * np.sum(v.grid.kd * v.coeffs, axis=-4)
    return SpectralField(c, v.grid, mean_free=True)


def curl_array(c, kd):
    return 1j * np.stack(
        [
            kd[1] * c[2] - kd[2] * c[1],
            kd[2] * c[0] - kd[0] * c[2],
            kd[0] * c[1] - kd[1] * c[0],
        ]
    )


def curl(v):
    if v.rank != 1:
        raise ValueError("curl needs a vector field")
    return SpectralField(curl_array(v.coeffs, v.grid.kd), v.grid, solenoidal=True, mean_free=True)


def differentiate(field, kind):
    """Exact spectral derivative: ``kind`` is 'gradient', 'divergence' or 'curl'."""
    ops = {"gradient": gradient, "divergence": divergence, "curl": curl}
    try:
        op = ops[kind]
    except KeyError:
        raise ValueError(f"unknown derivative kind {kind!r}") from None
    return op(field)


@lru_cache(maxsize=None)
def _projector_parts(grid):
    kd = grid.kd
    kd2 = grid.kd2
    inv = np.where(kd2 > 0, 1.0 / np.where(kd2 > 0, kd2, 1.0), 0.0)
    return kd, inv


def leray_array(c, grid):
    kd, inv = _projector_parts(grid)
    kv = np.sum(kd * c, axis=0) * inv
    out = c - kd * kv
    out[:, 0, 0, 0] = 0.0
    return out


def leray_project(v):
    """Orthogonal projection onto solenoidal, mean-free fields."""
    if v.rank != 1:
        raise ValueError("Leray projection needs a vector field")
    return SpectralField(leray_array(v.coeffs, v.grid), v.grid, solenoidal=True, mean_free=True)


def mean_mode_nonzero(f):
    c = f.coeffs
    mean = np.abs(c[..., 0, 0, 0])
    scale = np.sqrt(np.sum(np.abs(c) ** 2))
    return bool(np.any(mean > MEAN_TOL * scale + 1e-300))


def fractional_power(f, s):
    """Apply (-Delta)^s, i.e. multiply mode k by |k|^(2s)."""
    if s < 0 and mean_mode_nonzero(f):
        raise SpectralDomainError("negative power of -Laplacian needs a mean-free field")
    m = f.grid.power_multiplier(s)
    mean_free = f.mean_free or s != 0
    return SpectralField(f.coeffs * m, f.grid, solenoidal=f.solenoidal, mean_free=mean_free)


def laplacian(f):
    return -fractional_power(f, 1.0)


def dealias(f):
    return replace(f, coeffs=f.coeffs * f.grid.dealias_mask)


# -- norms ---------------------------------------------------------------------

def weighted_sum(grid, a):
    """Full-lattice sum of a real per-mode quantity given on the half spectrum."""
    return float(np.sum(a * grid.weights))


def l2_inner(f, g):
    """(f, g) = integral of f . g over the torus."""
    grid = check_grids(f, g)
    prod = (f.coeffs * np.conj(g.coeffs)).real
    return VOLUME * weighted_sum(grid, prod)


def sobolev_norm(f, s):
    """Homogeneous norm with ||f||_s^2 = (f, (-Delta)^s f)."""
    if s < 0 and mean_mode_nonzero(f):
        raise SpectralDomainError("negative Sobolev index needs a mean-free field")
    m = f.grid.power_multiplier(s)
    return float(np.sqrt(VOLUME * weighted_sum(f.grid, m * np.abs(f.coeffs) ** 2)))
