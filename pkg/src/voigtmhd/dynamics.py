"""Voigt-regularized ideal-induction MHD on the periodic cube.

The evolved system, with L = (-Delta)^alpha and P the Leray projector:

    du/dt   = L^{-1} P(B.grad B - u.grad u) - nu (-Delta)^{1-alpha} u
    dB/dt   = L^{-1} curl(u x B)
    dPsi/dt = L^{-1} (u x B)

All quadratic products are formed on the grid and truncated by the 2/3 mask,
so for mask-limited inputs every retained mode is the exact Galerkin value.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from . import spectral as sp
from .errors import ConfigurationError, NotSolenoidalError, NumericalFailure

DEFAULT_DT_CAP = 1e-2
MIN_DT = 1e-6
SOLENOIDAL_TOL = 1e-10


@dataclass(frozen=True)
class VoigtParams:
    alpha: float = 1.0
    nu: float = 1.0
    cfl: float = 0.4
    dt_override: float | None = None
    dt_cap: float = DEFAULT_DT_CAP

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise ConfigurationError(f"physics.alpha must be >= 1 (got {self.alpha})")
        if not self.nu > 0.0:
            raise ConfigurationError(f"physics.nu must be > 0 (got {self.nu})")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError(f"time.cfl must be in (0, 1] (got {self.cfl})")
        if self.dt_override is not None and not self.dt_override > 0.0:
            raise ConfigurationError(f"time.dt must be > 0 (got {self.dt_override})")
        if not self.dt_cap > 0.0:
            raise ConfigurationError(f"dt cap must be > 0 (got {self.dt_cap})")


@dataclass(frozen=True)
class VoigtState:
    u: sp.SpectralField
    B: sp.SpectralField
    Psi: sp.SpectralField
    t: float
    params: VoigtParams

    @property
    def grid(self):
        return self.u.grid

    def packed(self):
        return np.concatenate([self.u.coeffs, self.B.coeffs, self.Psi.coeffs])

    @classmethod
    def from_packed(cls, y, grid, t, params):
        return cls(
            u=sp.SpectralField(y[0:3], grid, solenoidal=True, mean_free=True),
            B=sp.SpectralField(y[3:6], grid, solenoidal=True, mean_free=True),
            Psi=sp.SpectralField(y[6:9], grid, mean_free=True),
            t=float(t),
            params=params,
        )


@dataclass(frozen=True)
class StateTendency:
    du_dt: sp.SpectralField
    dB_dt: sp.SpectralField
    dPsi_dt: sp.SpectralField


@dataclass(frozen=True)
class InitialCondition:
    """Initial data recipe.

    ``abc``: B0 = amplitude * ABC(a, b, c), u0 = u_amplitude * ABC(a, b, c).
    ``random_solenoidal``: Gaussian mask-limited fields with per-mode spectrum
    |k|^4 exp(-|k|^2 / k0^2), Leray-projected and scaled to L2 norm
    ``amplitude`` (B) and ``u_amplitude`` (u).
    When ``u_amplitude`` is None it defaults to 0 for abc and to
    ``amplitude`` for random data.
    """

    kind: str = "abc"
    abc: tuple = (1.0, 1.0, 1.0)
    k0: float = 2.0
    amplitude: float = 1.0
    u_amplitude: float | None = None
    seed: int = 42

    def __post_init__(self):
        if self.kind == "random":
            object.__setattr__(self, "kind", "random_solenoidal")
        if self.kind not in ("abc", "random_solenoidal"):
            raise ConfigurationError(f"init.kind must be 'abc' or 'random_solenoidal' (got {self.kind!r})")
        if len(self.abc) != 3:
            raise ConfigurationError("init.abc needs three amplitudes a, b, c")
        if not self.k0 > 0:
            raise ConfigurationError(f"init.k0 must be positive (got {self.k0})")
        if self.amplitude < 0 or (self.u_amplitude is not None and self.u_amplitude < 0):
            raise ConfigurationError("init amplitudes must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("init.seed must fit in 64 unsigned bits")

    @property
    def resolved_u_amplitude(self):
        if self.u_amplitude is not None:
            return self.u_amplitude
        return 0.0 if self.kind == "abc" else self.amplitude


class _Operators:
    """Per-mode multipliers shared by every right-hand-side evaluation."""

    def __init__(self, grid, alpha, nu):
        self.grid = grid
        self.n = grid.n
        self.mask = grid.dealias_mask
        k2 = grid.k2
        safe = np.where(k2 > 0, k2, 1.0)
        self.inv_L = np.where(k2 > 0, safe ** (-alpha), 0.0) * self.mask
        self.visc = nu * np.where(k2 > 0, safe ** (1.0 - alpha), 0.0)
        kd = grid.kd
        self.kx = np.ascontiguousarray(kd[0, :, 0, 0])
        self.ky = np.ascontiguousarray(kd[1, 0, :, 0])
        self.kz = np.ascontiguousarray(kd[2, 0, 0, :])


@lru_cache(maxsize=32)
def _operators(grid, alpha, nu):
    return _Operators(grid, alpha, nu)


def _check_finite(arr, term):
    if not np.isfinite(np.sum(arr)):
        raise NumericalFailure(f"non-finite values in {term}", term=term)


def _rhs_packed(y, ops):
    """Tendency of the packed (u, B, Psi) coefficient stack, shape (9, ...)."""
    phys = sp.inverse_array(y[:6], ops.n)
    prods = np.empty((9,) + phys.shape[1:])
    # u_i u_j - B_i B_j (symmetric, 6 slots) and u x B; the momentum term is
    # assembled in flux form, identical to the convective form for solenoidal
    # mask-limited u and B
    _kernels.grid_products(phys, prods)
    hat = sp.forward_array(prods, ops.n)
    out = np.empty_like(y)
    _kernels.combine_modes(
        y, hat, ops.kx, ops.ky, ops.kz, ops.mask, ops.inv_L, ops.visc, _kernels._SLOT, out
    )
    _check_finite(out[0:3], "du_dt (momentum)")
    _check_finite(out[3:6], "dB_dt (induction)")
    _check_finite(out[6:9], "dPsi_dt (potential)")
    return out


def voigt_rhs(state):
    """Evaluate all three tendencies at ``state``."""
    ops = _operators(state.grid, state.params.alpha, state.params.nu)
    d = _rhs_packed(state.packed(), ops)
    g = state.grid
    return StateTendency(
        du_dt=sp.SpectralField(d[0:3], g, solenoidal=True, mean_free=True),
        dB_dt=sp.SpectralField(d[3:6], g, solenoidal=True, mean_free=True),
        dPsi_dt=sp.SpectralField(d[6:9], g, mean_free=True),
    )


def rk4_step(state, dt):
    """One classical fourth-order Runge-Kutta step of (u, B, Psi)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive (got {dt})")
    ops = _operators(state.grid, state.params.alpha, state.params.nu)
    y = state.packed()
    k1 = _rhs_packed(y, ops)
    k2 = _rhs_packed(y + (0.5 * dt) * k1, ops)
    k3 = _rhs_packed(y + (0.5 * dt) * k2, ops)
    k4 = _rhs_packed(y + dt * k3, ops)
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    y_new[:, 0, 0, 0] = 0.0
    return VoigtState.from_packed(y_new, state.grid, state.t + dt, state.params)


def max_speed(u):
    vals = sp.inverse_array(u.coeffs, u.grid.n)
    return float(np.sqrt(np.max(np.sum(vals**2, axis=0))))


def stable_dt(state):
    """Advective CFL step, capped; an explicit override always wins."""
    p = state.params
    if p.dt_override is not None:
        return p.dt_override
    umax = max_speed(state.u)
    if not np.isfinite(umax):
        raise NumericalFailure("non-finite velocity in CFL estimate", term="u")
    if umax == 0.0:
        return p.dt_cap
    dt = min(p.dt_cap, p.cfl * state.grid.dx / umax)
    if dt < MIN_DT:
        raise NumericalFailure(f"time step collapsed to {dt:.3e}", term="u")
    return dt


# -- nonlinear operators --------------------------------------------------------

def _require_solenoidal(v, name):
    c = v.coeffs
    div = np.abs(np.sum(v.grid.kd * c, axis=0))
    scale = np.max(np.abs(c) * v.grid.kmag) if c.size else 0.0
    if np.max(div) > SOLENOIDAL_TOL * scale + 1e-300:
        raise NotSolenoidalError(f"{name} is not divergence-free")


def convective(v, w):
    """P(v . grad w), formed pseudo-spectrally with 2/3 truncation."""
    grid = sp.check_grids(v, w)
    _require_solenoidal(v, "advecting field")
    n = grid.n
    vp = sp.inverse_array(v.coeffs, n)
    gw = sp.inverse_array(w.coeffs[:, None] * (1j * grid.kd), n)
    prod = np.einsum("jxyz,ijxyz->ixyz", vp, gw)
    hat = sp.forward_array(prod, n) * grid.dealias_mask
    return sp.SpectralField(sp.leray_array(hat, grid), grid, solenoidal=True, mean_free=True)


def cross_product(a, b):
    """Dealiased pointwise a x b."""
    grid = sp.check_grids(a, b)
    n = grid.n
    ap = sp.inverse_array(a.coeffs, n)
    bp = sp.inverse_array(b.coeffs, n)
    hat = sp.forward_array(np.cross(ap, bp, axis=0), n) * grid.dealias_mask
    return sp.SpectralField(hat, grid)


def trilinear_ratio(u, v, w):
    """(B(u, v), w) / (|u|_0^1/2 |u|_1^1/2 |v|_1 |w|_1)."""
    num = sp.l2_inner(convective(u, v), w)
    den = (
        np.sqrt(sp.sobolev_norm(u, 0) * sp.sobolev_norm(u, 1))
        * sp.sobolev_norm(v, 1)
        * sp.sobolev_norm(w, 1)
    )
    return num / den


# -- initial data -----------------------------------------------------------------

def abc_field(grid, a=1.0, b=1.0, c=1.0):
    def f(x, y, z):
        return np.stack(
            [
                a * np.sin(z) + c * np.cos(y),
                b * np.sin(x) + a * np.cos(z),
                c * np.sin(y) + b * np.cos(x),
            ]
        )

    field = sp.from_function(f, grid)
    field.coeffs[:, 0, 0, 0] = 0.0
    return sp.SpectralField(field.coeffs, grid, solenoidal=True, mean_free=True)


def random_solenoidal(grid, k0, norm, rng):
    """Random mask-limited solenoidal field with peaked spectrum, scaled to L2 norm ``norm``."""
    if k0 >= grid.n / 3:
        raise ConfigurationError(f"init.k0={k0} is not resolved on n={grid.n} (need k0 < n/3)")
    noise = rng.standard_normal((3,) + grid.physical_shape)
    c = sp.forward_array(noise, grid.n)
    k2 = grid.k2
    c *= k2 * np.exp(-k2 / (2.0 * k0**2)) * grid.dealias_mask
    c = sp.leray_array(c, grid)
    field = sp.SpectralField(c, grid, solenoidal=True, mean_free=True)
    current = sp.sobolev_norm(field, 0)
    if norm == 0.0 or current == 0.0:
        return sp.SpectralField(np.zeros_like(c), grid, solenoidal=True, mean_free=True)
    return field * (norm / current)


def make_initial(ic, grid):
    """Return (u0, B0) for the recipe ``ic``."""
    if ic.kind == "abc":
        base = abc_field(grid, *ic.abc)
        return base * ic.resolved_u_amplitude, base * ic.amplitude
    if ic.k0 >= grid.n / 3:
        raise ConfigurationError(f"init.k0={ic.k0} is not resolved on n={grid.n} (need k0 < n/3)")
    rng = np.random.default_rng(int(ic.seed))
    B0 = random_solenoidal(grid, ic.k0, ic.amplitude, rng)
    u0 = random_solenoidal(grid, ic.k0, ic.resolved_u_amplitude, rng)
    return u0, B0


def init_potential(B):
    """Mean-free solenoidal Psi with curl Psi = B, i.e. Psi = curl (-Delta)^{-1} B."""
    _require_solenoidal(B, "B0")
    grid = B.grid
    kd2 = grid.kd2
    inv = np.where(kd2 > 0, 1.0 / np.where(kd2 > 0, kd2, 1.0), 0.0)
    psi = sp.curl_array(B.coeffs, grid.kd) * inv
    psi[:, 0, 0, 0] = 0.0
    return sp.SpectralField(psi, grid, solenoidal=True, mean_free=True)


def make_state(ic, grid, params):
    u0, B0 = make_initial(ic, grid)
    return VoigtState(u=u0, B=B0, Psi=init_potential(B0), t=0.0, params=params)


def with_params(state, params):
    return replace(state, params=params)
