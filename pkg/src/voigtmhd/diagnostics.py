"""Conserved and monitored quantities of a Voigt-MHD state."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import dynamics as dy
from . import spectral as sp

EPS = 1e-300
ALIGNMENT_UNDEFINED = -1.0


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    e_u_alpha: float
    e_b_alpha: float
    dissipation_cum: float
    energy_defect: float
    helicity: float
    helicity_drift: float
    u_h1: float
    dtu_alpha: float
    mhs_residual: float
    pressure_residual: float
    potential_consistency: float
    beltrami_alignment: float
    div_psi_norm: float

    @classmethod
    def columns(cls):
        return tuple(f.name for f in fields(cls))

    def values(self):
        return astuple(self)

    @property
    def energy(self):
        return self.e_u_alpha + self.e_b_alpha

    @property
    def equilibrium_defect(self):
        return self.dtu_alpha + self.u_h1


def voigt_energy(state):
    a = state.params.alpha
    return sp.sobolev_norm(state.u, a) ** 2, sp.sobolev_norm(state.B, a) ** 2


def dissipation_rate(state):
    """2 nu ||grad u||_0^2, the instantaneous loss rate of the Voigt energy."""
    return 2.0 * state.params.nu * sp.sobolev_norm(state.u, 1) ** 2


def energy_balance_defect(records, nu):
    """Max relative violation of E(t) + 2 nu int_0^t |grad u|^2 = E(0).

    The dissipation integral is the composite trapezoid over the sampled
    ``u_h1`` values, so the result is limited by the sampling interval.
    """
    if len(records) < 2:
        raise ValueError("energy balance needs at least two records")
    t = np.array([r.t for r in records])
    energy = np.array([r.energy for r in records])
    rate = 2.0 * nu * np.array([r.u_h1 for r in records]) ** 2
    dcum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (rate[1:] + rate[:-1]))])
    e0 = energy[0]
    return float(np.max(np.abs(energy + dcum - e0)) / max(e0, EPS))


def modified_helicity(state):
    """H = (B, L Psi)."""
    return sp.l2_inner(state.B, sp.fractional_power(state.Psi, state.params.alpha))


def helicity_bound(state):
    """(||B||_0, |H| / ||L Psi||_0); Cauchy-Schwarz guarantees the first dominates."""
    lpsi = sp.fractional_power(state.Psi, state.params.alpha)
    norm_lpsi = sp.sobolev_norm(lpsi, 0)
    h = sp.l2_inner(state.B, lpsi)
    bound = abs(h) / norm_lpsi if norm_lpsi > 0 else 0.0
    return sp.sobolev_norm(state.B, 0), bound


def lorentz_advection(B):
    """Dealiased B . grad B (not projected)."""
    grid = B.grid
    n = grid.n
    bp = sp.inverse_array(B.coeffs, n)
    gb = sp.inverse_array(B.coeffs[:, None] * (1j * grid.kd), n)
    prod = np.einsum("jxyz,ijxyz->ixyz", bp, gb)
    return sp.SpectralField(sp.forward_array(prod, n) * grid.dealias_mask, grid)


def mhs_residual(B):
    """||P(B . grad B)||_0; zero exactly at magnetohydrostatic equilibria."""
    return sp.sobolev_norm(dy.convective(B, B), 0)


def pressure_recover(B):
    """Solve Delta q = div(B . grad B); returns (q, ||B . grad B - grad q||_0)."""
    return _pressure_from(lorentz_advection(B))


def _pressure_from(g):
    grid = g.grid
    kd = grid.kd
    kd2 = grid.kd2
    inv = np.where(kd2 > 0, 1.0 / np.where(kd2 > 0, kd2, 1.0), 0.0)
    q = -1j * np.sum(kd * g.coeffs, axis=0) * inv
    q[0, 0, 0] = 0.0
    q_field = sp.SpectralField(q, grid, mean_free=True)
    resid = g - sp.gradient(q_field)
    return q_field, sp.sobolev_norm(resid, 0)


def potential_consistency(state):
    err = sp.curl(state.Psi) - state.B
    return sp.sobolev_norm(err, 0) / max(sp.sobolev_norm(state.B, 0), EPS)


def equilibrium_defect(state, tendency=None):
    """||du/dt||_alpha + ||u||_1."""
    if tendency is None:
        tendency = dy.voigt_rhs(state)
    return sp.sobolev_norm(tendency.du_dt, state.params.alpha) + sp.sobolev_norm(state.u, 1)


def beltrami_alignment(B):
    """||J x B||_0 / || |J||B| ||_0 with J = curl B, evaluated on the grid.

    0 for force-free (Beltrami) fields, 1 when J is pointwise orthogonal to B.
    Returns ALIGNMENT_UNDEFINED for a vanishing field.
    """
    grid = B.grid
    n = grid.n
    bp = sp.inverse_array(B.coeffs, n)
    jp = sp.inverse_array(sp.curl(B).coeffs, n)
    jxb = np.cross(jp, bp, axis=0)
    mag = np.sqrt(np.sum(jp**2, axis=0) * np.sum(bp**2, axis=0))
    den = math.sqrt(np.sum(mag**2))
    if den == 0.0:
        return ALIGNMENT_UNDEFINED
    return math.sqrt(np.sum(jxb**2)) / (den + EPS)


def div_psi_norm(state):
    return sp.sobolev_norm(sp.divergence(state.Psi), 0)


def record(state, *, energy0, helicity0, dissipation_cum, tendency=None):
    """Assemble the full diagnostics row for ``state`` against the run's references."""
    if tendency is None:
        tendency = dy.voigt_rhs(state)
    a = state.params.alpha
    e_u, e_b = voigt_energy(state)
    h = modified_helicity(state)
    g = lorentz_advection(state.B)
    _, pres = _pressure_from(g)
    return DiagnosticsRecord(
        t=state.t,
        e_u_alpha=e_u,
        e_b_alpha=e_b,
        dissipation_cum=dissipation_cum,
        energy_defect=abs(e_u + e_b + dissipation_cum - energy0) / max(energy0, EPS),
        helicity=h,
        helicity_drift=abs(h - helicity0) / max(abs(helicity0), EPS),
        u_h1=sp.sobolev_norm(state.u, 1),
        dtu_alpha=sp.sobolev_norm(tendency.du_dt, a),
        mhs_residual=sp.sobolev_norm(sp.leray_project(g), 0),
        pressure_residual=pres,
        potential_consistency=potential_consistency(state),
        beltrami_alignment=beltrami_alignment(state.B),
        div_psi_norm=div_psi_norm(state),
    )
