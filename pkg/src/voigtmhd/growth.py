"""Exponential gradient growth of a passive field in a steady cellular flow.

The stream function sin(x) sin(y) on [0, 2pi]^2 gives u = (sin x cos y, -cos x sin y),
a steady Euler flow. A scalar B3 transported by u with B3(0) = initial_profile(y) has, on
the axis x = 0, the reduced dynamics dB3/dt - sin(y) dB3/dy = 0, solved exactly
by the characteristic map y(t, a) = 2 atan(tan(a/2) e^-t). The gradient at the
stagnation point y = 0 grows exactly like e^t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, ResolutionExhausted

MODELS = ("reduced1d", "cellular2d")
MIN_FIT_SAMPLES = 10
# blend shape tuned for spectral accuracy of the transported profile at n=512
BLEND_CORE_SHARPNESS = 3.0
BLEND_FAR_SHARPNESS = 2.0


def characteristic_map(a, t):
    """Position at time t of the particle starting at label a, |a| < pi."""
    a = np.asarray(a, dtype=float)
    if np.any(np.abs(a) >= math.pi):
        raise ValueError("characteristic labels must satisfy |a| < pi")
    y = 2.0 * np.arctan(np.tan(0.5 * a) * np.exp(-t))
    return float(y) if y.ndim == 0 else y


def inverse_characteristic_map(y, t):
    """Label a whose particle sits at y at time t, |y| < pi."""
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= math.pi):
        raise ValueError("positions must satisfy |y| < pi")
    a = 2.0 * np.arctan(np.tan(0.5 * y) * np.exp(t))
    return float(a) if a.ndim == 0 else a


def _smoothstep(s):
    """C-infinity step, 0 for s <= 0 and 1 for s >= 1.

    Deliberately lopsided: it leaves the linear core very gently, because that
    end is squeezed toward the stagnation point as e^t while the far end is
    stretched.
    """
    s = np.clip(s, 0.0, 1.0)
    f0 = np.where(s > 0, np.exp(-BLEND_CORE_SHARPNESS / np.where(s > 0, s, 1.0)), 0.0)
    f1 = np.where(s < 1, np.exp(-BLEND_FAR_SHARPNESS / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return f0 / (f0 + f1)


def initial_profile(y):
    """Odd 2pi-periodic smooth profile equal to y on |y| <= pi/2 and to pi - y near pi."""
    y = np.asarray(y, dtype=float)
    w = np.mod(y + math.pi, 2.0 * math.pi) - math.pi
    r = np.abs(w)
    blend = _smoothstep((r - 0.5 * math.pi) / (0.5 * math.pi))
    out = np.sign(w) * ((1.0 - blend) * r + blend * (math.pi - r))
    return float(out) if out.ndim == 0 else out


def profile_max(samples=200001):
    return float(np.max(np.abs(initial_profile(np.linspace(0.0, math.pi, samples)))))


def exact_reduced_solution(y, t):
    """Exact reduced-model solution: the initial profile pulled back along characteristics.

    Valid for all y; the repelling point pi stays fixed.
    """
    y = np.asarray(y, dtype=float)
    w = np.mod(y + math.pi, 2.0 * math.pi) - math.pi
    inner = np.abs(w) < math.pi
    out = np.zeros_like(w)
    out[inner] = initial_profile(inverse_characteristic_map(w[inner], t))
    return out


@dataclass(frozen=True)
class GrowthConfig:
    model: str = "reduced1d"
    n: int = 512
    t_max: float = 5.0
    dt: float = 2.5e-3
    fit_window: tuple | None = None
    sample_interval: float = 0.01

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigurationError(f"growth.model must be one of {MODELS} (got {self.model!r})")
        if not isinstance(self.n, (int, np.integer)) or self.n < 64 or self.n % 2:
            raise ConfigurationError(f"growth.n must be an even integer >= 64 (got {self.n!r})")
        if not self.t_max > 0:
            raise ConfigurationError(f"growth.t_max must be > 0 (got {self.t_max})")
        if not 0 < self.dt <= self.t_max:
            raise ConfigurationError(f"growth.dt must be in (0, t_max] (got {self.dt})")
        if not self.sample_interval >= self.dt:
            raise ConfigurationError(
                f"growth.sample_interval must be >= dt (got {self.sample_interval})")
        window = self.fit_window
        if window is None:
            window = (1.0, min(4.0, self.t_max)) if self.t_max > 1.0 else (0.25 * self.t_max, self.t_max)
        lo, hi = (float(v) for v in window)
        if not 0.0 < lo < hi <= self.t_max:
            raise ConfigurationError(
                f"growth.fit_window must satisfy 0 < lo < hi <= t_max (got {self.fit_window})")
        object.__setattr__(self, "fit_window", (lo, hi))


@dataclass
class GrowthSeries:
    t: np.ndarray
    axis_gradient: np.ndarray
    global_gradient: np.ndarray
    aliased: np.ndarray
    l2_norm: np.ndarray = None
    max_abs: np.ndarray = None
    truncated: bool = False
    final_values: np.ndarray = None
    snapshots: dict = field(default_factory=dict)
    rate: float | None = None
    prefactor: float | None = None
    r_squared: float | None = None

    def rows(self):
        for t, a, g, f in zip(self.t, self.axis_gradient, self.global_gradient, self.aliased):
            yield float(t), float(a), float(g), int(bool(f))


def fit_growth_rate(series, window):
    """Least-squares line through (t, log axis gradient) on ``window``; returns (rate, prefactor, r2)."""
    lo, hi = window
    t = np.asarray(series.t, dtype=float)
    g = np.asarray(series.axis_gradient, dtype=float)
    aliased = np.asarray(series.aliased, dtype=bool)
    sel = (t >= lo) & (t <= hi)
    if aliased[sel].any() or (series.truncated and t[-1] < hi):
        raise ResolutionExhausted(f"aliased or missing samples inside fit window [{lo}, {hi}]")
    if sel.sum() < MIN_FIT_SAMPLES:
        raise ValueError(f"need >= {MIN_FIT_SAMPLES} samples in [{lo}, {hi}], have {sel.sum()}")
    ts, lg = t[sel], np.log(g[sel])
    slope, intercept = np.polyfit(ts, lg, 1)
    resid = lg - (slope * ts + intercept)
    ss_tot = np.sum((lg - lg.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(math.exp(intercept)), float(r2)


# -- pseudo-spectral transport ----------------------------------------------------

class _Reduced1D:
    def __init__(self, n):
        self.n = n
        self.y = 2.0 * math.pi * np.arange(n) / n
        k = np.arange(n // 2 + 1, dtype=float)
        self.kd = np.where(k == n // 2, 0.0, k)
        self.mask = 3 * k < n
        self.speed = np.sin(self.y)

    def initial(self):
        return sfft.rfft(initial_profile(self.y), norm="forward") * self.mask

    def values(self, c):
        return sfft.irfft(c, n=self.n, norm="forward")

    def gradients(self, c):
        gy = sfft.irfft(1j * self.kd * c, n=self.n, norm="forward")
        return gy[0], np.max(np.abs(gy))

    def rhs(self, c):
        gy = sfft.irfft(1j * self.kd * c, n=self.n, norm="forward")
        return sfft.rfft(self.speed * gy, norm="forward") * self.mask


class _Cellular2D:
    def __init__(self, n):
        self.n = n
        x = 2.0 * math.pi * np.arange(n) / n
        self.x = x[:, None]
        self.y = x[None, :]
        kx = np.fft.fftfreq(n, 1.0 / n)
        kx[n // 2] = 0.0
        ky = np.arange(n // 2 + 1, dtype=float)
        kyd = np.where(ky == n // 2, 0.0, ky)
        self.ikx = 1j * kx[:, None]
        self.iky = 1j * kyd[None, :]
        self.mask = (3 * np.abs(np.fft.fftfreq(n, 1.0 / n))[:, None] < n) & (3 * ky[None, :] < n)
        self.ux = np.sin(self.x) * np.cos(self.y)
        self.uy = -np.cos(self.x) * np.sin(self.y)

    def initial(self):
        vals = np.broadcast_to(initial_profile(self.y), (self.n, self.n))
        return sfft.rfft2(vals, norm="forward") * self.mask

    def values(self, c):
        return sfft.irfft2(c, s=(self.n, self.n), norm="forward")

    def _grads(self, c):
        gx = sfft.irfft2(self.ikx * c, s=(self.n, self.n), norm="forward")
        gy = sfft.irfft2(self.iky * c, s=(self.n, self.n), norm="forward")
        return gx, gy

    def gradients(self, c):
        gx, gy = self._grads(c)
        return gy[0, 0], float(np.sqrt(np.max(gx**2 + gy**2)))

    def rhs(self, c):
        gx, gy = self._grads(c)
        return -sfft.rfft2(self.ux * gx + self.uy * gy, norm="forward") * self.mask


def _rk4(model, c, dt):
    k1 = model.rhs(c)
    k2 = model.rhs(c + 0.5 * dt * k1)
    k3 = model.rhs(c + 0.5 * dt * k2)
    k4 = model.rhs(c + dt * k3)
    return c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(model, config, snapshot_times=()):
    steps = max(1, math.ceil(config.t_max / config.dt - 1e-9))
    dt = config.t_max / steps
    every = max(1, round(config.sample_interval / dt))
    snap_steps = {round(s / dt): s for s in snapshot_times}
    c = model.initial()
    rows, snaps, truncated = [], {}, False
    for step in range(steps + 1):
        if step in snap_steps:
            snaps[snap_steps[step]] = model.values(c)
        if step % every == 0 or step == steps:
            vals = model.values(c)
            axis, glob = model.gradients(c)
            vmax = float(np.max(np.abs(vals)))
            aliased = vmax > 0 and glob / vmax > model.n / 4
            rows.append((step * dt, abs(axis), glob, aliased,
                         math.sqrt(np.mean(vals**2)), vmax))
            if aliased:
                truncated = True
                break
        if step < steps:
            c = _rk4(model, c, dt)
    arr = list(zip(*rows))
    return GrowthSeries(
        t=np.array(arr[0]),
        axis_gradient=np.array(arr[1]),
        global_gradient=np.array(arr[2]),
        aliased=np.array(arr[3], dtype=bool),
        l2_norm=np.array(arr[4]),
        max_abs=np.array(arr[5]),
        truncated=truncated,
        final_values=model.values(c),
        snapshots=snaps,
    )


def run_reduced_1d(config, snapshot_times=()):
    if config.model != "reduced1d":
        raise ConfigurationError(f"run_reduced_1d needs model=reduced1d (got {config.model!r})")
    return _integrate(_Reduced1D(config.n), config, snapshot_times)


def run_cellular_2d(config, snapshot_times=()):
    if config.model != "cellular2d":
        raise ConfigurationError(f"run_cellular_2d needs model=cellular2d (got {config.model!r})")
    return _integrate(_Cellular2D(config.n), config, snapshot_times)


def run(config, snapshot_times=()):
    """Run the configured model and attach the fit over ``config.fit_window`` when resolvable."""
    runner = run_reduced_1d if config.model == "reduced1d" else run_cellular_2d
    series = runner(config, snapshot_times)
    try:
        series.rate, series.prefactor, series.r_squared = fit_growth_rate(series, config.fit_window)
    except (ResolutionExhausted, ValueError):
        pass
    return series


def cellular_velocity(n):
    """Grid values (ux, uy) of the cellular flow and its stream function on [0, 2pi]^2."""
    m = _Cellular2D(n)
    psi = np.sin(m.x) * np.sin(m.y)
    return m.ux, m.uy, psi
