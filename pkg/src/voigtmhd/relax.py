"""Long-time relaxation runs: sampling, dyadic-window checkpoints, convergence and equilibria."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics as dg
from . import dynamics as dy
from . import fileio
from . import spectral as sp
from .errors import ConfigurationError, NotConvergedError, NumericalFailure

log = logging.getLogger(__name__)

BLOWUP_MARGIN = 1e-3
TRIVIAL_FIELD_NORM = 1e-12
TAIL_LENGTH = 3
CSV_NAME = "diagnostics.csv"
REPORT_NAME = "report.txt"
FINAL_NAME = "final.vmhs"
CHECKPOINT_DIR = "checkpoints"


@dataclass(frozen=True)
class RelaxationConfig:
    n: int = 32
    params: dy.VoigtParams = field(default_factory=dy.VoigtParams)
    init: dy.InitialCondition = field(default_factory=dy.InitialCondition)
    t_max: float = 100.0
    sample_interval: float = 0.05
    defect_tolerance: float = 1e-6
    convergence_factor: float = 100.0
    output_dir: str | None = None
    checkpoint_interval: float | None = None
    figures: bool = True
    stop_on_convergence: bool = True

    def __post_init__(self):
        sp.WavenumberGrid(self.n)
        if not self.t_max > 0.0:
            raise ConfigurationError(f"time.t_max must be > 0 (got {self.t_max})")
        if not self.sample_interval > 0.0:
            raise ConfigurationError(f"time.sample_interval must be > 0 (got {self.sample_interval})")
        dt = self.params.dt_override
        if dt is not None and self.sample_interval < dt:
            raise ConfigurationError(
                f"time.sample_interval ({self.sample_interval}) must be >= time.dt ({dt})")
        if not self.defect_tolerance > 0.0:
            raise ConfigurationError(f"relax.defect_tolerance must be > 0 (got {self.defect_tolerance})")
        if not self.convergence_factor > 1.0:
            raise ConfigurationError(
                f"relax.convergence_factor must be > 1 (got {self.convergence_factor})")
        if self.checkpoint_interval is not None and not self.checkpoint_interval > 0.0:
            raise ConfigurationError(
                f"output.checkpoint_interval must be > 0 (got {self.checkpoint_interval})")


@dataclass(frozen=True)
class Checkpoint:
    window: int
    t: float
    record: dg.DiagnosticsRecord
    snapshot_path: str | None = None

    @property
    def defect(self):
        return self.record.equilibrium_defect


@dataclass(frozen=True)
class EquilibriumRecord:
    B_infinity: sp.SpectralField
    q_infinity: sp.SpectralField
    mhs_residual: float
    pressure_residual: float
    helicity: float
    b_norm_l2: float
    beltrami_alignment: float
    trivial: bool


@dataclass
class RelaxationReport:
    checkpoints: list
    converged: bool
    termination_reason: str
    final_state: dy.VoigtState
    records: list
    final_state_path: str | None = None
    equilibrium: EquilibriumRecord | None = None
    failure: str | None = None

    def summary(self):
        first, last = self.records[0], self.records[-1]
        pairs = [
            ("termination_reason", self.termination_reason),
            ("converged", str(self.converged).lower()),
            ("t_final", repr(self.final_state.t)),
            ("samples", len(self.records)),
            ("checkpoints", len(self.checkpoints)),
            ("initial_defect", repr(first.equilibrium_defect)),
            ("final_defect", repr(last.equilibrium_defect)),
            ("energy_defect_max", repr(max(r.energy_defect for r in self.records))),
            ("helicity_drift_max", repr(max(r.helicity_drift for r in self.records))),
            ("u_h1_initial", repr(first.u_h1)),
            ("u_h1_final", repr(last.u_h1)),
            ("mhs_residual_initial", repr(first.mhs_residual)),
            ("mhs_residual_final", repr(last.mhs_residual)),
        ]
        for c in self.checkpoints:
            pairs.append((f"checkpoint_{c.window}", f"t={c.t!r} defect={c.defect!r}"))
        if self.equilibrium is not None:
            eq = self.equilibrium
            pairs += [
                ("equilibrium_mhs_residual", repr(eq.mhs_residual)),
                ("equilibrium_pressure_residual", repr(eq.pressure_residual)),
                ("equilibrium_helicity", repr(eq.helicity)),
                ("equilibrium_b_norm_l2", repr(eq.b_norm_l2)),
                ("equilibrium_beltrami_alignment", repr(eq.beltrami_alignment)),
                ("equilibrium_trivial", str(eq.trivial).lower()),
            ]
        if self.failure:
            pairs.append(("failure", self.failure))
        if self.final_state_path:
            pairs.append(("final_state_path", self.final_state_path))
        return pairs


def blowup_guard(state, initial_energy):
    """'violation' if the Voigt energy exceeds (1 + 1e-3) E(0) or anything is non-finite, else 'ok'."""
    if not np.isfinite(state.packed()).all():
        return "violation"
    e_u, e_b = dg.voigt_energy(state)
    energy = e_u + e_b
    if not math.isfinite(energy) or energy > (1.0 + BLOWUP_MARGIN) * initial_energy:
        return "violation"
    return "ok"


def detect_convergence(checkpoints, tolerance, factor=100.0):
    """Threshold-or-factor test over checkpoint defects with a monotone-tail requirement.

    Accepts checkpoints or bare defect values. Converged when the last few
    defects are non-increasing and the last is below ``tolerance`` or below
    first/``factor``; a tail lying entirely below ``tolerance`` also counts,
    so defects fluctuating at roundoff level are accepted.
    """
    defects = [c.defect if isinstance(c, Checkpoint) else float(c) for c in checkpoints]
    if len(defects) < 2:
        return False
    tail = defects[-TAIL_LENGTH:]
    last = tail[-1]
    if all(d <= tolerance for d in tail):
        return True
    monotone = all(b <= a for a, b in zip(tail, tail[1:]))
    return monotone and (last <= tolerance or last <= defects[0] / factor)


def extract_equilibrium(final_state, converged=True):
    if not converged:
        raise NotConvergedError("refusing to extract an equilibrium from a non-converged run")
    B = final_state.B
    q, pres = dg.pressure_recover(B)
    b_norm, bound = dg.helicity_bound(final_state)
    if b_norm < bound * (1.0 - 1e-12):
        raise AssertionError(f"helicity lower bound violated: ||B|| = {b_norm!r} < {bound!r}")
    return EquilibriumRecord(
        B_infinity=B,
        q_infinity=q,
        mhs_residual=dg.mhs_residual(B),
        pressure_residual=pres,
        helicity=dg.modified_helicity(final_state),
        b_norm_l2=b_norm,
        beltrami_alignment=dg.beltrami_alignment(B),
        trivial=b_norm <= TRIVIAL_FIELD_NORM,
    )


def window_index(t):
    """floor(log2 t) for t >= 1, exact at powers of two."""
    return math.frexp(t)[1] - 1


class _Windows:
    """Tracks the defect-minimizing sample of the current dyadic window."""

    def __init__(self, snapshot_dir=None):
        self.snapshot_dir = snapshot_dir
        self.closed = []
        self.current = None
        self.best = None
        self.best_state = None

    def offer(self, rec, state=None):
        """Feed one sample; returns True when a window has just closed."""
        if rec.t < 1.0:
            return False
        w = window_index(rec.t)
        closed = False
        if self.current is not None and w != self.current:
            self.close()
            closed = True
        if self.current is None:
            self.current = w
        if self.best is None or rec.equilibrium_defect < self.best.equilibrium_defect:
            self.best = rec
            self.best_state = state
        return closed

    def close(self):
        if self.best is None:
            return
        path = None
        if self.snapshot_dir is not None and self.best_state is not None:
            path = os.path.join(self.snapshot_dir, f"window_{self.current:02d}.vmhs")
            fileio.save_checkpoint(self.best_state, path)
        self.closed.append(Checkpoint(self.current, self.best.t, self.best, path))
        self.current = None
        self.best = None
        self.best_state = None


def _next_dt(state, remaining):
    dt = dy.stable_dt(state)
    if remaining <= dt * (1.0 + 1e-9):
        return remaining, True
    if remaining < 2.0 * dt:
        return 0.5 * remaining, False
    return dt, False


def _restore(config, resume_from, csv_path):
    state = fileio.load_checkpoint(resume_from, params=config.params)
    if state.grid.n != config.n:
        raise ConfigurationError(f"checkpoint n={state.grid.n} does not match grid.n={config.n}")
    records = fileio.read_diagnostics(csv_path)
    upto = [r for r in records if r.t <= state.t]
    if not upto or upto[-1].t != state.t:
        raise ConfigurationError(f"{csv_path} has no sample at the checkpoint time t={state.t!r}")
    fileio.write_diagnostics(upto, csv_path)
    return state, upto


def run(config, resume_from=None):
    """Integrate until convergence, t_max, blow-up or numerical failure."""
    out = config.output_dir
    csv_path = snap_dir = None
    if out is not None:
        snap_dir = os.path.join(out, CHECKPOINT_DIR)
        os.makedirs(snap_dir, exist_ok=True)
        csv_path = os.path.join(out, CSV_NAME)

    grid = sp.make_grid(config.n)
    windows = _Windows(snap_dir)
    si = config.sample_interval
    if resume_from is not None:
        if csv_path is None:
            raise ConfigurationError("resuming needs output.dir holding the diagnostics CSV")
        state, records = _restore(config, resume_from, csv_path)
        e0, h0 = records[0].energy, records[0].helicity
        dcum = records[-1].dissipation_cum
        for r in records:
            windows.offer(r)
        converged = detect_convergence(windows.closed, config.defect_tolerance,
                                       config.convergence_factor)
    else:
        state = dy.make_state(config.init, grid, config.params)
        e_u, e_b = dg.voigt_energy(state)
        e0, h0, dcum = e_u + e_b, dg.modified_helicity(state), 0.0
        rec = dg.record(state, energy0=e0, helicity0=h0, dissipation_cum=0.0)
        records = [rec]
        if csv_path is not None:
            if os.path.exists(csv_path):
                os.remove(csv_path)
            fileio.append_diagnostics(rec, csv_path)
        windows.offer(rec, state)
        converged = False

    k = int(round(state.t / si))
    ci = config.checkpoint_interval
    restart_k = int(math.floor(state.t / ci + 1e-9)) if ci else 0
    rate_prev = dg.dissipation_rate(state)
    reason, failure = None, None

    while reason is None:
        if state.t >= config.t_max:
            reason = "t_max"
            break
        target = min((k + 1) * si, config.t_max)
        try:
            dt, lands = _next_dt(state, target - state.t)
            new = dy.rk4_step(state, dt)
            if lands:
                new = replace(new, t=target)
            rate = dg.dissipation_rate(new)
            if not math.isfinite(rate):
                raise NumericalFailure("non-finite dissipation rate", term="dissipation")
        except NumericalFailure as exc:
            reason, failure = "numerical_failure", str(exc)
            break
        dcum += 0.5 * dt * (rate_prev + rate)
        rate_prev = rate
        state = new
        if not lands:
            continue
        if target == (k + 1) * si:
            k += 1
        if blowup_guard(state, e0) == "violation":
            reason, failure = "blowup", f"energy guard tripped at t={state.t!r}"
            break
        try:
            rec = dg.record(state, energy0=e0, helicity0=h0, dissipation_cum=dcum)
        except NumericalFailure as exc:
            reason, failure = "numerical_failure", str(exc)
            break
        records.append(rec)
        if csv_path is not None:
            fileio.append_diagnostics(rec, csv_path)
        if ci and snap_dir is not None and math.floor(state.t / ci + 1e-9) > restart_k:
            restart_k = math.floor(state.t / ci + 1e-9)
            fileio.save_checkpoint(state, os.path.join(snap_dir, f"restart_{k:08d}.vmhs"))
        if windows.offer(rec, state):
            log.info("window %d closed: t=%.4g defect=%.3e", windows.closed[-1].window,
                     windows.closed[-1].t, windows.closed[-1].defect)
            converged = detect_convergence(windows.closed, config.defect_tolerance,
                                           config.convergence_factor)
            if converged and config.stop_on_convergence:
                reason = "converged"

    windows.close()
    if reason in ("t_max", "converged") and config.stop_on_convergence:
        converged = detect_convergence(windows.closed, config.defect_tolerance,
                                       config.convergence_factor)
        if converged:
            reason = "converged"
    elif not config.stop_on_convergence:
        converged = False

    report = RelaxationReport(
        checkpoints=windows.closed,
        converged=converged,
        termination_reason=reason,
        final_state=state,
        records=records,
        failure=failure,
    )
    if converged:
        report.equilibrium = extract_equilibrium(state)
    if out is not None:
        report.final_state_path = os.path.join(out, FINAL_NAME)
        if np.isfinite(state.packed()).all():
            fileio.save_checkpoint(state, report.final_state_path)
        else:
            report.final_state_path = None
        fileio.write_key_values(report.summary(), os.path.join(out, REPORT_NAME))
        if config.figures:
            from .plotting import plot_relaxation
            plot_relaxation(records, report.checkpoints, os.path.join(out, "relaxation.png"))
    return report


def simulate(config, resume_from=None):
    """Fixed-horizon integration to t_max with no convergence verdict."""
    return run(replace(config, stop_on_convergence=False), resume_from=resume_from)
