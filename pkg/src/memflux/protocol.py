"""
The five-interval magnetization protocol and the fundamental/phase-shift extraction around it.

    0  idle         T/6   i_d = 0,      i_q = 0       (magnets start fully demagnetized)
    1  pulse        T/6   i_d = +1000 A, i_q = 0
    2  no-load      T     zero current                 (reference waveforms)
    3  on-load      T     constant (i_d, i_q) of the sweep point
    4  no-load      T     zero current                 (waveforms after load)

Solving is quasi-static: a step only re-solves the assembly when the currents differ from the previous step,
since the hysteresis update is idempotent under a repeated field.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from typing import Callable, Union

import numpy as np
import numpy.typing as npt

from . import metrics
from .circuit import SolverError
from .config import Config
from .motor import LCF2, LCF3, MagnetField, PoleAssembly, flux_phasor, periodic_derivative, phase_a_flux, solve_assembly

Current = Union[float, Callable[[float], float]]
"""Constant current, or a function of time since the start of the interval [s] -> ampere."""


class ProtocolError(RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class Interval:
    label: str
    duration: float
    """In electrical periods."""
    i_d: Current = 0.0
    i_q: Current = 0.0

    def currents(self, t: float) -> tuple[float, float]:
        d = self.i_d(t) if callable(self.i_d) else self.i_d
        q = self.i_q(t) if callable(self.i_q) else self.i_q
        return float(d), float(q)


@dataclasses.dataclass(frozen=True)
class IntervalPlan:
    intervals: tuple[Interval, ...]

    def __post_init__(self) -> None:
        if len(self.intervals) != 5:
            raise ValueError(f"the protocol has five intervals, got {len(self.intervals)}")
        for idx in (2, 4):
            iv = self.intervals[idx]
            if callable(iv.i_d) or callable(iv.i_q) or iv.i_d != 0 or iv.i_q != 0:
                raise ValueError(f"interval {idx} must carry zero current")
        if callable(self.intervals[1].i_q) or self.intervals[1].i_q != 0:
            raise ValueError("the magnetization pulse must be d-axis only")

    @staticmethod
    def standard(
        i_d_load: float,
        i_q_load: float,
        pulse_current: float = 1000.0,
        durations: tuple[float, ...] = (1 / 6, 1 / 6, 1.0, 1.0, 1.0),
    ) -> IntervalPlan:
        return IntervalPlan(
            (
                Interval("initial state", durations[0]),
                Interval("magnetization pulse", durations[1], i_d=pulse_current),
                Interval("no-load", durations[2]),
                Interval("on-load", durations[3], i_d=i_d_load, i_q=i_q_load),
                Interval("no-load after load", durations[4]),
            )
        )


@dataclasses.dataclass(frozen=True)
class Fundamental:
    amplitude: float
    phase: float
    """Radians, cosine convention: x(theta) = amplitude*cos(theta + phase)."""


@dataclasses.dataclass(frozen=True)
class Waveform:
    t: npt.NDArray[np.float64]
    psi: npt.NDArray[np.float64]
    emf: npt.NDArray[np.float64]


@dataclasses.dataclass(frozen=True)
class RunResult:
    i_d: float
    i_q: float
    psi_fund_2: Fundamental
    psi_fund_4: Fundamental
    e_fund_2: Fundamental
    e_fund_4: Fundamental
    delta: float
    """Phase shift of the interval-4 flux fundamental relative to interval 2, in (-pi, pi]."""
    delta_emf: float
    interval_fields: dict[int, tuple[MagnetField, ...]]
    """Per-element (H, B, J) at the last step of every interval, ordered [HCF, LCF-2, LCF-3]."""
    remanence: dict[int, tuple[npt.NDArray[np.float64], ...]]
    """Per-element remanence of each magnet at the end of every interval."""
    ms: metrics.MsReport
    waveforms: dict[int, Waveform]

    @property
    def load_fields(self) -> tuple[MagnetField, ...]:
        """Snapshot at the end of the on-load interval, which the material-level metrics use."""
        return self.interval_fields[3]

    def to_record(self) -> dict[str, float]:
        rem4 = self.remanence[4]
        rec = {
            "id_A": self.i_d,
            "iq_A": self.i_q,
            **dataclasses.asdict(self.ms),
            "psi_fund_2_Wb": self.psi_fund_2.amplitude,
            "psi_phase_2_rad": self.psi_fund_2.phase,
            "psi_fund_4_Wb": self.psi_fund_4.amplitude,
            "psi_phase_4_rad": self.psi_fund_4.phase,
            "e_fund_2_V": self.e_fund_2.amplitude,
            "e_phase_2_rad": self.e_fund_2.phase,
            "e_fund_4_V": self.e_fund_4.amplitude,
            "e_phase_4_rad": self.e_fund_4.phase,
            "delta_rad": self.delta,
            "delta_emf_rad": self.delta_emf,
        }
        for name, idx in (("m1", 0), ("m2", LCF2), ("m3", LCF3)):
            rec[f"rem_{name}_T"] = float(np.mean(rem4[idx]))
        for name, idx in (("m2", LCF2), ("m3", LCF3)):
            f = self.load_fields[idx]
            for k in range(len(f.B)):
                rec[f"load_{name}_e{k}_H_Apm"] = float(f.H[k])
                rec[f"load_{name}_e{k}_B_T"] = float(f.B[k])
                rec[f"load_{name}_e{k}_J_T"] = float(f.J[k])
        return rec


def fundamental(samples: npt.ArrayLike, t: npt.ArrayLike | None = None) -> Fundamental:
    """
    First DFT coefficient of exactly one period of a uniformly sampled signal.
    If sample times are given they are checked for uniform spacing.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size < 64:
        raise ValueError(f"need one period of at least 64 samples, got shape {x.shape}")
    if t is not None:
        tt = np.asarray(t, dtype=np.float64)
        if tt.shape != x.shape:
            raise ValueError(f"time and sample shapes differ: {tt.shape} vs {x.shape}")
        dt = np.diff(tt)
        if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * abs(np.mean(dt)):
            raise ValueError("samples are not uniformly spaced")
    c = np.fft.rfft(x)[1] * 2 / x.size
    return Fundamental(float(abs(c)), float(np.angle(c)))


def wrap_angle(a: float) -> float:
    """Maps an angle into (-pi, pi]."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


def phase_shift(fund_4: Fundamental, fund_2: Fundamental) -> float:
    if not fund_2.amplitude > metrics.AMPLITUDE_FLOOR:
        raise metrics.DegenerateReferenceError(f"interval-2 amplitude {fund_2.amplitude!r} is below the floor")
    return wrap_angle(fund_4.phase - fund_2.phase)


def _lcf_report(fields: list[MagnetField] | tuple[MagnetField, ...], assembly: PoleAssembly) -> dict[str, float]:
    out = {}
    m2, m3 = assembly.magnets[LCF2], assembly.magnets[LCF3]
    for name, inst, f in (("m2", m2, fields[LCF2]), ("m3", m3, fields[LCF3])):
        signs = np.full(inst.n, inst.direction)
        out[f"ms_b_{name}"] = metrics.ms_b(f.B, inst.spec.Br, signs, inst.element_volumes)
        out[f"ms_j_{name}"] = metrics.ms_j(f.J, inst.spec.Jr, signs, inst.element_volumes)
    if m2.spec.Br != m3.spec.Br:
        raise ProtocolError("aggregate LCF metrics need both LCF magnets to share one material")
    signs = np.concatenate([np.full(m2.n, m2.direction), np.full(m3.n, m3.direction)])
    vols = np.concatenate([m2.element_volumes, m3.element_volumes])
    out["ms_b_lcf"] = metrics.ms_b(np.concatenate([fields[LCF2].B, fields[LCF3].B]), m2.spec.Br, signs, vols)
    out["ms_j_lcf"] = metrics.ms_j(np.concatenate([fields[LCF2].J, fields[LCF3].J]), m2.spec.Jr, signs, vols)
    return out


def run_plan(assembly: PoleAssembly, plan: IntervalPlan, samples_per_period: int) -> RunResult:
    """Runs a plan on an assembly (which is modified in place)."""
    if samples_per_period < 64:
        raise ValueError(f"samples_per_period must be at least 64, got {samples_per_period}")
    f_e = assembly.electrical_frequency
    omega = 2 * math.pi * f_e
    dt = 1.0 / (f_e * samples_per_period)

    step = 0  # global sample counter; the rotor angle is omega*step*dt
    last_currents: tuple[float, float] | None = None
    fields: list[MagnetField] = []
    psi = 0j
    interval_fields: dict[int, tuple[MagnetField, ...]] = {}
    remanence: dict[int, tuple[npt.NDArray[np.float64], ...]] = {}
    waveforms: dict[int, Waveform] = {}

    for idx, iv in enumerate(plan.intervals):
        n = max(1, round(iv.duration * samples_per_period))
        t_abs = np.empty(n)
        psi_a = np.empty(n)
        for k in range(n):
            currents = iv.currents(k * dt)
            if currents != last_currents:
                try:
                    fields = solve_assembly(assembly, *currents)
                except SolverError as ex:
                    raise ProtocolError(f"interval {idx} ({iv.label}) at i_d={currents[0]}, i_q={currents[1]}: {ex}") from ex
                psi = flux_phasor(assembly, fields)
                last_currents = currents
            t_abs[k] = (step + k) * dt
            psi_a[k] = phase_a_flux(psi, np.array([omega * t_abs[k]]), assembly.harmonic_3)[0]
        step += n
        remanence[idx] = tuple(m.remanence for m in assembly.magnets)
        interval_fields[idx] = tuple(fields)
        if idx in (2, 4):
            if n < samples_per_period:
                raise ProtocolError(f"interval {idx} is shorter than one electrical period")
            # Fundamentals come from the last full period of the interval.
            w = slice(n - samples_per_period, n)
            waveforms[idx] = Waveform(t_abs[w], psi_a[w], -periodic_derivative(psi_a[w], dt))

    psi2 = fundamental(waveforms[2].psi, waveforms[2].t)
    psi4 = fundamental(waveforms[4].psi, waveforms[4].t)
    e2 = fundamental(waveforms[2].emf, waveforms[2].t)
    e4 = fundamental(waveforms[4].emf, waveforms[4].t)
    delta = phase_shift(psi4, psi2)
    delta_emf = phase_shift(e4, e2)
    lcf = _lcf_report(interval_fields[3], assembly)
    ms = metrics.MsReport(
        **lcf,
        ms_flux=metrics.ms_flux(psi4.amplitude, psi2.amplitude, delta),
        ms_emf=metrics.ms_emf(e4.amplitude, e2.amplitude, delta_emf),
    )
    i_d, i_q = plan.intervals[3].currents(0.0)
    return RunResult(
        i_d=i_d,
        i_q=i_q,
        psi_fund_2=psi2,
        psi_fund_4=psi4,
        e_fund_2=e2,
        e_fund_4=e4,
        delta=delta,
        delta_emf=delta_emf,
        interval_fields=interval_fields,
        remanence=remanence,
        ms=ms,
        waveforms=waveforms,
    )


def run_protocol(config: Config, i_d_load: float, i_q_load: float) -> RunResult:
    """One full protocol run on a fresh assembly built from the config."""
    plan = IntervalPlan.standard(i_d_load, i_q_load, config.protocol.pulse_current_A, config.protocol.durations)
    return run_plan(config.build_assembly(), plan, config.protocol.samples_per_period)
