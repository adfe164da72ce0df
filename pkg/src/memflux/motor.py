"""
Lumped pole assembly: one equivalent HCF magnet and two LCF magnets, each split into elements with their own
permeance coefficient. Stator currents enter as a shift of each element's load line; the resulting magnet
flux is collapsed into a single flux-linkage phasor from which the phase-A waveforms are synthesized.
"""

from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np
import numpy.typing as npt

from .circuit import LoadLine, SolverError, solve_operating_point
from .material import MagnetSpec, MagnetState, mu_0, update_state

HCF, LCF2, LCF3 = 0, 1, 2
MAGNET_LABELS = ("magnet-1 (HCF)", "magnet-2 (LCF)", "magnet-3 (LCF)")


@dataclasses.dataclass
class MagnetInstance:
    spec: MagnetSpec
    elements: list[MagnetState]
    pc: list[float]
    """Permeance coefficient of each element."""
    l_m: float
    """Magnet length along magnetization [meter]."""
    A_m: float
    """Magnet cross-section [meter^2]; each element carries A_m/n of it."""
    k_d: float
    k_q: float
    alpha: float
    """Electrical angle of this magnet's contribution to the flux phasor [radian]."""
    leakage: float = 1.0
    active: bool = True
    direction: float = 1.0
    """Sign of the magnetization direction n_m relative to the pole axis."""

    def __post_init__(self) -> None:
        if not self.elements:
            raise ValueError("a magnet needs at least one element")
        if len(self.pc) != len(self.elements):
            raise ValueError(f"{len(self.pc)} pc values for {len(self.elements)} elements")
        if any(not p > 0 for p in self.pc):
            raise ValueError(f"pc values must be positive: {self.pc}")
        if not 0 < self.leakage <= 1:
            raise ValueError(f"leakage factor must be in (0, 1], got {self.leakage}")
        if self.direction not in (-1.0, 1.0):
            raise ValueError(f"direction must be +1 or -1, got {self.direction}")

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def element_volumes(self) -> npt.NDArray[np.float64]:
        return np.full(self.n, self.A_m * self.l_m / self.n)

    @property
    def remanence(self) -> npt.NDArray[np.float64]:
        return np.array([e.remanence for e in self.elements])


@dataclasses.dataclass
class PoleAssembly:
    magnets: list[MagnetInstance]
    turns_per_pole: float
    pole_pairs: int
    rated_speed: float
    """[rev/min]"""
    phase_turns: float
    harmonic_3: float = 0.0

    def __post_init__(self) -> None:
        if len(self.magnets) != 3:
            raise ValueError(f"expected [HCF, LCF-2, LCF-3], got {len(self.magnets)} magnets")

    @property
    def electrical_frequency(self) -> float:
        return self.rated_speed / 60.0 * self.pole_pairs

    def copy(self) -> PoleAssembly:
        magnets = [dataclasses.replace(m, elements=[e.copy() for e in m.elements], pc=list(m.pc)) for m in self.magnets]
        return dataclasses.replace(self, magnets=magnets)


@dataclasses.dataclass(frozen=True)
class MagnetField:
    H: npt.NDArray[np.float64]
    B: npt.NDArray[np.float64]
    J: npt.NDArray[np.float64]
    remanence: npt.NDArray[np.float64]
    """Recoil intercept of each element after the update at this operating point."""


def applied_field(inst: MagnetInstance, assembly: PoleAssembly, i_d: float, i_q: float) -> float:
    """Load-line shift (N/l_m)*(k_d*i_d + k_q*i_q) seen by the magnet [ampere/meter]."""
    return assembly.turns_per_pole / inst.l_m * (inst.k_d * i_d + inst.k_q * i_q)


def solve_assembly(assembly: PoleAssembly, i_d: float, i_q: float) -> list[MagnetField]:
    """
    Solves every element at the given rotor-frame currents and moves its recoil line accordingly.
    Elements are independent of each other, so the order does not matter.
    """
    out = []
    for mi, inst in enumerate(assembly.magnets):
        shift = applied_field(inst, assembly, i_d, i_q)
        n = inst.n
        H = np.empty(n)
        B = np.empty(n)
        for k, (state, pc) in enumerate(zip(inst.elements, inst.pc)):
            try:
                H[k], B[k] = solve_operating_point(state, LoadLine(pc, shift))
            except SolverError as ex:
                raise SolverError(f"{MAGNET_LABELS[mi]} element {k}: {ex}") from ex
            inst.elements[k] = update_state(state, H[k])
        out.append(MagnetField(H=H, B=B, J=B - mu_0 * H, remanence=inst.remanence))
    return out


def flux_phasor(assembly: PoleAssembly, fields: list[MagnetField]) -> complex:
    """Phase flux-linkage phasor [weber]: phase_turns * sum(leakage * mean(B) * A_m * exp(j*alpha))."""
    psi = 0j
    for inst, f in zip(assembly.magnets, fields):
        if not inst.active:
            continue
        psi += inst.leakage * float(np.mean(f.B)) * inst.direction * inst.A_m * cmath.exp(1j * inst.alpha)
    return assembly.phase_turns * psi


def phase_a_flux(psi: complex, theta: npt.NDArray[np.float64], harmonic_3: float = 0.0) -> npt.NDArray[np.float64]:
    amp = abs(psi)
    ang = cmath.phase(psi)
    out = amp * np.cos(theta + ang)
    if harmonic_3:
        out += harmonic_3 * amp * np.cos(3 * theta + 3 * ang)
    return out


def periodic_derivative(y: npt.NDArray[np.float64], dt: float) -> npt.NDArray[np.float64]:
    """Central difference of one period of a periodic signal, wrapping at the ends."""
    return (np.roll(y, -1) - np.roll(y, 1)) / (2 * dt)


def synth_waveforms(
    psi: complex,
    samples_per_period: int,
    speed: float,
    pole_pairs: int,
    harmonic_3: float = 0.0,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    One electrical period of phase-A flux linkage and back EMF E = -dPsi/dt.
    Returns (t, psi_a, e_a) with t in seconds.
    """
    if samples_per_period < 64:
        raise ValueError(f"samples_per_period must be at least 64, got {samples_per_period}")
    f_e = speed / 60.0 * pole_pairs
    dt = 1.0 / (f_e * samples_per_period)
    k = np.arange(samples_per_period)
    theta = 2 * math.pi * k / samples_per_period
    psi_a = phase_a_flux(psi, theta, harmonic_3)
    return k * dt, psi_a, -periodic_derivative(psi_a, dt)
