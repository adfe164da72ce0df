"""Magnetization-state (MS) metrics: two material-level, two motor-level."""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

AMPLITUDE_FLOOR = 1e-12


class DegenerateReferenceError(ValueError):
    """The interval-2 reference fundamental vanishes, so the motor-level ratios are undefined."""


def _volume_average(values: Sequence[float], signs: Sequence[float] | None, volumes: Sequence[float] | None) -> float:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty element list")
    s = np.ones_like(v) if signs is None else np.asarray(signs, dtype=np.float64)
    w = np.ones_like(v) if volumes is None else np.asarray(volumes, dtype=np.float64)
    if s.shape != v.shape or w.shape != v.shape:
        raise ValueError(f"shape mismatch: values {v.shape}, signs {s.shape}, volumes {w.shape}")
    if np.any(w <= 0):
        raise ValueError("element volumes must be positive")
    return float(np.sum(v * s * w) / np.sum(w))


def ms_b(B: Sequence[float], Br: float, signs: Sequence[float] | None = None, volumes: Sequence[float] | None = None) -> float:
    """Volume integral of B along the magnetization direction, normalized by V_mag*Br."""
    if not Br > 0:
        raise ValueError(f"Br must be positive, got {Br}")
    return _volume_average(B, signs, volumes) / Br


def ms_j(J: Sequence[float], Jr: float, signs: Sequence[float] | None = None, volumes: Sequence[float] | None = None) -> float:
    """Same as ms_b for the polarization J = B - mu0*H, normalized by Jr."""
    if not Jr > 0:
        raise ValueError(f"Jr must be positive, got {Jr}")
    return _volume_average(J, signs, volumes) / Jr


def _ratio(after: float, reference: float, delta: float, what: str) -> float:
    if not abs(reference) > AMPLITUDE_FLOOR:
        raise DegenerateReferenceError(f"interval-2 {what} fundamental {reference!r} is below the floor")
    return math.cos(delta) * after / reference


def ms_flux(psi_fund_4: float, psi_fund_2: float, delta: float) -> float:
    """cos(delta) * Psi4/Psi2 with fundamental amplitudes of the phase flux linkage."""
    return _ratio(psi_fund_4, psi_fund_2, delta, "flux linkage")


def ms_emf(e_fund_4: float, e_fund_2: float, delta: float) -> float:
    """cos(delta) * E4/E2 with fundamental amplitudes of the back EMF."""
    return _ratio(e_fund_4, e_fund_2, delta, "back EMF")


@dataclasses.dataclass(frozen=True)
class MsReport:
    ms_b_m2: float
    ms_b_m3: float
    ms_j_m2: float
    ms_j_m3: float
    ms_b_lcf: float
    """Both LCF magnets integrated together."""
    ms_j_lcf: float
    ms_flux: float
    ms_emf: float
