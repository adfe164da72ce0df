"""
Major-loop and recoil-line model of semi-hard (LCF) and hard (HCF) permanent magnets.

The descending major branch is built in the J-H plane from two asymptotes:

    recoil line   J = Jr + mu0*(mu_rec - 1)*H
    droop line    J = mu0*(mu_g - 1)*(H + iHc)

joined at the knee by a circular fillet of radius R. The fillet lives in the (H, J/mu0) plane, where both
axes are in ampere/meter, which is what gives the round radius its A/m unit. The ascending branch is the
point reflection of the descending one.

The hysteresis history of a magnet element is a single number: the H = 0 intercept of its active recoil line
(the current remanence). Everything else follows from it.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Union

import numpy as np
import numpy.typing as npt

mu_0 = 4e-7 * math.pi  # Vacuum permeability [henry/meter]

ArrayLike = Union[float, npt.NDArray[np.float64]]


@dataclasses.dataclass(frozen=True)
class MagnetSpec:
    """
    Immutable material parameters.

        Symbol  Description                         Unit
        Br      remanence                           tesla
        iHc     intrinsic coercivity (magnitude)    ampere/meter
        mu_rec  recoil relative permeability        dimensionless
        mu_g    drooping relative permeability      dimensionless
        R       knee round radius                   ampere/meter
    """

    name: str
    Br: float
    iHc: float
    mu_rec: float
    mu_g: float
    R: float = 0.0
    note: str = ""

    def __post_init__(self) -> None:
        if not (self.Br > 0 and math.isfinite(self.Br)):
            raise ValueError(f"{self.name}: Br invalid: {self.Br}")
        if not (self.iHc > 0 and math.isfinite(self.iHc)):
            raise ValueError(f"{self.name}: iHc invalid: {self.iHc}")
        if not self.mu_rec >= 1:
            raise ValueError(f"{self.name}: mu_rec invalid: {self.mu_rec}")
        if not self.mu_g > self.mu_rec:
            raise ValueError(f"{self.name}: mu_g must exceed mu_rec: {self.mu_g} <= {self.mu_rec}")
        if not self.R >= 0:
            raise ValueError(f"{self.name}: R invalid: {self.R}")
        # The two asymptotes must cross in the second quadrant, otherwise there is no knee.
        if mu_0 * (self.mu_g - 1) * self.iHc <= self.Br:
            raise ValueError(f"{self.name}: droop line does not pass above Br at H=0; increase mu_g or iHc")

    @property
    def Jr(self) -> float:
        """Remanent polarization; equal to Br because J = B at H = 0."""
        return self.Br

    @functools.cached_property
    def loop(self) -> MajorLoop:
        return MajorLoop.of(self)

    def replace(self, **changes: object) -> MagnetSpec:
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]


@dataclasses.dataclass(frozen=True)
class MajorLoop:
    """
    Derived geometry of the descending branch. Slopes are in tesla per A/m (J-H plane).
    Fillet quantities are in the (H, M) plane with M = J/mu0 so that R keeps its A/m meaning.
    """

    Jr: float
    iHc: float
    recoil_slope: float
    droop_slope: float
    knee_H: float
    knee_J: float
    fillet_H_lo: float
    """H at the tangent point on the droop asymptote; below it the branch is exactly the droop line."""
    fillet_H_hi: float
    """H at the tangent point on the recoil asymptote; above it the branch is exactly the recoil line."""
    center_H: float
    center_M: float
    R: float

    @staticmethod
    def of(spec: MagnetSpec) -> MajorLoop:
        return _major_loop(spec.Br, spec.iHc, spec.mu_rec, spec.mu_g, spec.R)

    @property
    def sag(self) -> float:
        """Vertical gap between the asymptote crossing and the rounded branch [tesla]."""
        return self.knee_J - float(self.descending_J(self.knee_H))

    def recoil_asymptote(self, H: ArrayLike) -> ArrayLike:
        return self.Jr + self.recoil_slope * H

    def droop_asymptote(self, H: ArrayLike) -> ArrayLike:
        return self.droop_slope * (H + self.iHc)

    def piecewise_J(self, H: ArrayLike) -> ArrayLike:
        """The sharp-knee branch, i.e., min of the two asymptotes."""
        return np.minimum(self.recoil_asymptote(H), self.droop_asymptote(H))

    def descending_J(self, H: ArrayLike) -> ArrayLike:
        if np.ndim(H) == 0:
            return self._descending_J_scalar(float(H))  # type: ignore[arg-type]
        H = np.asarray(H, dtype=np.float64)
        out = np.minimum(self.recoil_asymptote(H), self.droop_asymptote(H))
        if self.R > 0:
            on_arc = (H > self.fillet_H_lo) & (H < self.fillet_H_hi)
            dh = H[on_arc] - self.center_H
            out[on_arc] = mu_0 * (self.center_M + np.sqrt(np.maximum(self.R**2 - dh * dh, 0.0)))
        return out

    def _descending_J_scalar(self, H: float) -> float:
        if self.R > 0 and self.fillet_H_lo < H < self.fillet_H_hi:
            dh = H - self.center_H
            return mu_0 * (self.center_M + math.sqrt(max(self.R * self.R - dh * dh, 0.0)))
        return min(self.Jr + self.recoil_slope * H, self.droop_slope * (H + self.iHc))

    def ascending_J(self, H: ArrayLike) -> ArrayLike:
        return -self.descending_J(-H)

    def max_remanence(self, H: float) -> float:
        """
        Upper bound on the recoil intercept of a magnet currently exposed to H.
        A recoil line above the descending branch at H is pulled down onto it.
        """
        if self.R > 0 and self.fillet_H_lo < H < self.fillet_H_hi:
            r = self._descending_J_scalar(H) - self.recoil_slope * H
        else:
            # Intercepts of the two asymptotes taken directly, so that the recoil region yields exactly Jr.
            r = min(self.Jr, self.droop_slope * (H + self.iHc) - self.recoil_slope * H)
        return min(max(r, -self.Jr), self.Jr)

    def min_remanence(self, H: float) -> float:
        return -self.max_remanence(-H)

    def admissible_remanence(self, remanence: float, H: float) -> float:
        # Median rather than clip: when the bounds touch at saturation they may cross by rounding error,
        # and the median of non-decreasing functions stays non-decreasing.
        lo = self.min_remanence(H)
        hi = self.max_remanence(H)
        return sorted((lo, remanence, hi))[1]


def _major_loop(Jr: float, iHc: float, mu_rec: float, mu_g: float, R: float) -> MajorLoop:
    a = mu_rec - 1.0
    b = mu_g - 1.0
    Mr = Jr / mu_0
    knee_H = (Mr - b * iHc) / (b - a)
    knee_M = Mr + a * knee_H
    if R == 0:
        return MajorLoop(
            Jr=Jr,
            iHc=iHc,
            recoil_slope=mu_0 * a,
            droop_slope=mu_0 * b,
            knee_H=knee_H,
            knee_J=mu_0 * knee_M,
            fillet_H_lo=knee_H,
            fillet_H_hi=knee_H,
            center_H=knee_H,
            center_M=knee_M,
            R=0.0,
        )
    # Unit rays from the knee: along the recoil asymptote toward +H, along the droop asymptote toward -H.
    n1 = math.hypot(1.0, a)
    n2 = math.hypot(1.0, b)
    u1 = (1.0 / n1, a / n1)
    u2 = (-1.0 / n2, -b / n2)
    cos_angle = u1[0] * u2[0] + u1[1] * u2[1]
    half = 0.5 * math.acos(max(-1.0, min(1.0, cos_angle)))
    tangent_dist = R / math.tan(half)
    bis = (u1[0] + u2[0], u1[1] + u2[1])
    nb = math.hypot(*bis)
    center_dist = R / math.sin(half)
    return MajorLoop(
        Jr=Jr,
        iHc=iHc,
        recoil_slope=mu_0 * a,
        droop_slope=mu_0 * b,
        knee_H=knee_H,
        knee_J=mu_0 * knee_M,
        fillet_H_lo=knee_H + tangent_dist * u2[0],
        fillet_H_hi=knee_H + tangent_dist * u1[0],
        center_H=knee_H + center_dist * bis[0] / nb,
        center_M=knee_M + center_dist * bis[1] / nb,
        R=R,
    )


def major_descending_J(spec: MagnetSpec, H: ArrayLike) -> ArrayLike:
    """Polarization on the descending branch of the major loop (fully magnetized magnet)."""
    return spec.loop.descending_J(H)


def major_descending_B(spec: MagnetSpec, H: ArrayLike) -> ArrayLike:
    """B = J + mu0*H on the descending branch; strictly increasing in H."""
    if np.ndim(H):
        H = np.asarray(H, dtype=np.float64)
    return spec.loop.descending_J(H) + mu_0 * H


def major_ascending_J(spec: MagnetSpec, H: ArrayLike) -> ArrayLike:
    return spec.loop.ascending_J(H)


@dataclasses.dataclass
class MagnetState:
    """
    Hysteresis state of one magnet element: the H = 0 intercept of the active recoil line (signed, tesla).
    Negative remanence means the element's pole is reversed.
    """

    spec: MagnetSpec
    remanence: float = 0.0

    def __post_init__(self) -> None:
        if abs(self.remanence) > self.spec.Jr:
            raise ValueError(f"|remanence| {self.remanence} exceeds Jr {self.spec.Jr}")

    def copy(self) -> MagnetState:
        return MagnetState(self.spec, self.remanence)


class RecoilCurve:
    """
    B(H) characteristic of an element in a fixed hysteresis state: the recoil line, clamped between the major
    branches. Cached loop geometry keeps the scalar evaluations cheap; the solver calls this a lot.
    """

    __slots__ = ("loop", "remanence", "mu0_mu_rec", "_slope")

    def __init__(self, state: MagnetState) -> None:
        self.loop = state.spec.loop
        self.remanence = state.remanence
        self.mu0_mu_rec = mu_0 * state.spec.mu_rec
        self._slope = self.loop.recoil_slope

    def B(self, H: float) -> float:
        r = self.loop.admissible_remanence(self.remanence, H)
        return r + self.mu0_mu_rec * H

    def J(self, H: float) -> float:
        return self.B(H) - mu_0 * H


def recoil_B(state: MagnetState, H: ArrayLike) -> ArrayLike:
    """Flux density on the element's current recoil line, never outside the major loop."""
    curve = RecoilCurve(state)
    if np.ndim(H) == 0:
        return curve.B(float(H))  # type: ignore[arg-type]
    return np.array([curve.B(float(h)) for h in np.ravel(H)]).reshape(np.shape(H))


def update_state(state: MagnetState, H_m: float) -> MagnetState:
    """
    Moves the recoil line after the element has been exposed to H_m. If the recoil line passes above the
    descending branch at H_m (demagnetizing excursion past the knee), the operating point is dragged down the
    branch and the remanence drops; symmetrically, crossing the ascending branch raises it. Otherwise nothing
    changes. Idempotent for a repeated H_m.
    """
    r = state.spec.loop.admissible_remanence(state.remanence, float(H_m))
    return MagnetState(state.spec, r)


# The catalog only gives qualitative drooping-permeability levels. They are mapped to the ratio
# q = mu0*(mu_g - 1)*iHc / Jr, i.e., how far above Jr the droop asymptote sits at H = 0.
# "High" reproduces the studied LCF magnet (mu_g = 100 at iHc = 110 kA/m, Br = 1 T).
_DROOP_LEVELS = {
    "high": mu_0 * 99.0 * 110e3 / 1.0,
    "low": 4.0,
    "negligible": 2.0,
}


def _mu_g_from_level(level: str, Br: float, iHc: float) -> float:
    return 1.0 + _DROOP_LEVELS[level] * Br / (mu_0 * iHc)


def _range_preset(name: str, iHc_kA: tuple[float, float], Br: tuple[float, float], mu_rec: float, droop: str, note: str) -> MagnetSpec:
    iHc = 0.5 * (iHc_kA[0] + iHc_kA[1]) * 1e3
    br = 0.5 * (Br[0] + Br[1])
    return MagnetSpec(name=name, Br=br, iHc=iHc, mu_rec=mu_rec, mu_g=_mu_g_from_level(droop, br, iHc), R=0.0, note=note)


PRESETS: dict[str, MagnetSpec] = {
    "studied-LCF": MagnetSpec(
        name="studied-LCF",
        Br=1.0,
        iHc=110e3,
        mu_rec=1.1,
        mu_g=100.0,
        R=100e3,
        note="LCF magnets 2-3 of the studied motor",
    ),
    "NdFeB-1.2T": MagnetSpec(
        name="NdFeB-1.2T",
        Br=1.2,
        iHc=900e3,
        mu_rec=1.05,
        mu_g=_mu_g_from_level("negligible", 1.2, 900e3),
        R=0.0,
        note="HCF magnet 1 of the studied motor; temp. sensitivity moderate to negative",
    ),
    "AlNiCo": _range_preset("AlNiCo", (40, 130), (0.6, 1.35), 4.0, "high", "temp. sensitivity very low"),
    "MnBi": _range_preset("MnBi", (100, 300), (0.4, 0.6), 1.2, "negligible", "positive temperature coefficient of coercivity"),
    "MnAl": _range_preset("MnAl", (60, 120), (0.5, 0.8), 1.3, "low", "temp. sensitivity moderate"),
    "FeCrCo": _range_preset("FeCrCo", (20, 60), (1.0, 1.4), 4.0, "low", "temp. sensitivity low"),
    # One-sided ranges in the table; the bound itself is used.
    "FeN": MagnetSpec(
        name="FeN",
        Br=1.0,
        iHc=240e3,
        mu_rec=1.1,
        mu_g=_mu_g_from_level("high", 1.0, 240e3),
        R=0.0,
        note="one-sided ranges (iHc < 240 kA/m, Br > 1.0 T) taken at the bound; temp. sensitivity very low",
    ),
}


def preset(name: str) -> MagnetSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; valid names: {', '.join(PRESETS)}") from None
