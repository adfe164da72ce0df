"""
Load lines and operating-point solving.

The external circuit seen by a magnet is the straight line

    B = -mu0 * PC * (H - shift)

where PC is the permeance coefficient and shift = N*i_d/l_m is the armature MMF expressed as an equivalent
field in the magnet. With shift = 0 this is the open-circuit line.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

from .material import MagnetState, RecoilCurve, mu_0

TOL_B = 1e-9  # Operating-point residual [tesla]
MAX_ITER = 200
BRACKET_WIDTH = 10.0  # Initial bracket half-width in units of iHc
BRACKET_DOUBLINGS = 4


class SolverError(RuntimeError):
    pass


def permeance_coefficient(l_m: float, l_g: float, A_m: float, A_g: float) -> float:
    """PC = (l_m*A_g) / (l_g*A_m)."""
    for label, v in (("l_m", l_m), ("l_g", l_g), ("A_m", A_m), ("A_g", A_g)):
        if not v > 0:
            raise ValueError(f"{label} must be positive, got {v}")
    return (l_m * A_g) / (l_g * A_m)


@dataclasses.dataclass(frozen=True)
class LoadLine:
    pc: float
    mmf_shift: float = 0.0
    """Armature MMF as an equivalent magnet field N*i_d/l_m [ampere/meter]."""

    def __post_init__(self) -> None:
        if not (self.pc > 0 and math.isfinite(self.pc)):
            raise ValueError(f"pc must be positive, got {self.pc}")
        if not math.isfinite(self.mmf_shift):
            raise ValueError(f"mmf_shift must be finite, got {self.mmf_shift}")

    @staticmethod
    def from_geometry(l_m: float, l_g: float, A_m: float, A_g: float, N: float = 0.0, i_d: float = 0.0) -> LoadLine:
        return LoadLine(permeance_coefficient(l_m, l_g, A_m, A_g), N * i_d / l_m)

    def B(self, H: float) -> float:
        return -mu_0 * self.pc * (H - self.mmf_shift)


def load_line_B(line: LoadLine, H: float) -> float:
    return line.B(H)


def bisect_increasing(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float,
    max_iter: int = MAX_ITER,
) -> float:
    """
    Root of a non-decreasing function on [lo, hi] with f(lo) <= 0 <= f(hi).
    Stops once |f| < tol or the bracket cannot be split any further in floating point.
    """
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo > 0 or f_hi < 0:
        raise SolverError(f"root not bracketed in [{lo!r}, {hi!r}]: f={f_lo!r}, {f_hi!r}")
    if abs(f_lo) < tol:
        return lo
    if abs(f_hi) < tol:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo if abs(f_lo) <= abs(f_hi) else hi
        f_mid = f(mid)
        if abs(f_mid) < tol:
            return mid
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    raise SolverError(f"bisection did not converge in {max_iter} iterations; last bracket [{lo!r}, {hi!r}]")


def solve_operating_point(state: MagnetState, line: LoadLine, *, tol: float = TOL_B) -> tuple[float, float]:
    """
    Intersection of the element's recoil characteristic with the load line, returned as (H_m, B_m).
    The magnet curve is non-decreasing and the load line strictly decreasing, so the root is unique.
    Pure: the state is not touched.
    """
    curve = RecoilCurve(state)
    line_B = line.B

    def residual(H: float) -> float:
        return curve.B(H) - line_B(H)

    half = BRACKET_WIDTH * state.spec.iHc
    for _ in range(BRACKET_DOUBLINGS + 1):
        lo = line.mmf_shift - half
        hi = line.mmf_shift + half
        if residual(lo) <= 0 <= residual(hi):
            break
        half *= 2
    else:
        raise SolverError(
            f"curve and load line do not cross in [{lo:.6g}, {hi:.6g}] A/m "
            f"(pc={line.pc}, shift={line.mmf_shift}, remanence={state.remanence})"
        )
    H = bisect_increasing(residual, lo, hi, tol=tol)
    return H, curve.B(H)
