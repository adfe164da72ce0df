"""
Independent reference computations for the tests. Nothing here imports the solver or the hysteresis update;
curves are written out from the asymptote formulas and roots/excursions are found by dense scanning.
"""

from __future__ import annotations

import math

import numpy as np

MU0 = 4e-7 * math.pi


def sharp_J(H, Br, iHc, mu_rec, mu_g):
    """Descending branch with a sharp knee: min of the recoil and droop asymptotes."""
    H = np.asarray(H, dtype=float)
    return np.minimum(Br + MU0 * (mu_rec - 1) * H, MU0 * (mu_g - 1) * (H + iHc))


def knee(Br, iHc, mu_rec, mu_g):
    """Asymptote crossing (H, J), solved by hand: Br + a*H = b*(H + iHc)."""
    a = MU0 * (mu_rec - 1)
    b = MU0 * (mu_g - 1)
    H = (Br - b * iHc) / (b - a)
    return H, Br + a * H


def scan_excursion(rem0, H_end, Br, iHc, mu_rec, mu_g, n=1_000_001):
    """
    Remanence after sweeping H monotonically from 0 to H_end (<0) and back to 0, by walking a dense grid and
    pulling the recoil line down onto the sharp branch whenever it pokes above it.
    """
    a = MU0 * (mu_rec - 1)
    H = np.linspace(0.0, H_end, n)
    upper = sharp_J(H, Br, iHc, mu_rec, mu_g) - a * H  # recoil intercept of the branch point at each H
    return float(max(min(rem0, upper.min()), -Br))


def fillet_sag(Br, iHc, mu_rec, mu_g, R):
    """
    Vertical gap at the knee between the asymptotes and a circle of radius R tangent to both, in the
    (H, J/mu0) plane. The circle centre is found by solving the two offset-line equations.
    """
    a = mu_rec - 1
    b = mu_g - 1
    Mr = Br / MU0
    # Lines as n.x = c with unit normals pointing away from the centre side (above the curve).
    # Line 1: M - a*H = Mr ; Line 2: M - b*H = b*iHc
    n1 = np.array([-a, 1.0]) / math.hypot(a, 1.0)
    c1 = Mr / math.hypot(a, 1.0)
    n2 = np.array([-b, 1.0]) / math.hypot(b, 1.0)
    c2 = b * iHc / math.hypot(b, 1.0)
    # Centre lies below line 1 and to the right of (below) line 2 at distance R from both.
    centre = np.linalg.solve(np.array([n1, n2]), np.array([c1 - R, c2 - R]))
    Hk, Jk = knee(Br, iHc, mu_rec, mu_g)
    dh = Hk - centre[0]
    top = centre[1] + math.sqrt(R * R - dh * dh)
    return Jk - MU0 * top


def scan_root(f, lo, hi, n=1_000_001):
    """Sign change of a vectorized non-decreasing function on a dense grid, refined by linear interpolation."""
    H = np.linspace(lo, hi, n)
    v = f(H)
    k = int(np.searchsorted(v, 0.0))
    if k == 0 or k == n:
        raise ValueError("no sign change in scan range")
    h0, h1, v0, v1 = H[k - 1], H[k], v[k - 1], v[k]
    return h0 - v0 * (h1 - h0) / (v1 - v0)


def sharp_recoil_B(H, rem, Br, iHc, mu_rec, mu_g):
    """Recoil line of a sharp-knee magnet clipped into the major loop (vectorized)."""
    a = MU0 * (mu_rec - 1)
    H = np.asarray(H, dtype=float)
    hi = np.clip(sharp_J(H, Br, iHc, mu_rec, mu_g) - a * H, -Br, Br)
    lo = -np.clip(sharp_J(-H, Br, iHc, mu_rec, mu_g) + a * H, -Br, Br)
    r = np.clip(rem, lo, hi)
    return r + MU0 * mu_rec * H, lo, hi


def sharp_element_step(rem, pc, shift, Br, iHc, mu_rec, mu_g):
    """Operating point and new remanence of one sharp-knee element, by dense scanning. Returns (H, B, rem)."""
    span = 10 * iHc + abs(shift)

    def resid(H):
        B, _, _ = sharp_recoil_B(H, rem, Br, iHc, mu_rec, mu_g)
        return B + MU0 * pc * (H - shift)

    H = scan_root(resid, shift - span, shift + span)
    B, lo, hi = sharp_recoil_B(H, rem, Br, iHc, mu_rec, mu_g)
    return float(H), float(B), float(np.clip(rem, lo, hi))
