import numpy as np
import pytest

from memflux.circuit import LoadLine, SolverError, bisect_increasing, load_line_B, permeance_coefficient, solve_operating_point
from memflux.material import MagnetSpec, MagnetState, RecoilCurve, mu_0, preset

from . import oracles

# Linear magnet: the knee is pushed far beyond any field the tests reach.
LINEAR = MagnetSpec("linear", Br=1.0, iHc=1e8, mu_rec=1.1, mu_g=100.0)


def two_line(Br, mu_rec, pc, shift=0.0):
    """rem + mu0*mu_rec*H = -mu0*pc*(H - shift), solved by hand."""
    H = (mu_0 * pc * shift - Br) / (mu_0 * (mu_rec + pc))
    return H, Br + mu_0 * mu_rec * H


def test_permeance_coefficient():
    assert permeance_coefficient(4e-3, 0.85e-3, 1.0, 1.0) == pytest.approx(4.706, abs=5e-4)
    assert permeance_coefficient(1e-3, 1e-3, 2.0, 2.0) == 1.0
    assert permeance_coefficient(1.1e-3, 1e-3, 1.0, 1.0) == pytest.approx(1.1, rel=1e-15)
    with pytest.raises(ValueError):
        permeance_coefficient(0.0, 1e-3, 1.0, 1.0)
    with pytest.raises(ValueError):
        permeance_coefficient(1e-3, 1e-3, 1.0, -1.0)


def test_load_line():
    assert load_line_B(LoadLine(1.1), 0.0) == 0.0
    assert load_line_B(LoadLine(4.706), -100e3) == pytest.approx(mu_0 * 4.706 * 1e5, rel=1e-15)
    assert load_line_B(LoadLine(4.706), -100e3) == pytest.approx(0.5914, abs=1e-4)
    assert load_line_B(LoadLine(1.1, 50e3), 50e3) == 0.0
    line = LoadLine.from_geometry(l_m=4e-3, l_g=1e-3, A_m=1.0, A_g=1.0, N=60, i_d=-10)
    assert line.pc == 4.0
    assert line.mmf_shift == pytest.approx(60 * -10 / 4e-3)
    with pytest.raises(ValueError):
        LoadLine(0.0)


def test_solver_against_two_line_closed_form():
    H, B = solve_operating_point(MagnetState(LINEAR, 1.0), LoadLine(1.1))
    H0, B0 = two_line(1.0, 1.1, 1.1)
    assert B0 == pytest.approx(0.5, rel=1e-15)
    assert H0 == pytest.approx(-361.7e3, abs=100)
    assert B == pytest.approx(B0, rel=1e-6)
    assert H == pytest.approx(H0, rel=1e-6)


def test_demagnetized_element_sits_at_origin():
    H, B = solve_operating_point(MagnetState(preset("studied-LCF"), 0.0), LoadLine(3.0))
    assert abs(H) < 1e-3
    assert abs(B) < 1e-9


def test_ndfeb_open_circuit():
    spec = preset("NdFeB-1.2T")
    _, B = solve_operating_point(MagnetState(spec, 1.2), LoadLine(4.706))
    assert B == pytest.approx(4.706 * 1.2 / (1.05 + 4.706), rel=1e-8)
    assert B == pytest.approx(0.9812, abs=5e-4)


@pytest.mark.parametrize("shift", [-3e5, -5e4, 0.0, 2e4, 1e6])
@pytest.mark.parametrize("rem", [1.0, 0.4, -0.7])
def test_general_two_line_formula(shift, rem):
    H, B = solve_operating_point(MagnetState(LINEAR, rem), LoadLine(2.5, shift))
    H0, B0 = two_line(rem, 1.1, 2.5, shift)
    assert B == pytest.approx(B0, abs=2e-9)
    assert H == pytest.approx(H0, rel=1e-8, abs=1e-3)


@pytest.mark.parametrize("rem", [1.0, 0.76, 0.2, -0.5])
@pytest.mark.parametrize("pc,shift", [(4.7, 0.0), (3.76, -1.35e5), (5.64, 2e4), (1.1, 0.0)])
def test_root_matches_dense_scan(rem, pc, shift):
    spec = preset("studied-LCF").replace(R=0.0)
    H, B = solve_operating_point(MagnetState(spec, rem), LoadLine(pc, shift))

    def resid(h):
        b, _, _ = oracles.sharp_recoil_B(h, rem, 1.0, 110e3, 1.1, 100.0)
        return b + mu_0 * pc * (h - shift)

    H_ref = oracles.scan_root(resid, shift - 4e5, shift + 4e5)
    B_ref = -mu_0 * pc * (H_ref - shift)
    assert B == pytest.approx(B_ref, abs=1e-6)


@pytest.mark.parametrize("shift", [-1.2e5, 0.0, 3e4])
def test_shift_equivariance(shift):
    state = MagnetState(preset("studied-LCF"), 0.8)
    H, B = solve_operating_point(state, LoadLine(4.0, shift))
    curve = RecoilCurve(state)
    # Unshifted line against the curve translated by -shift.
    h = bisect_increasing(lambda x: curve.B(x + shift) + mu_0 * 4.0 * x, -2e6, 2e6, tol=1e-10)
    assert H == pytest.approx(h + shift, abs=1e-3)
    assert B == pytest.approx(curve.B(h + shift), abs=1e-9)


def test_bracket_failure_reports_endpoints():
    with pytest.raises(SolverError, match=r"\["):
        bisect_increasing(lambda x: x + 10.0, 0.0, 1.0, tol=1e-9)


def test_non_convergence_is_an_error():
    with pytest.raises(SolverError, match="converge"):
        bisect_increasing(lambda x: x - 0.3, 0.0, 1.0, tol=0.0, max_iter=5)


def test_solver_is_pure():
    state = MagnetState(preset("studied-LCF"), 1.0)
    solve_operating_point(state, LoadLine(1.1))
    assert state.remanence == 1.0


def test_solver_residual_below_tolerance():
    spec = preset("studied-LCF")
    for rem in np.linspace(-1, 1, 9):
        state = MagnetState(spec, float(rem))
        line = LoadLine(4.7, -1e5)
        H, B = solve_operating_point(state, line)
        assert abs(RecoilCurve(state).B(H) - line.B(H)) < 1e-9
