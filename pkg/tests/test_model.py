import numpy as np
import pytest

from sbo_lab.calculus import sobolev_norm
from sbo_lab.grid import make_grid, remove_nyquist
from sbo_lab.io import write_snapshot
from sbo_lab.model import (
    DiffState,
    InitDataSpec,
    SboParams,
    SboState,
    choose_lambda,
    diff_rhs,
    joint_norm,
    make_state,
    rescale_initdata,
    rhs,
    scaling_norm_check,
    unscale_initdata,
    zero_spec,
)


def test_params_validate_lambda():
    with pytest.raises(ValueError, match=r"lambda must be in \(0,1\]"):
        SboParams(lam=1.5)
    with pytest.raises(ValueError, match=r"lambda must be in \(0,1\]"):
        SboParams(lam=0.0)
    assert SboParams(lam=0.25).lam == 0.25


def test_state_arrays_are_read_only_and_v_real():
    g = make_grid(10.0, 16)
    st = SboState(g, np.ones(16), np.ones(16) + 0j)
    assert st.v.dtype == float and st.u.dtype == complex
    with pytest.raises(ValueError):
        st.u[0] = 2.0
    with pytest.raises(ValueError):
        SboState(g, np.ones(8), np.ones(16))


def test_gaussian_is_periodized_around_center():
    g = make_grid(10.0, 64)
    f = InitDataSpec("gaussian", amplitude=2.0, width=0.5, center=0.0).evaluate(g)
    assert f[0] == pytest.approx(2.0)
    assert f[1] == pytest.approx(f[-1])


def test_plane_wave_requires_grid_mode():
    g = make_grid(10.0, 64)
    with pytest.raises(ValueError, match="not periodic"):
        InitDataSpec("plane-wave", wavenumber=1.0).evaluate(g)
    f = InitDataSpec("plane-wave", amplitude=0.5, wavenumber=float(g.k[2])).evaluate(g)
    assert np.max(np.abs(f - 0.5 * np.exp(1j * g.k[2] * g.x))) < 1e-14


def test_random_family_is_seeded_and_normalized():
    g = make_grid(2 * np.pi, 64)
    spec = InitDataSpec("random-band-limited", amplitude=1.0, kmax=5.0, seed=7)
    a, b = spec.evaluate(g), spec.evaluate(g)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, InitDataSpec("random-band-limited", kmax=5.0, seed=8).evaluate(g))
    # sum |c_n|^2 = 1 gives ||f||^2 = 2 pi on this grid
    assert sobolev_norm(g, a, 0.0) ** 2 == pytest.approx(2 * np.pi, rel=1e-12)


def test_file_family_reads_snapshot(tmp_path):
    g = make_grid(10.0, 32)
    st = make_state(g, InitDataSpec("gaussian", width=1.0, center=5.0), InitDataSpec("gaussian", width=2.0))
    path = tmp_path / "s.sbo"
    write_snapshot(path, st)
    u = InitDataSpec("file", path=str(path), component="u").evaluate(make_grid(10.0, 64))
    # the interpolant omits the unpaired Nyquist mode
    assert np.max(np.abs(u[::2] - remove_nyquist(g, st.u))) < 1e-14
    with pytest.raises(ValueError):
        InitDataSpec("file")


def test_rhs_of_plane_wave():
    g = make_grid(100.0, 64)
    A, c, k = 0.7, 0.3, float(g.k[2])
    p = SboParams(beta=1.5, rho=1.0)
    st = make_state(g, InitDataSpec("plane-wave", amplitude=A, wavenumber=k), InitDataSpec("plane-wave", amplitude=c))
    du, dv = rhs(st, p)
    omega = k**2 + c + 1.5 * A**2
    assert np.max(np.abs(du + 1j * omega * st.u)) < 1e-13
    assert np.max(np.abs(dv)) < 1e-14


def test_difference_rhs_is_difference_of_rhs():
    g = make_grid(20.0, 64)
    p = SboParams(beta=0.7, rho=1.3, lam=0.5)
    a = make_state(g, InitDataSpec("gaussian", amplitude=0.4, width=1.5, center=9.0, wavenumber=1.0),
                   InitDataSpec("gaussian", amplitude=0.3, width=2.0, center=10.0))
    b = make_state(g, InitDataSpec("gaussian", amplitude=0.35, width=1.2, center=11.0),
                   InitDataSpec("gaussian", amplitude=0.25, width=1.8, center=9.5))
    dw, dz = diff_rhs(DiffState.from_pair(a, b), p)
    ua, va = rhs(a, p)
    ub, vb = rhs(b, p)
    assert np.max(np.abs(dw - (ua - ub))) < 1e-13
    assert np.max(np.abs(dz - (va - vb))) < 1e-13


def test_rescale_scales_l2_norm_by_sqrt_lambda():
    g = make_grid(100.0, 512)
    spec = InitDataSpec("gaussian", amplitude=0.3, width=2.0, center=50.0, wavenumber=1.0)
    for lam in (0.5, 0.125):
        gl = make_grid(g.L / lam, g.N)
        ratio = sobolev_norm(gl, rescale_initdata(spec, lam).evaluate(gl), 0) / sobolev_norm(g, spec.evaluate(g), 0)
        assert ratio == pytest.approx(np.sqrt(lam), rel=1e-12)
        assert unscale_initdata(rescale_initdata(spec, lam), lam) == spec
    with pytest.raises(ValueError, match=r"lambda must be in \(0,1\]"):
        rescale_initdata(spec, 2.0)


def test_choose_lambda_meets_target():
    u0 = InitDataSpec("gaussian", amplitude=1.0, width=1.0, wavenumber=2.0)
    v0 = InitDataSpec("gaussian", amplitude=1.0, width=1.0)
    g = make_grid(50.0, 256)
    lam = choose_lambda(u0, v0, 0.05, 1.0, g)
    assert lam < 1
    gl = make_grid(g.L / lam, g.N)
    assert joint_norm(gl, rescale_initdata(u0, lam).evaluate(gl),
                      rescale_initdata(v0, lam).evaluate(gl, real=True), 1.0) <= 0.05
    gl2 = make_grid(g.L / (2 * lam), g.N)
    assert joint_norm(gl2, rescale_initdata(u0, 2 * lam).evaluate(gl2),
                      rescale_initdata(v0, 2 * lam).evaluate(gl2, real=True), 1.0) > 0.05
    with pytest.raises(ValueError):
        choose_lambda(u0, v0, 0.0, 1.0, g)


def test_scaling_norm_check_reports_sqrt_lambda_for_l2():
    u0 = InitDataSpec("gaussian", amplitude=0.1, width=2.0, center=50.0)
    rep = scaling_norm_check(u0, u0, 0.25, 1.0, make_grid(100.0, 512))
    assert rep.u_l2_ratio == pytest.approx(0.5, rel=1e-10)
    assert rep.v_l2_ratio == pytest.approx(0.5, rel=1e-10)
    assert 0 < rep.u_ratio < 1 and 0 < rep.v_ratio < 1


def test_zero_spec():
    g = make_grid(10.0, 16)
    assert np.all(zero_spec().evaluate(g) == 0)
