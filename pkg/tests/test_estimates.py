import numpy as np
import pytest

from sbo_lab import calculus as C
from sbo_lab import estimates as ES
from sbo_lab.grid import make_grid

TWO_PI = 2 * np.pi


def test_cutoff_chi_shape_and_smoothness():
    chi = ES.CutoffChi()
    r = np.linspace(-3, 3, 60001)
    vals = chi(r)
    assert np.all(vals[np.abs(r) <= 1] == 1.0) and np.all(vals[np.abs(r) >= 2] == 0.0)
    assert np.all((0 <= vals) & (vals <= 1))
    assert np.array_equal(vals, chi(-r))
    pos = r >= 0
    assert np.all(np.diff(vals[pos]) <= 0)
    h = r[1] - r[0]
    for order in (1, 2, 3):
        d = np.diff(vals, order) / h**order
        assert np.all(np.isfinite(d)) and np.max(np.abs(d)) < 1e3
    assert chi(np.array([1.5]))[0] == pytest.approx(0.5)


def test_projection_fixes_band_limited_and_kills_high_modes():
    g = make_grid(TWO_PI, 256)
    low = np.cos(3 * g.x) + 0.5 * np.sin(4 * g.x)
    assert np.max(np.abs(ES.bona_smith_project(g, low, 4) - low)) <= 1e-13
    high = np.cos(8 * g.x) + np.sin(11 * g.x)
    assert np.max(np.abs(ES.bona_smith_project(g, high, 4))) <= 1e-14
    with pytest.raises(ValueError):
        ES.bona_smith_project(g, low, 0.5)


def test_projection_triangle_and_contraction():
    g = make_grid(20.0, 512)
    f = np.exp(-((g.x - 10) ** 2))
    p4, p8 = ES.bona_smith_project(g, f, 4), ES.bona_smith_project(g, f, 8)
    n = lambda h: C.sobolev_norm(g, h, 0)
    assert n(p4 - p8) <= n(f - p4) + n(f - p8)
    for s in (0.0, 0.5, 2.0):
        assert C.sobolev_norm(g, p4, s) <= C.sobolev_norm(g, f, s)


def test_bona_smith_sigma_zero_growth_bounded():
    spec = ES.bona_smith_spec(1.5)
    rep = ES.bona_smith_rates(spec, 1.0, 0.0)
    full = C.sobolev_norm(make_grid(TWO_PI, 1024), spec.evaluate(make_grid(TWO_PI, 1024), real=True), 1.5)
    assert max(rep.growth) <= full * (1 + 1e-10)
    assert rep.contraction_ok
    with pytest.raises(ValueError):
        ES.bona_smith_rates(spec, 1.0, 1.5)


def test_bona_smith_gaussian_decays_fast():
    from sbo_lab.model import InitDataSpec

    spec = InitDataSpec("gaussian", amplitude=1.0, width=0.3, center=np.pi)
    rep = ES.bona_smith_rates(spec, 1.0, 0.5, ladder=(2, 4, 8))
    assert rep.decay_slope <= -0.5


def test_apriori_time():
    assert ES.apriori_time(0.0, 64.0) == pytest.approx(64.0**-2)
    assert ES.apriori_time(1.0, 64.0) == pytest.approx(128.0**-2)
    assert ES.apriori_time(2.0, 64.0) < ES.apriori_time(1.0, 64.0)
    with pytest.raises(ValueError):
        ES.apriori_time(1.0, 0.0)
    with pytest.raises(ValueError):
        ES.apriori_time(-1.0, 1.0)


def test_probe_field_is_grid_independent():
    a = ES.probe_field(make_grid(TWO_PI, 256), 3)
    b = ES.probe_field(make_grid(TWO_PI, 1024), 3)
    assert np.max(np.abs(b[::4] - a)) < 1e-12
    assert abs(a.mean()) < 1e-14


def test_lp_exact_for_trig():
    g = make_grid(TWO_PI, 64)
    f = np.cos(5 * g.x)
    assert ES.lp(g, f, 4) == pytest.approx((0.75 * np.pi) ** 0.25, rel=1e-13)
    assert ES.lp(g, f, 8) == pytest.approx((35 / 128 * TWO_PI) ** 0.125, rel=1e-13)


def test_probe_parameter_validation():
    with pytest.raises(ValueError):
        ES.probe_fractional_leibniz(0.5, 0.3, 0.3)
    with pytest.raises(ValueError):
        ES.probe_fractional_leibniz(0.5, 0.25, 0.25, 2, 4, 8)
    with pytest.raises(ValueError):
        ES.probe_kato_ponce(1.5, "I")
    with pytest.raises(ValueError):
        ES.probe_kato_ponce(0.5, "II", (2, np.inf, 2, np.inf, 2))
    with pytest.raises(ValueError):
        ES.probe_kato_ponce(0.5, "III")
    with pytest.raises(ValueError):
        ES.probe_calderon(-1, 0)
    with pytest.raises(ValueError):
        ES.probe_calderon(1, 1, 3)
    with pytest.raises(ValueError):
        ES.probe_sharp_commutation(0.5, 0.6)


def test_small_probe_is_deterministic():
    a = ES.probe_calderon(1, 0, 2, samples=5, seed=11)
    b = ES.probe_calderon(1, 0, 2, samples=5, seed=11)
    assert a == b
    assert a.constant_residual < 1e-12 and np.isfinite(a.max_ratio)


def test_sharp_commutator_of_constant_vanishes():
    g = make_grid(TWO_PI, 128)
    f = ES.probe_field(g, 1)
    assert np.max(np.abs(ES.sharp_commutator(g, f, np.full(128, 2.0), 0.0, 1.0))) < 1e-12
