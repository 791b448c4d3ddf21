import math

import numpy as np
import pytest

from sbo_lab import calculus as C
from sbo_lab import diagnostics as D
from sbo_lab.grid import make_grid
from sbo_lab.integrator import StepControls, Trajectory, evolve, evolve_pair_with_difference
from sbo_lab.model import DiffState, InitDataSpec, SboParams, SboState, make_state

P = SboParams()
TWO_PI = 2 * np.pi


def _gauss(N=256, L=50.0, amp=0.05):
    g = make_grid(L, N)
    return make_state(g, InitDataSpec("gaussian", amplitude=amp, width=2.0, center=L / 2, wavenumber=1.0),
                      InitDataSpec("gaussian", amplitude=amp, width=3.0, center=L / 2))


def test_conserved_quantities_of_zero():
    g = make_grid(TWO_PI, 32)
    assert D.conserved_quantities(SboState(g, np.zeros(32), np.zeros(32)), P) == (0, 0, 0, 0)


def test_conserved_quantities_of_sine():
    g = make_grid(TWO_PI, 32)
    e1, e2, e3, e4 = D.conserved_quantities(SboState(g, np.zeros(32), np.sin(g.x)), P)
    assert abs(e1) < 1e-14 and e2 == 0
    assert e3 == pytest.approx(np.pi / 2, rel=1e-14)
    assert e4 == pytest.approx(np.pi / 2, rel=1e-14)


def test_conserved_quantities_of_plane_wave():
    g = make_grid(TWO_PI, 32)
    A, k, c = 0.5, 3.0, 0.2
    st = SboState(g, A * np.exp(1j * k * g.x), np.full(32, c))
    e1, e2, e3, e4 = D.conserved_quantities(st, SboParams(beta=2.0))
    L = TWO_PI
    assert e1 == pytest.approx(c * L)
    assert e2 == pytest.approx(A**2 * L)
    assert e3 == pytest.approx(-k * A**2 * L + 0.5 * c**2 * L)
    assert e4 == pytest.approx(-c**3 * L / 6 + c * A**2 * L + A**4 * L + k**2 * A**2 * L)


def test_modified_energy_limits():
    st = _gauss()
    g = st.grid
    s = 1.0
    only_v = SboState(g, np.zeros(g.N), st.v)
    only_u = SboState(g, st.u, np.zeros(g.N))
    assert D.modified_energy(only_v, s) == pytest.approx(
        C.riesz_norm(g, st.v, 0) ** 2 + 0.5 * C.riesz_norm(g, st.v, s) ** 2, rel=1e-14)
    assert D.modified_energy(only_u, s) == pytest.approx(
        C.riesz_norm(g, st.u, 0) ** 2 + C.riesz_norm(g, st.u, s + 0.5) ** 2, rel=1e-14)
    with pytest.raises(ValueError):
        D.modified_energy(st, 0.4)


def test_cross_term_is_cubic_in_amplitude():
    amps = [1e-1, 1e-2, 1e-3, 1e-4]
    cross = [abs(D.modified_energy_parts(_gauss(amp=a), 1.0)[1]) for a in amps]
    slope = np.polyfit(np.log(amps), np.log(cross), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.05)


def test_coercivity():
    st = _gauss()
    g = st.grid
    r0 = D.coercivity_check(SboState(g, np.zeros(g.N), st.v), 1.0)
    assert r0.ratio == 0 and r0.holds
    small = D.coercivity_check(st, 1.0)
    assert small.holds and small.lower_ok and small.upper_ok
    ratios = [D.coercivity_check(_gauss(amp=a), 1.0).ratio for a in (0.5, 2, 8, 32)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 0.5


def test_time_derivative_exact_on_quartics():
    t = np.linspace(0, 1, 11)
    f = 3 * t**4 - t**3 + 2 * t
    assert np.max(np.abs(D.time_derivative(f, 0.1) - (12 * t**3 - 3 * t**2 + 2))) < 1e-10
    with pytest.raises(ValueError, match="too-coarse"):
        D.time_derivative(f[:4], 0.1)


def test_energy_rate_zero_solution_and_coarse_cadence():
    g = make_grid(TWO_PI, 32)
    zero = SboState(g, np.zeros(32), np.zeros(32))
    tr = evolve(zero, P, 0.05, StepControls(cadence=0.01))
    rep = D.energy_rate_check(tr, 1.0)
    assert rep.max_ratio == 0 and rep.max_ratio_unmodified == 0
    short = evolve(zero, P, 0.03, StepControls(cadence=0.01))
    with pytest.raises(ValueError, match="too-coarse"):
        D.energy_rate_check(short, 1.0)


def test_records_invariants_and_csv_row():
    tr = evolve(_gauss(amp=0.2), P, 0.2, StepControls(rel_tol=1e-9))
    recs = D.records(tr, P, 1.0)
    acc1 = [r.acc_L1 for r in recs]
    acc2 = [r.acc_L2sq for r in recs]
    assert all(b >= a for a, b in zip(acc1, acc1[1:])) and all(b >= a for a, b in zip(acc2, acc2[1:]))
    assert all(r.E2 >= 0 for r in recs)
    assert len(recs[0].row()) == len(D.CSV_COLUMNS)


def test_accumulators_stable_under_time_refinement():
    st = _gauss(amp=0.2)
    coarse = D.records(evolve(st, P, 0.5, StepControls(rel_tol=1e-8)), P, 1.0)[-1]
    fine = D.records(evolve(st, P, 0.5, StepControls(rel_tol=1e-11)), P, 1.0)[-1]
    assert abs(fine.acc_L1 - coarse.acc_L1) <= 1e-6 * fine.acc_L1
    assert abs(fine.acc_L2sq - coarse.acc_L2sq) <= 1e-6 * fine.acc_L2sq


def test_gronwall_checks():
    g = make_grid(TWO_PI, 32)
    zero = evolve(SboState(g, np.zeros(32), np.zeros(32)), P, 0.05)
    assert D.gronwall_check(zero, P, 1.0, 1e-3).holds
    linear = evolve(_gauss(amp=1e-6), P, 0.5)
    rep = D.gronwall_check(linear, P, 1.0, 1.0)
    assert rep.holds and rep.minimal_constant == 0.0


def test_strichartz_zero_v():
    g = make_grid(TWO_PI, 32)
    tr = evolve(SboState(g, np.zeros(32), np.zeros(32)), P, 0.05)
    rep = D.strichartz_check(tr, P, 1.0)
    assert rep.lhs == 0 and rep.ratio == 0


def test_diff_energies_trivial_cases():
    g = make_grid(TWO_PI, 64)
    zero = np.zeros(64)
    u = np.exp(1j * g.x)
    v = np.cos(2 * g.x)
    assert D.diff_energies(DiffState(g, zero, zero, u, v), 1.0) == (0.0, 0.0, 0.0)
    z = np.sin(3 * g.x)
    e0, es, fs = D.diff_energies(DiffState(g, zero, z, u, v), 1.0)
    assert e0 == pytest.approx(0.5 * C.riesz_norm(g, z, 0) ** 2, rel=1e-14)
    l2z, dsz = C.riesz_norm(g, z, 0), C.riesz_norm(g, z, 1.0)
    z_only = (D.sup_norm(g, C.riesz(g, C.deriv(g, v), 1.0)) * dsz * l2z
              + C.riesz_norm(g, v, 1.0) * dsz * D.sup_norm(g, C.deriv(g, z)))
    assert fs == pytest.approx(z_only, rel=1e-14)
    with pytest.raises(ValueError):
        D.diff_energies(DiffState(g, zero, z, u, v), 0.5)


def test_diff_coercivity_small_random():
    g = make_grid(TWO_PI, 64)
    rng = np.random.default_rng(5)
    for _ in range(10):
        c = rng.standard_normal((4, 64)) * 1e-2
        d = DiffState(g, c[0] + 1j * c[1], c[2], 0.1 * np.exp(1j * g.x), 0.1 * np.cos(g.x))
        e0, es, _ = D.diff_energies(d, 1.0)
        for e, sig in ((e0, 0.0), (es, 1.0)):
            sob = D.diff_norms(d, sig)
            assert 0.5 * sob <= e <= 1.5 * sob


def test_lipschitz_identical_data():
    st = _gauss()
    _, _, td = evolve_pair_with_difference(st, st, P, 0.1)
    rep = D.lipschitz_check(td, 0.0, 1e-3)
    assert rep.holds and rep.minimal_constant == 0


def test_diff_energies_coevolved_vs_subtracted():
    a = _gauss(amp=0.3)
    b = SboState(a.grid, a.u + 1e-3 * np.roll(a.u, 3), a.v - 1e-3 * np.roll(a.v, -2))
    ta, tb, td = evolve_pair_with_difference(a, b, P, 0.3, StepControls(rel_tol=1e-10))
    for x, y, d in zip(ta.states, tb.states, td.states):
        co = D.diff_energies(d, 1.0)
        sub = D.diff_energies(DiffState.from_pair(x, y), 1.0)
        for p, q in zip(co, sub):
            assert abs(p - q) <= 1e-6 * abs(q)
