import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aiwitness import oracle, quadopt, witness
from aiwitness.core import Provenance, Scenario, ScenarioConfig, UnsupportedTime

LAM, N = 10**-4.5, 10**6
PI = math.pi


def cfg(**kw):
    base = dict(lam=LAM, n_atoms=N, time=PI)
    base.update(kw)
    return ScenarioConfig(**base)


def test_noiseless_coefficients_at_zero_time():
    c = witness.coefficients_noiseless(cfg(time=0.0))
    assert c.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_linear_coefficients_at_pi():
    c = witness.coefficients_noiseless(cfg(lam=1e-3, n_atoms=100), "linear")
    assert c.provenance is Provenance.CLOSED_FORM_O1
    assert c.a_y == pytest.approx(0.0, abs=1e-15)
    assert c.b_z == pytest.approx(0.0, abs=1e-15)
    assert c.b_y == pytest.approx(2 * 1e-3 * 100 / math.sqrt(2), rel=1e-14)
    assert c.a_z == pytest.approx(2 * 1e-3 * 100 / math.sqrt(2), rel=1e-14)


@given(x=st.floats(0, 4 * PI), lam=st.floats(1e-6, 1e-2), n=st.integers(1, 10**4))
def test_linear_coefficients_orthogonal(x, lam, n):
    c = witness.coefficients_noiseless(ScenarioConfig(lam=lam, n_atoms=n, time=x), "linear")
    scale = max(abs(v) for v in c.as_tuple()) ** 2
    assert abs(c.dot) <= 1e-14 * max(scale, 1e-300)


def test_full_coefficients_match_numeric_optimum():
    c = cfg(lam=1e-2, n_atoms=4, time=PI / 2)
    full = witness.coefficients_noiseless(c)
    num, _ = quadopt.minimize(quadopt.assemble(witness.analytic_moments(c, expanded=True)))
    assert np.allclose(full.as_tuple(), num.as_tuple(), rtol=0, atol=1e-10)


def test_thermal_coefficients():
    lin = witness.coefficients_noiseless(cfg(), "linear")
    th0 = witness.coefficients_thermal(cfg(nbar=0.0, scenario=Scenario.THERMAL_INITIAL))
    assert th0.as_tuple() == pytest.approx(lin.as_tuple(), rel=1e-15)
    th2 = witness.coefficients_thermal(cfg(nbar=2.0, scenario=Scenario.THERMAL_INITIAL))
    assert th2.a_z == pytest.approx(lin.a_z / 5, rel=1e-14)
    assert th2.b_y == pytest.approx(lin.b_y, rel=1e-14)


def test_thermal_coefficients_match_numeric_optimum_on_thermal_table():
    c = ScenarioConfig(lam=1e-2, n_atoms=4, time=1.0, nbar=10, scenario=Scenario.THERMAL_INITIAL)
    num, _ = quadopt.minimize(quadopt.assemble(witness.analytic_moments(c)))
    th = witness.coefficients_thermal(c)
    assert np.allclose(th.as_tuple(), num.as_tuple(), rtol=0, atol=1e-9)


def test_bound_values():
    assert witness.witness_bound(witness.coefficients_noiseless(cfg()).zeros(), N / 2) == N / 2
    lin = witness.coefficients_noiseless(cfg(), "linear")
    assert witness.witness_bound(lin, N / 2) - N / 2 == pytest.approx(2e3, rel=1e-12)
    th = witness.coefficients_thermal(cfg(nbar=2.0, scenario=Scenario.THERMAL_INITIAL))
    assert witness.witness_bound(th, N / 2) - N / 2 == pytest.approx(2e3 / 5, rel=1e-12)


def test_value_examples():
    rep0 = witness.witness_value(cfg(time=0.0))
    assert rep0.w_en == N / 2 and rep0.w_diff == 0 and not rep0.violated
    rep = witness.witness_value(cfg(), "linear")
    assert rep.w_diff == pytest.approx(3000, rel=1e-12)
    th = witness.witness_value(cfg(nbar=2.0, scenario=Scenario.THERMAL_INITIAL))
    assert th.w_diff == pytest.approx(600, rel=1e-12)


@given(x=st.floats(0.01, 2 * PI - 0.01), n=st.integers(1, 10**6), nbar=st.floats(0, 20))
def test_linear_difference_closed_form(x, n, nbar):
    lam = 0.1 / math.sqrt(n)
    c = ScenarioConfig(lam=lam, n_atoms=n, time=x, nbar=nbar, scenario=Scenario.THERMAL_INITIAL)
    rep = witness.witness_value(c, "linear")
    assert rep.w_diff == pytest.approx(witness.closed_form_difference(c), rel=1e-9, abs=1e-9 * n)


def test_bath_first_term():
    c = cfg(nbar=0.1, q_factor=1.0, scenario=Scenario.GROUND_PLUS_BATH)
    lin = witness.coefficients_noiseless(c, "linear")
    dw = witness.bath_correction(c, lin)
    first = N * N / 4 * LAM**2 * 0.1 * 6 * PI
    # a_y = b_z = 0 at pi, so only XiXi, XiP and the oscillator terms survive
    assert dw > first
    from aiwitness import bathmc
    assert N * N / 4 * bathmc.covariance_closed_form("XiXi", c) == pytest.approx(first, rel=1e-12)


def test_bath_zero_time_and_ratio_only():
    c = cfg(time=0.0, nbar=1.0, q_factor=1e5, scenario=Scenario.GROUND_PLUS_BATH)
    assert witness.bath_correction(c, witness.coefficients_noiseless(c)) == 0.0
    c = cfg(time=2.3, nbar=1.0, q_factor=1e5, scenario=Scenario.THERMAL_INITIAL_PLUS_BATH)
    co = witness.coefficients_thermal(c)
    d1 = witness.bath_correction(c, co)
    d2 = witness.bath_correction(c.replace(nbar=2.0, q_factor=2e5), co)
    assert d2 == pytest.approx(d1, rel=1e-14)


@given(x=st.floats(0, 4 * PI), nbar=st.floats(0, 10), r=st.floats(0, 10))
def test_bath_correction_nonnegative(x, nbar, r):
    c = ScenarioConfig(lam=1e-4, n_atoms=1000, time=x, nbar=nbar, q_factor=1.0,
                       scenario=Scenario.THERMAL_INITIAL_PLUS_BATH)
    assert witness.bath_correction(c, witness.coefficients_thermal(c), r) >= -1e-12


def test_thresholds():
    assert witness.violation_threshold(Scenario.GROUND_PLUS_BATH, 0, PI) == pytest.approx(7 * PI / 6)
    th = Scenario.THERMAL_INITIAL_PLUS_BATH
    assert witness.violation_threshold(th, 0, PI) == pytest.approx(7 * PI / 6)
    assert witness.violation_threshold(th, 1, PI) == pytest.approx(31 * PI / 18)
    with pytest.raises(UnsupportedTime):
        witness.violation_threshold(th, 1, 2.0)
    assert witness.violation_threshold(th, 100, PI) / (100 * PI) == pytest.approx(1, rel=0.02)


@pytest.mark.parametrize("nbar", [0.0, 1.0, 10.0, 100.0])
def test_thermal_threshold_brackets_sign_flip(nbar):
    scen = Scenario.THERMAL_INITIAL_PLUS_BATH
    c = cfg(nbar=nbar, q_factor=1.0, scenario=scen)
    q_over_n = witness.violation_threshold(scen, nbar, PI)
    above = witness.witness_value(c, "linear", noise_ratio=1 / (q_over_n * (1 + 1e-6)))
    below = witness.witness_value(c, "linear", noise_ratio=1 / (q_over_n * (1 - 1e-6)))
    assert above.violated and not below.violated


@pytest.mark.parametrize("x", [0.7, PI / 2, PI, 1.5 * PI])
def test_ground_threshold_brackets_sign_flip(x):
    scen = Scenario.GROUND_PLUS_BATH
    c = cfg(time=x, q_factor=1.0, scenario=scen)
    q_over_n = witness.violation_threshold(scen, 0, x)
    above = witness.witness_value(c, "linear", noise_ratio=1 / (q_over_n * (1 + 1e-6)))
    below = witness.witness_value(c, "linear", noise_ratio=1 / (q_over_n * (1 - 1e-6)))
    assert above.violated and not below.violated


def test_reduction_chain():
    base = cfg(time=2.0)
    lin = witness.witness_value(base, "linear")
    th = witness.witness_value(base.replace(scenario=Scenario.THERMAL_INITIAL))
    assert th.w_en == pytest.approx(lin.w_en, rel=1e-12)
    assert th.w_bound == pytest.approx(lin.w_bound, rel=1e-12)
    full = witness.witness_value(base)
    bath = witness.witness_value(base.replace(q_factor=1.0, scenario=Scenario.GROUND_PLUS_BATH),
                                 noise_ratio=0.0)
    assert bath.w_en == pytest.approx(full.w_en, rel=1e-12)
    deph = witness.witness_value(base.replace(scenario=Scenario.DEPHASING))
    assert deph.w_en == pytest.approx(lin.w_en, rel=1e-12)
    assert deph.w_bound == pytest.approx(lin.w_bound, rel=1e-12)


def test_thermal_monotonic_in_nbar():
    reps = [witness.witness_value(cfg(time=2.0, nbar=n, scenario=Scenario.THERMAL_INITIAL))
            for n in np.linspace(0, 5, 11)]
    assert np.all(np.diff([r.w_bound for r in reps]) < 0)
    assert np.all(np.diff([r.w_en for r in reps]) > 0)


def test_violation_window_truncates():
    c = cfg(nbar=1.0, q_factor=20.0, scenario=Scenario.GROUND_PLUS_BATH)
    intervals, t, w = witness.violation_window(c)
    assert len(intervals) >= 1
    inside = np.zeros_like(t, dtype=bool)
    for a, b in intervals:
        inside |= (t > a) & (t < b)
    assert np.array_equal(inside, w > 0)
    assert any(b < 2 * PI for _, b in intervals)


def test_dephasing_report():
    c = cfg(sigma2=0.0, scenario=Scenario.DEPHASING)
    rep = witness.dephasing_report(c)
    lin = witness.witness_value(cfg(), "linear")
    assert rep.preferred.w_en == pytest.approx(lin.w_en, rel=1e-14)
    c = cfg(sigma2=0.033, scenario=Scenario.DEPHASING)
    rep = witness.dephasing_report(c)
    excess = rep.preferred.w_en - lin.w_en
    assert excess == pytest.approx(N / 4 * 0.033, abs=LAM**2 * N**2 * 0.033 * 2)
    assert rep.optimized_coefficients.w_bound < rep.noiseless_coefficients.w_bound
    assert rep.optimized_coefficients.w_en == pytest.approx(rep.preferred.w_en,
                                                            abs=0.033**2 * LAM**2 * N**2 * 10)
    assert witness.lambda_max(N, 20 / 600) == pytest.approx(7e-4, rel=0.02)


def test_spin_variance_sum():
    assert witness.spin_variance_sum(cfg(n_atoms=4, time=0.0, lam=0.01)) == 2.0
    c = cfg(n_atoms=4, lam=0.01, sigma2=0.01, time=0.0, scenario=Scenario.DEPHASING)
    assert witness.spin_variance_sum(c) == pytest.approx(2 * (1 + 0.005), rel=1e-14)
    c = cfg(n_atoms=4, lam=0.01)
    exact = oracle.moments(oracle.evolve(c)).spin_variance_sum()
    assert exact == pytest.approx(witness.spin_variance_sum(c), abs=(0.04) ** 3)
    rep = witness.witness_value(c, "linear")
    tab = witness.analytic_moments(c)
    assert rep.w_en - tab.spin_variance_sum() == pytest.approx(witness.value_minus_spin_sum(c),
                                                               abs=1e-12)


def test_numeric_coefficients_never_worse():
    for x in (0.5, 2.0, PI):
        c = cfg(time=x, nbar=1.0, q_factor=1e6, scenario=Scenario.GROUND_PLUS_BATH)
        num = witness.witness_value(c, "numeric")
        full = witness.witness_value(c, "full")
        assert num.coefficients.provenance is Provenance.NUMERIC_OPTIMUM
        assert num.w_en <= full.w_en * (1 + 1e-12)
