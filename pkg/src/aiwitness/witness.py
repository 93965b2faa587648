"""Closed-form witness coefficients, bounds and values for each noise scenario.

Notation: x = omega t, s = sin x, u = 1 - cos x, f = 2 nbar + 1.  Leading-order
results are quadratic in lambda; the coefficient closed forms are linear in
lambda (``linear``) or carry the O(lambda^2 N) denominators (``full``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import bathmc, quadopt
from .core import (MomentTable, Provenance, Scenario, ScenarioConfig, UnsupportedTime,
                   WitnessCoefficients, WitnessReport, lambda_max)

COEFFICIENT_FORMS = ("full", "linear", "numeric")


def _trig(config: ScenarioConfig) -> tuple[float, float]:
    x = config.omega_t
    return math.sin(x), 1.0 - math.cos(x)


def _thermal_factor(config: ScenarioConfig) -> float:
    return 2 * config.nbar + 1 if config.scenario.thermal_start else 1.0


# --- coefficients -------------------------------------------------------------

def coefficients_noiseless(config: ScenarioConfig, form: str = "full") -> WitnessCoefficients:
    s, u = _trig(config)
    ln = config.lam * config.n_atoms
    qz, pz = config.q_zpf, config.p_zpf
    if form == "linear":
        return WitnessCoefficients(-ln * pz * s, ln * qz * u, ln * pz * u, ln * qz * s,
                                   Provenance.CLOSED_FORM_O1)
    if form != "full":
        raise ValueError(f"form must be 'full' or 'linear', got {form!r}")
    l2n = config.lam**2 * config.n_atoms
    d1 = 1 + l2n * u * u
    d2 = 1 + l2n * s * s
    return WitnessCoefficients(-ln * pz * s / d1, ln * qz * u / d2, ln * pz * u / d1,
                               ln * qz * s / d2, Provenance.CLOSED_FORM_FULL)


def coefficients_thermal(config: ScenarioConfig) -> WitnessCoefficients:
    f = 2 * config.nbar + 1
    c = coefficients_noiseless(config, "linear")
    return WitnessCoefficients(c.a_y, c.b_y, c.a_z / f, c.b_z / f, Provenance.CLOSED_FORM_O1)


def coefficients_dephasing(config: ScenarioConfig) -> WitnessCoefficients:
    """Coefficients re-optimized to first order in sigma^2."""
    c = coefficients_noiseless(config, "linear")
    cos = math.cos(config.omega_t)
    ka = (4 - config.sigma2 * (1 + cos)) / 4
    kb = (4 - config.sigma2 * (1 - cos)) / 4
    return WitnessCoefficients(c.a_y * ka, c.b_y * kb, c.a_z * ka, c.b_z * kb,
                               Provenance.CLOSED_FORM_O1)


def witness_bound(coeffs: WitnessCoefficients, j_min_exp: float) -> float:
    return quadopt.hofmann_bound(coeffs, j_min_exp)


# --- moment tables ------------------------------------------------------------

def analytic_moments(config: ScenarioConfig, expanded: bool = False) -> MomentTable:
    """Leading-order moments of the evolved state (no bath).

    ``expanded`` adds the O(lambda^2 N) growth of Var(q), Var(p) caused by the
    J_z-conditioned displacement; these are the variances behind the ``full``
    coefficient forms (the q-p covariance is left at zero, as in those forms).
    Thermal scenarios use f = 2 nbar + 1; Dephasing adds the O(sigma^2) changes.
    """
    n = config.n_atoms
    lam = config.lam
    s, u = _trig(config)
    f = _thermal_factor(config)
    qz, pz = config.q_zpf, config.p_zpf
    sig2 = config.sigma2 if config.scenario is Scenario.DEPHASING else 0.0

    jz2 = n / 4
    jy2 = n / 4 + f * lam**2 * n * n * u / 2 + (lam**2 * n / 2 - lam**2 * n * n / 2) * u * sig2
    casimir = (n / 2) * (n / 2 + 1)
    jx_mean = math.sqrt(casimir - n / 4 - f * lam**2 * n * n * u / 2 - jz2) * (1 - sig2 / 2)
    var_jx = (n / 4 - lam**2 * n * u / 2) * sig2
    shrink = 1 - sig2 / 2

    q_sq = f * qz * qz
    p_sq = f * pz * pz
    if expanded:
        q_sq += lam**2 * n * u * u * qz * qz
        p_sq += lam**2 * n * s * s * pz * pz
    return MomentTable(
        j_mean=(jx_mean, 0.0, 0.0),
        j_sq=(jx_mean**2 + var_jx, jy2, jz2),
        q_mean=0.0, p_mean=0.0, q_sq=q_sq, p_sq=p_sq, qp=0.0,
        qj=(0.0, f * lam * n * qz * s * shrink, -lam * n * qz * u),
        pj=(0.0, -f * lam * n * pz * u * shrink, -lam * n * pz * s),
    )


def bath_moment_shift(moments: MomentTable, config: ScenarioConfig,
                      noise_ratio: float | None = None) -> MomentTable:
    """Add the classical-noise contributions to a moment table.

    The spin rotation by Xi moves weight from <J_x>^2 into Var(J_y) while
    keeping <J_x^2 + J_y^2> fixed; q and p pick up the force-driven spreads.
    """
    cov = bathmc.all_closed_form(config, noise_ratio)
    n = config.n_atoms
    spin = n * n / 4 * cov["XiXi"]
    jx = moments.j_mean[0]
    jx_new = math.sqrt(max(jx * jx - spin, 0.0))
    shifted = moments.shifted(
        j_sq=(-spin, spin, 0.0),
        q_sq=cov["QQ"], p_sq=cov["PP"], qp=2 * cov["QP"],
        qj=(0.0, -n * cov["XiQ"], 0.0), pj=(0.0, -n * cov["XiP"], 0.0),
    )
    return shifted.shifted(j_mean=(jx_new - jx, 0.0, 0.0))


def bath_correction(config: ScenarioConfig, coeffs: WitnessCoefficients,
                    noise_ratio: float | None = None) -> float:
    """Noise-averaged increase of W for the given coefficients."""
    return bathmc.delta_w_closed_form(config, coeffs, noise_ratio)


# --- reports ------------------------------------------------------------------

def _report(config, coeffs, moments, bound, notes=()) -> WitnessReport:
    terms = quadopt.per_term(moments, coeffs)
    return WitnessReport(w_bound=bound, w_en=float(sum(terms)), coefficients=coeffs,
                         per_term=terms, scenario=config.scenario, notes=tuple(notes))


def _closed_form_coefficients(config: ScenarioConfig, form: str) -> WitnessCoefficients:
    if config.scenario.thermal_start:
        return coefficients_thermal(config)
    return coefficients_noiseless(config, form)


def scenario_moments(config: ScenarioConfig, coefficient_form: str = "full",
                     noise_ratio: float | None = None) -> MomentTable:
    expanded = coefficient_form == "full" and not config.scenario.thermal_start
    table = analytic_moments(config, expanded=expanded)
    if config.scenario.has_bath:
        table = bath_moment_shift(table, config, noise_ratio)
    return table


def witness_value(config: ScenarioConfig, coefficient_form: str = "full",
                  noise_ratio: float | None = None,
                  coeffs: WitnessCoefficients | None = None) -> WitnessReport:
    """Witness report for the configured scenario.

    coefficient_form: ``full`` (default; thermal starts always use their
    linear closed form), ``linear``, or ``numeric`` (exact minimizer of the
    scenario's moment table).  Explicit ``coeffs`` override all of these.
    For bath scenarios ``noise_ratio`` overrides nbar / Q.
    """
    if coefficient_form not in COEFFICIENT_FORMS:
        raise ValueError(f"coefficient_form must be one of {COEFFICIENT_FORMS}")
    if config.scenario is Scenario.DEPHASING:
        if coeffs is not None or coefficient_form == "numeric":
            raise ValueError("dephasing reports use the closed-form coefficient sets")
        return dephasing_report(config).preferred
    if config.scenario.has_bath and noise_ratio is None:
        noise_ratio = config.noise_ratio
    table = scenario_moments(config, coefficient_form, noise_ratio)
    notes = []
    if coeffs is None:
        if coefficient_form == "numeric":
            coeffs, _ = quadopt.minimize(quadopt.assemble(table))
        else:
            coeffs = _closed_form_coefficients(config, coefficient_form)
    if config.scenario.has_bath:
        notes.append(f"noise_ratio={noise_ratio!r}")
    notes.append(f"coefficients={coeffs.provenance.value}")
    return _report(config, coeffs, table, witness_bound(coeffs, config.j_min), notes)


def closed_form_difference(config: ScenarioConfig) -> float:
    """(3/2) lambda^2 N^2 (1 - cos wt) / f: the leading-order violation without bath."""
    _, u = _trig(config)
    return 1.5 * config.lam**2 * config.n_atoms**2 * u / _thermal_factor(config)


# --- thresholds ---------------------------------------------------------------

def violation_threshold(scenario: Scenario, nbar: float, t_omega: float) -> float:
    """Smallest Q / nbar for which the witness is violated."""
    scenario = Scenario(scenario)
    if scenario is Scenario.THERMAL_INITIAL_PLUS_BATH:
        if not math.isclose(t_omega, math.pi, rel_tol=1e-12):
            raise UnsupportedTime("thermal-start threshold is available at omega t = pi only")
        return math.pi * (7 + 12 * nbar * (1 + nbar)) / (6 * (1 + 2 * nbar))
    if scenario is Scenario.GROUND_PLUS_BATH:
        x = t_omega
        half = math.sin(x / 2)
        if half == 0:
            return math.inf
        bracket = 10 * x - 4 * x * math.cos(x) - 4 * math.sin(x) - math.sin(2 * x)
        return bracket / (12 * half * half)
    raise ValueError(f"thresholds are defined for bath scenarios, not {scenario.value}")


def w_diff_curve(config: ScenarioConfig, t_values, coefficient_form: str = "linear",
                 noise_ratio: float | None = None) -> np.ndarray:
    return np.array([witness_value(config.replace(time=float(t)), coefficient_form,
                                   noise_ratio).w_diff for t in t_values])


def violation_window(config: ScenarioConfig, coefficient_form: str = "linear",
                     noise_ratio: float | None = None, n_grid: int = 721):
    """Intervals of t inside (0, 2 pi / omega) with w_diff > 0.

    Sign changes on a uniform grid are refined with brentq.  Returns the list
    of (start, end) intervals and the sampled (t, w_diff) arrays.
    """
    period = 2 * math.pi / config.omega
    t = np.linspace(0, period, n_grid)[1:-1]
    w = w_diff_curve(config, t, coefficient_form, noise_ratio)

    def fn(tt):
        return witness_value(config.replace(time=tt), coefficient_form, noise_ratio).w_diff

    roots = [brentq(fn, t[i], t[i + 1], xtol=1e-14 * period)
             for i in range(len(t) - 1) if np.sign(w[i]) != np.sign(w[i + 1])
             and w[i] != 0 and w[i + 1] != 0]
    edges = ([0.0] if w[0] > 0 else []) + roots + ([period] if w[-1] > 0 else [])
    return list(zip(edges[0::2], edges[1::2])), t, w


# --- dephasing ----------------------------------------------------------------

@dataclass(frozen=True)
class DephasingReport:
    noiseless_coefficients: WitnessReport
    optimized_coefficients: WitnessReport
    w_en_closed_form: float

    @property
    def preferred(self) -> WitnessReport:
        # equal W_en to this order, larger bound
        return self.noiseless_coefficients


def dephasing_report(config: ScenarioConfig) -> DephasingReport:
    """Dephasing witness with noiseless and with re-optimized coefficients.

    The spin floor shrinks to j_start (1 - sigma^2 / 2) in both variants.
    """
    cfg = config if config.scenario is Scenario.DEPHASING else config.replace(
        scenario=Scenario.DEPHASING)
    sig2 = cfg.sigma2
    table = analytic_moments(cfg)
    j_floor = cfg.j_min * (1 - sig2 / 2)
    _, u = _trig(cfg)
    closed = cfg.n_atoms / 2 * (1 + sig2 / 2) - cfg.lam**2 * cfg.n_atoms**2 * u / 2
    reports = []
    for coeffs, tag in ((coefficients_noiseless(cfg, "linear"), "noiseless"),
                        (coefficients_dephasing(cfg), "dephasing-optimized")):
        reports.append(_report(cfg, coeffs, table, witness_bound(coeffs, j_floor),
                               (f"coefficients={tag}", f"sigma2={sig2!r}")))
    return DephasingReport(reports[0], reports[1], closed)


def spin_variance_sum(config: ScenarioConfig) -> float:
    sig2 = config.sigma2 if config.scenario is Scenario.DEPHASING else 0.0
    _, u = _trig(config)
    n = config.n_atoms
    return n / 2 * (1 + sig2 / 2) + config.lam**2 * n * n * u * (1 - sig2) / 2


def value_minus_spin_sum(config: ScenarioConfig) -> float:
    """W_en - sum Var(J_mu) = -lambda^2 N^2 (1 - cos wt)(1 - sigma^2 / 2)."""
    sig2 = config.sigma2 if config.scenario is Scenario.DEPHASING else 0.0
    _, u = _trig(config)
    return -config.lam**2 * config.n_atoms**2 * u * (1 - sig2 / 2)
