"""Measurement budget: how many shots resolve the witness violation.

The experiment estimates each of Var(J_x), Var(O_y), Var(O_z) from its own
batch of projective measurements with the unbiased sample variance.  For n
shots from a distribution with variance s2 and fourth central moment m4,

    Var(sample variance) = m4 / n - s2^2 (n - 3) / (n (n - 1)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import oracle
from .core import NotViolated, Scenario, ScenarioConfig, WitnessCoefficients, WitnessReport
from .witness import witness_bound

MAX_HARNESS_ATOMS = 10
OBSERVABLES = ("x", "y", "z")


def n_meas_scaling(report: WitnessReport) -> float:
    if not report.violated:
        raise NotViolated(f"w_ratio = {report.w_ratio:.3e} is not positive")
    return report.w_ratio**-2


@dataclass(frozen=True)
class OutcomeLaw:
    values: np.ndarray
    probs: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.probs @ self.values)

    def central(self, k: int) -> float:
        return float(self.probs @ (self.values - self.mean) ** k)

    def variance_of_variance(self, n: int) -> float:
        s2 = self.central(2)
        return self.central(4) / n - s2 * s2 * (n - 3) / (n * (n - 1))

    def sample_variances(self, n: int, reps: int, rng: np.random.Generator) -> np.ndarray:
        counts = rng.multinomial(n, self.probs, size=reps)
        mean = counts @ self.values / n
        second = counts @ (self.values**2) / n
        return (second - mean**2) * n / (n - 1)


@dataclass(frozen=True)
class BudgetResult:
    n_required: int          # total shots, equal split across the three observables
    achieved_margin: float   # w_diff / SE at n_required, in units of sigma
    n_optimal: int           # total shots with n_mu proportional to sqrt(per-shot variance)
    success_rate: float      # fraction of simulated experiments that observe W < W_b
    target_rate: float
    repetitions: int
    w_diff: float
    w_bound: float
    n_scaling: float         # w_ratio^-2
    n_scaling_rescaled: float

    @property
    def coverage_ok(self) -> bool:
        return self.success_rate >= self.target_rate

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["coverage_ok"] = self.coverage_ok
        return d


def _state(config: ScenarioConfig):
    if config.scenario in (Scenario.THERMAL_INITIAL,) and config.nbar > 0:
        w = oracle.thermal_weights(config.nbar)
        spec = oracle.HilbertSpec.auto(config, thermal=True)
        return oracle.evolve(config, spec, fock_levels=np.arange(len(w)), weights=w)
    if config.scenario not in (Scenario.NOISELESS, Scenario.THERMAL_INITIAL):
        raise ValueError("the measurement harness samples noiseless or thermal-start states")
    return oracle.evolve(config)


def outcome_laws(config: ScenarioConfig, coeffs: WitnessCoefficients) -> dict:
    state = _state(config)
    return {mu: OutcomeLaw(*oracle.spectral_distribution(state, mu, coeffs)) for mu in OBSERVABLES}


def _min_n(w_diff: float, sigmas: float, laws: dict) -> int:
    def ok(n):
        se = math.sqrt(sum(l.variance_of_variance(n) for l in laws.values()))
        return w_diff >= sigmas * se

    hi = 4
    while not ok(hi):
        hi *= 2
        if hi > 2**50:
            raise ArithmeticError("shot count diverges")
    lo = max(2, hi // 2)
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def n_meas_simulated(config: ScenarioConfig, coeffs: WitnessCoefficients,
                     confidence_sigmas: float = 5.0, seed: int = 0,
                     repetitions: int = 200) -> BudgetResult:
    if config.n_atoms > MAX_HARNESS_ATOMS:
        raise oracle.OracleScaleExceeded(f"harness runs the oracle; N <= {MAX_HARNESS_ATOMS}")
    laws = outcome_laws(config, coeffs)
    w_en = sum(l.central(2) for l in laws.values())
    w_b = witness_bound(coeffs, config.j_min)
    w_diff = w_b - w_en
    if not w_diff > 0:
        raise NotViolated(f"W_b - W_en = {w_diff:.3e}")
    n_each = _min_n(w_diff, confidence_sigmas, laws)
    se = math.sqrt(sum(l.variance_of_variance(n_each) for l in laws.values()))

    per_shot = [max(l.central(4) - l.central(2) ** 2, 0.0) for l in laws.values()]
    n_opt = math.ceil(confidence_sigmas**2 * sum(math.sqrt(v) for v in per_shot) ** 2 / w_diff**2)
    n_scaling = (w_b / w_diff) ** 2
    rescaled = n_scaling * confidence_sigmas**2 * 3 * sum(per_shot) / w_b**2

    rng = np.random.default_rng(seed)
    w_hat = sum(l.sample_variances(n_each, repetitions, rng) for l in laws.values())
    success = float(np.mean(w_hat < w_b))
    target = min(0.9, float(norm.cdf(confidence_sigmas)))
    return BudgetResult(3 * n_each, w_diff / se, n_opt, success, target, repetitions,
                        w_diff, w_b, n_scaling, rescaled)
