"""Classical white-noise bath: closed-form covariances and a Monte Carlo check.

The force F_in(t) has <<F(t) F(t')>> = nbar * gamma * delta(t - t') with
gamma = omega / Q.  It displaces the oscillator by Qn(t), Pn(t) and rotates the
collective spin about z by Xi(t):

    Qn(t) = -2 q_zpf int_0^t F(t') sin(omega (t - t')) dt'
    Pn(t) = -2 p_zpf int_0^t F(t') cos(omega (t - t')) dt'
    Xi(t) = -(g / q_zpf) int_0^t Qn(t') dt'
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScenarioConfig, WitnessCoefficients

PAIRS = ("XiXi", "XiQ", "XiP", "QQ", "PP", "QP")


def covariance_closed_form(which: str, config: ScenarioConfig,
                           noise_ratio: float | None = None) -> float:
    r = config.noise_ratio if noise_ratio is None else noise_ratio
    x = config.omega_t
    lam = config.lam
    s, s2 = np.sin(x), np.sin(2 * x)
    if which == "XiXi":
        return lam**2 * r * (6 * x - 8 * s + s2)
    if which == "XiQ":
        return -config.q_zpf * 8 * lam * r * np.sin(x / 2) ** 4
    if which == "XiP":
        return config.p_zpf * 4 * lam * r * (x / 2 - s + s2 / 4)
    if which == "QQ":
        return config.q_zpf**2 * r * (2 * x - s2)
    if which == "PP":
        return config.p_zpf**2 * r * (2 * x + s2)
    if which == "QP":
        return r * s**2
    raise KeyError(f"unknown covariance {which!r}; expected one of {PAIRS}")


def all_closed_form(config: ScenarioConfig, noise_ratio: float | None = None) -> dict:
    return {k: covariance_closed_form(k, config, noise_ratio) for k in PAIRS}


def delta_w_closed_form(config: ScenarioConfig, coeffs: WitnessCoefficients,
                        noise_ratio: float | None = None) -> float:
    cov = all_closed_form(config, noise_ratio)
    n = config.n_atoms
    c = coeffs
    return float(n * n / 4 * cov["XiXi"]
                 - n * (c.a_y * cov["XiQ"] + c.b_y * cov["XiP"])
                 + (c.a_y**2 + c.a_z**2) * cov["QQ"]
                 + (c.b_y**2 + c.b_z**2) * cov["PP"]
                 + 2 * (c.a_y * c.b_y + c.a_z * c.b_z) * cov["QP"])


@dataclass(frozen=True)
class NoiseRealization:
    """Piecewise-constant force samples, shape (n_real, n_steps)."""
    dt: float
    forces: np.ndarray
    strength: float  # nbar * gamma

    @property
    def n_steps(self) -> int:
        return self.forces.shape[1]

    def variance_check(self, n_se: float = 5.0) -> bool:
        """Empirical sample variance within n_se standard errors of strength/dt."""
        f = self.forces.ravel()
        target = self.strength / self.dt
        if target == 0:
            return bool(np.all(f == 0))
        var = f.var(ddof=1)
        se = target * np.sqrt(2.0 / (f.size - 1))
        return abs(var - target) < n_se * se

    def coarsen(self) -> "NoiseRealization":
        """Same Brownian path on a grid with twice the step."""
        f = self.forces
        if f.shape[1] % 2:
            raise ValueError("need an even number of steps to coarsen")
        return NoiseRealization(2 * self.dt, 0.5 * (f[:, 0::2] + f[:, 1::2]), self.strength)


def draw_noise(config: ScenarioConfig, n_steps: int, n_real: int, seed: int,
               noise_ratio: float | None = None) -> NoiseRealization:
    """Realization i draws from its own stream keyed by (seed, i)."""
    r = config.noise_ratio if noise_ratio is None else noise_ratio
    strength = r * config.omega  # nbar * gamma with gamma = omega / Q
    dt = config.time / n_steps
    forces = np.empty((n_real, n_steps))
    for i in range(n_real):
        forces[i] = np.random.default_rng([seed, i]).standard_normal(n_steps)
    scale = np.sqrt(strength / dt) if dt > 0 else 0.0
    return NoiseRealization(dt, scale * forces, strength)


def integrate_noise(config: ScenarioConfig, noise: NoiseRealization):
    """Xi, Qn, Pn at the final time for every realization.

    The oscillator kernels are integrated exactly over each step; Xi is the
    trapezoidal integral of Qn over the grid.
    """
    w = config.omega
    dt = noise.dt
    t = dt * np.arange(noise.n_steps + 1)
    # int_bin cos(w t'), int_bin sin(w t')
    kc = (np.sin(w * t[1:]) - np.sin(w * t[:-1])) / w
    ks = (np.cos(w * t[:-1]) - np.cos(w * t[1:])) / w
    f = noise.forces
    cum_c = np.concatenate([np.zeros((f.shape[0], 1)), np.cumsum(f * kc, axis=1)], axis=1)
    cum_s = np.concatenate([np.zeros((f.shape[0], 1)), np.cumsum(f * ks, axis=1)], axis=1)
    # sin(w(t-t')) = sin wt cos wt' - cos wt sin wt'
    q_path = -2 * config.q_zpf * (np.sin(w * t) * cum_c - np.cos(w * t) * cum_s)
    p_final = -2 * config.p_zpf * (np.cos(w * t[-1]) * cum_c[:, -1] + np.sin(w * t[-1]) * cum_s[:, -1])
    g = config.lam * w
    xi = -(g / config.q_zpf) * np.trapezoid(q_path, dx=dt, axis=1)
    return xi, q_path[:, -1], p_final


def _products(xi, q, p) -> dict:
    return {"XiXi": xi * xi, "XiQ": xi * q, "XiP": xi * p, "QQ": q * q, "PP": p * p, "QP": q * p}


def default_steps(config: ScenarioConfig, per_period: int = 400) -> int:
    n = int(np.ceil(per_period * config.omega_t / (2 * np.pi)))
    return max(2, n + n % 2)


def covariance_monte_carlo(which: str | None, config: ScenarioConfig, n_real: int, seed: int,
                           noise_ratio: float | None = None, n_steps: int | None = None):
    """(mean, standard error) of one covariance, or a dict of all six if which is None."""
    if which is not None and which not in PAIRS:
        raise KeyError(f"unknown covariance {which!r}")
    n_steps = n_steps or default_steps(config)
    period = 2 * np.pi / config.omega
    if config.time / n_steps > period / 200 * (1 + 1e-12):
        raise ValueError("dt must not exceed one two-hundredth of the period")
    noise = draw_noise(config, n_steps, n_real, seed, noise_ratio)
    prods = _products(*integrate_noise(config, noise))
    stats = {k: (float(v.mean()), float(v.std(ddof=1) / np.sqrt(n_real))) for k, v in prods.items()}
    return stats if which is None else stats[which]


def dt_halving_shift(config: ScenarioConfig, n_real: int, seed: int,
                     noise_ratio: float | None = None, n_steps: int | None = None) -> dict:
    """Change in each MC mean when the step is doubled on the same noise paths.

    Returns {pair: (fine - coarse, standard error of the fine estimate)}.
    """
    n_steps = n_steps or 2 * default_steps(config)
    n_steps += n_steps % 2
    fine = draw_noise(config, n_steps, n_real, seed, noise_ratio)
    a = _products(*integrate_noise(config, fine))
    b = _products(*integrate_noise(config, fine.coarsen()))
    return {k: (float(a[k].mean() - b[k].mean()), float(a[k].std(ddof=1) / np.sqrt(n_real)))
            for k in PAIRS}


def delta_w_monte_carlo(config: ScenarioConfig, coeffs: WitnessCoefficients, n_real: int,
                        seed: int, noise_ratio: float | None = None,
                        n_steps: int | None = None) -> tuple[float, float]:
    """Average the noise-induced growth of the two coupled-observable variances.

    Per realization the spin rotates by Xi (so J_y picks up -<J_x> Xi with
    <J_x> = N/2 at this order) and q, p pick up Qn, Pn.
    """
    n_steps = n_steps or default_steps(config)
    noise = draw_noise(config, n_steps, n_real, seed, noise_ratio)
    xi, q, p = integrate_noise(config, noise)
    c = coeffs
    shift_y = -0.5 * config.n_atoms * xi + c.a_y * q + c.b_y * p
    shift_z = c.a_z * q + c.b_z * p
    dw = shift_y**2 + shift_z**2
    return float(dw.mean()), float(dw.std(ddof=1) / np.sqrt(n_real))
