"""Shared value types and parameter validation.

Units: hbar = 1 throughout the quantum modules.  The oscillator mass defaults
to 1, so q carries a factor sqrt(1/(2 m omega)) and p a factor
sqrt(m omega / 2).  Coefficients multiplying q (the ``a`` family) carry
sqrt(m omega); those multiplying p (the ``b`` family) carry 1/sqrt(m omega).
"""
from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass, field


class Scenario(str, enum.Enum):
    NOISELESS = "Noiseless"
    THERMAL_INITIAL = "ThermalInitial"
    THERMAL_INITIAL_PLUS_BATH = "ThermalInitialPlusBath"
    GROUND_PLUS_BATH = "GroundPlusBath"
    DEPHASING = "Dephasing"

    @property
    def has_bath(self) -> bool:
        return self in (Scenario.THERMAL_INITIAL_PLUS_BATH, Scenario.GROUND_PLUS_BATH)

    @property
    def thermal_start(self) -> bool:
        return self in (Scenario.THERMAL_INITIAL, Scenario.THERMAL_INITIAL_PLUS_BATH)


class Provenance(str, enum.Enum):
    CLOSED_FORM_O1 = "ClosedFormO1"
    CLOSED_FORM_FULL = "ClosedFormFull"
    NUMERIC_OPTIMUM = "NumericOptimum"


class WitnessError(Exception):
    """Base class for errors raised by this package."""


class NonPositiveParameter(WitnessError, ValueError):
    pass


class PerturbativityViolated(WitnessError):
    def __init__(self, window: str, value: float, limit: float):
        self.window = window
        self.value = value
        self.limit = limit
        super().__init__(f"{window}: {value:.6g} >= {limit:.6g}")


class MissingQualityFactor(WitnessError, ValueError):
    pass


class UnsupportedTime(WitnessError, ValueError):
    pass


class NotViolated(WitnessError):
    pass


# thermal window n̄ λ² ≪ 1 is enforced at this level
NBAR_LAMBDA2_LIMIT = 0.1


@dataclass(frozen=True)
class ScenarioConfig:
    lam: float
    n_atoms: int
    mass: float = 1.0
    omega: float = 1.0
    time: float = 0.0
    nbar: float = 0.0
    q_factor: float | None = None
    sigma2: float = 0.0
    j_min_exp: float | None = None
    scenario: Scenario = Scenario.NOISELESS
    # set by validate(): names of perturbative windows that failed
    validity_warnings: tuple[str, ...] = field(default=(), compare=False)
    validated: bool = field(default=False, compare=False)

    @property
    def omega_t(self) -> float:
        return self.omega * self.time

    @property
    def q_zpf(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.mass * self.omega))

    @property
    def p_zpf(self) -> float:
        return math.sqrt(self.mass * self.omega / 2.0)

    @property
    def j_min(self) -> float:
        return self.n_atoms / 2 if self.j_min_exp is None else self.j_min_exp

    @property
    def noise_ratio(self) -> float:
        """n̄/Q, the only combination through which the white-noise bath enters."""
        if self.q_factor is None:
            raise MissingQualityFactor("bath scenario requires q_factor")
        return self.nbar / self.q_factor

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    # JSON uses the keyword "lambda", which Python cannot use as a field name.
    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "n_atoms": self.n_atoms,
            "mass": self.mass,
            "omega": self.omega,
            "time": self.time,
            "nbar": self.nbar,
            "q_factor": self.q_factor,
            "sigma2": self.sigma2,
            "j_min_exp": self.j_min_exp,
            "scenario": self.scenario.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {"lambda", "n_atoms", "mass", "omega", "time", "nbar", "q_factor",
                 "sigma2", "j_min_exp", "scenario"}
        unknown = set(data) - known - {"geometry", "sweep", "seed"}
        if unknown:
            raise KeyError(f"unknown config field(s): {sorted(unknown)}")
        if "lambda" not in data or "n_atoms" not in data:
            raise KeyError("config requires 'lambda' and 'n_atoms'")
        n_atoms = data["n_atoms"]
        if isinstance(n_atoms, float) and n_atoms.is_integer():
            n_atoms = int(n_atoms)
        if not isinstance(n_atoms, int):
            raise TypeError("n_atoms must be an integer")
        kwargs = dict(lam=float(data["lambda"]), n_atoms=n_atoms)
        for name in ("mass", "omega", "time", "nbar", "sigma2"):
            if data.get(name) is not None:
                kwargs[name] = float(data[name])
        for name in ("q_factor", "j_min_exp"):
            if data.get(name) is not None:
                kwargs[name] = float(data[name])
        if "scenario" in data:
            kwargs["scenario"] = Scenario(data["scenario"])
        return cls(**kwargs)


def lambda_max(n_atoms: int, sigma2: float = 0.0) -> float:
    """Largest coupling for which the O(λ²) witness value stays positive."""
    return math.sqrt((1.0 + sigma2 / 2.0) / (2.0 * n_atoms))


def validate(config: ScenarioConfig, strict: bool = False) -> ScenarioConfig:
    """Check parameter domains and perturbative windows.

    Outside-window configurations raise PerturbativityViolated when ``strict``
    and otherwise only warn; the exact oracle is allowed to go there.
    """
    c = config
    if not c.lam > 0:
        raise NonPositiveParameter(f"lambda must be > 0, got {c.lam}")
    if c.n_atoms < 1:
        raise NonPositiveParameter(f"n_atoms must be >= 1, got {c.n_atoms}")
    if not c.omega > 0:
        raise NonPositiveParameter(f"omega must be > 0, got {c.omega}")
    if not c.mass > 0:
        raise NonPositiveParameter(f"mass must be > 0, got {c.mass}")
    if c.time < 0:
        raise NonPositiveParameter(f"time must be >= 0, got {c.time}")
    if c.nbar < 0:
        raise NonPositiveParameter(f"nbar must be >= 0, got {c.nbar}")
    if c.sigma2 < 0:
        raise NonPositiveParameter(f"sigma2 must be >= 0, got {c.sigma2}")
    if c.q_factor is not None and not c.q_factor > 0:
        raise NonPositiveParameter(f"q_factor must be > 0, got {c.q_factor}")
    if c.scenario.has_bath and c.q_factor is None:
        raise MissingQualityFactor(f"{c.scenario.value} requires q_factor")
    j_min = c.j_min
    if not 0 < j_min <= c.n_atoms / 2:
        raise NonPositiveParameter(f"j_min_exp must lie in (0, N/2], got {j_min}")

    failed = []
    lmax = lambda_max(c.n_atoms, c.sigma2 if c.scenario is Scenario.DEPHASING else 0.0)
    if c.lam >= lmax:
        failed.append(PerturbativityViolated("lambda < 1/sqrt(2N)", c.lam, lmax))
    if c.scenario.thermal_start and c.nbar * c.lam**2 >= NBAR_LAMBDA2_LIMIT:
        failed.append(PerturbativityViolated("nbar*lambda^2 << 1", c.nbar * c.lam**2,
                                             NBAR_LAMBDA2_LIMIT))
    if failed and strict:
        raise failed[0]
    for err in failed:
        warnings.warn(str(err), RuntimeWarning, stacklevel=2)
    return dataclasses.replace(
        c,
        j_min_exp=j_min,
        validity_warnings=tuple(e.window for e in failed),
        validated=True,
    )


@dataclass(frozen=True)
class WitnessCoefficients:
    a_y: float
    b_y: float
    a_z: float
    b_z: float
    provenance: Provenance = Provenance.CLOSED_FORM_FULL

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError(f"non-finite coefficients {self.as_tuple()}")

    @property
    def cross(self) -> float:
        return self.a_y * self.b_z - self.a_z * self.b_y

    @property
    def dot(self) -> float:
        return self.a_y * self.b_y + self.a_z * self.b_z

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a_y, self.b_y, self.a_z, self.b_z)

    @classmethod
    def zeros(cls, provenance: Provenance = Provenance.CLOSED_FORM_FULL):
        return cls(0.0, 0.0, 0.0, 0.0, provenance)


_SPIN = ("x", "y", "z")


@dataclass(frozen=True)
class MomentTable:
    """First and (symmetrized) second moments entering the witness.

    ``qj`` and ``pj`` hold <q J_mu + J_mu q> and <p J_mu + J_mu p> for
    mu = x, y, z; ``qp`` holds <q p + p q>.
    """
    j_mean: tuple[float, float, float]
    j_sq: tuple[float, float, float]
    q_mean: float
    p_mean: float
    q_sq: float
    p_sq: float
    qp: float
    qj: tuple[float, float, float]
    pj: tuple[float, float, float]

    def var_j(self, mu: int) -> float:
        return self.j_sq[mu] - self.j_mean[mu] ** 2

    @property
    def var_q(self) -> float:
        return self.q_sq - self.q_mean**2

    @property
    def var_p(self) -> float:
        return self.p_sq - self.p_mean**2

    @property
    def cov_qp(self) -> float:
        return self.qp / 2 - self.q_mean * self.p_mean

    def cov_jq(self, mu: int) -> float:
        return self.qj[mu] / 2 - self.q_mean * self.j_mean[mu]

    def cov_jp(self, mu: int) -> float:
        return self.pj[mu] / 2 - self.p_mean * self.j_mean[mu]

    def spin_variance_sum(self) -> float:
        return sum(self.var_j(mu) for mu in range(3))

    def check(self, n_atoms: int, tol: float = 1e-9) -> None:
        """Raise ValueError if the table cannot come from a physical state."""
        if self.var_q < -tol or self.var_p < -tol:
            raise ValueError("negative oscillator variance")
        if self.var_q * self.var_p < 0.25 - tol:
            raise ValueError(f"Heisenberg bound violated: {self.var_q * self.var_p}")
        casimir = (n_atoms / 2) * (n_atoms / 2 + 1)
        if sum(self.j_sq) > casimir + tol * max(1.0, casimir):
            raise ValueError("spin second moments exceed the Casimir")

    def shifted(self, **deltas) -> "MomentTable":
        """Return a copy with additive changes; tuple fields take 3-tuples."""
        values = dataclasses.asdict(self)
        for key, d in deltas.items():
            if isinstance(values[key], tuple):
                values[key] = tuple(v + dv for v, dv in zip(values[key], d))
            else:
                values[key] = values[key] + d
        return MomentTable(**values)

    def as_dict(self) -> dict:
        out = {}
        for i, mu in enumerate(_SPIN):
            out[f"J{mu}"] = self.j_mean[i]
            out[f"J{mu}^2"] = self.j_sq[i]
            out[f"{{q,J{mu}}}"] = self.qj[i]
            out[f"{{p,J{mu}}}"] = self.pj[i]
        out.update(q=self.q_mean, p=self.p_mean, **{"q^2": self.q_sq, "p^2": self.p_sq,
                                                     "{q,p}": self.qp})
        return out


@dataclass(frozen=True)
class WitnessReport:
    w_bound: float
    w_en: float
    coefficients: WitnessCoefficients
    per_term: tuple[float, float, float]
    scenario: Scenario = Scenario.NOISELESS
    notes: tuple[str, ...] = ()

    @property
    def w_diff(self) -> float:
        return self.w_bound - self.w_en

    @property
    def w_ratio(self) -> float:
        return self.w_diff / self.w_bound

    @property
    def violated(self) -> bool:
        return self.w_diff > 0

    @property
    def n_meas_estimate(self) -> float | None:
        return self.w_ratio**-2 if self.violated else None

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario.value,
            "w_bound": self.w_bound,
            "w_en": self.w_en,
            "w_diff": self.w_diff,
            "w_ratio": self.w_ratio,
            "violated": self.violated,
            "n_meas_estimate": self.n_meas_estimate,
            "per_term": list(self.per_term),
            "coefficients": {
                "a_y": self.coefficients.a_y, "b_y": self.coefficients.b_y,
                "a_z": self.coefficients.a_z, "b_z": self.coefficients.b_z,
                "provenance": self.coefficients.provenance.value,
            },
            "notes": list(self.notes),
        }
