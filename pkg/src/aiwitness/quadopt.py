"""Quadratic structure of the witness in its four free coefficients.

With x = (a_y, b_y, a_z, b_z) the entangled-state value is

    W(x) = sum_mu Var(J_mu) + l . x + x^T H x

where l collects twice the spin/oscillator covariances and H is two copies of
the oscillator covariance matrix.  Minimizing W is then a 4x4 linear solve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import MomentTable, Provenance, WitnessCoefficients, WitnessError


class IndefiniteForm(WitnessError):
    """Hessian has a negative eigenvalue, so the moments cannot come from a state."""


@dataclass(frozen=True)
class QuadraticForm:
    constant: float
    linear: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hessian, dtype=float)
        if h.shape != (4, 4) or np.asarray(self.linear).shape != (4,):
            raise ValueError("expected a 4-vector and a 4x4 matrix")
        if not np.allclose(h, h.T, rtol=0, atol=1e-14 * max(1.0, np.abs(h).max())):
            raise ValueError("hessian is not symmetric")

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.constant + self.linear @ x + x @ self.hessian @ x)

    def __call__(self, coeffs: WitnessCoefficients) -> float:
        return self.value(coeffs.as_tuple())


def assemble(moments: MomentTable) -> QuadraticForm:
    m = moments
    linear = 2.0 * np.array([m.cov_jq(1), m.cov_jp(1), m.cov_jq(2), m.cov_jp(2)])
    block = np.array([[m.var_q, m.cov_qp], [m.cov_qp, m.var_p]])
    hessian = scipy.linalg.block_diag(block, block)
    return QuadraticForm(m.spin_variance_sum(), linear, hessian)


def per_term(moments: MomentTable, coeffs: WitnessCoefficients) -> tuple[float, float, float]:
    """Var(J_x), Var(J_y + a_y q + b_y p), Var(J_z + a_z q + b_z p)."""
    m = moments
    out = [m.var_j(0)]
    for mu, a, b in ((1, coeffs.a_y, coeffs.b_y), (2, coeffs.a_z, coeffs.b_z)):
        out.append(m.var_j(mu) + 2 * a * m.cov_jq(mu) + 2 * b * m.cov_jp(mu)
                   + a * a * m.var_q + b * b * m.var_p + 2 * a * b * m.cov_qp)
    return tuple(out)


def witness_from_moments(moments: MomentTable, coeffs: WitnessCoefficients) -> float:
    return float(sum(per_term(moments, coeffs)))


def minimize(form: QuadraticForm, psd_tol: float = 1e-12) -> tuple[WitnessCoefficients, float]:
    """Stationary point of the form; minimum-norm solution when H is singular."""
    h = form.hessian
    scale = max(np.abs(h).max(), 1e-300)
    evals = np.linalg.eigvalsh(h)
    if evals[0] < -psd_tol * scale:
        raise IndefiniteForm(f"smallest hessian eigenvalue {evals[0]:.3e}")
    rhs = -0.5 * form.linear
    if evals[0] > 1e-10 * scale:
        x = scipy.linalg.solve(h, rhs, assume_a="pos")
    else:
        x = np.linalg.pinv(h, rcond=1e-10, hermitian=True) @ rhs
    coeffs = WitnessCoefficients(*map(float, x), provenance=Provenance.NUMERIC_OPTIMUM)
    return coeffs, form.value(x)


def hofmann_terms(coeffs: WitnessCoefficients, j_min_exp: float) -> tuple[float, float]:
    """Spin floor and oscillator floor whose sum bounds W for separable states."""
    return float(j_min_exp), abs(coeffs.cross)


def hofmann_bound(coeffs: WitnessCoefficients, j_min_exp: float) -> float:
    return sum(hofmann_terms(coeffs, j_min_exp))


# --- separable-state sampling -------------------------------------------------

def spin_operators(n_atoms: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective spin matrices on the symmetric subspace, basis m = -N/2..N/2."""
    j = n_atoms / 2
    m = np.arange(n_atoms + 1) - j
    jp = np.zeros((n_atoms + 1, n_atoms + 1))
    idx = np.arange(n_atoms)
    jp[idx + 1, idx] = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    return jx, jy, np.diag(m)


def ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


def quadratures(dim: int, mass: float = 1.0, omega: float = 1.0):
    a = ladder(dim)
    q = np.sqrt(1 / (2 * mass * omega)) * (a + a.T)
    p = 1j * np.sqrt(mass * omega / 2) * (a.T - a)
    return q, p


def _expect(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ op)))


def product_moments(spin_rho: np.ndarray, osc_rho: np.ndarray, n_atoms: int,
                    mass: float = 1.0, omega: float = 1.0) -> MomentTable:
    """Moments of spin_rho (x) osc_rho.  osc_rho lives on the first K Fock levels."""
    k = osc_rho.shape[0]
    pad = np.zeros((k + 1, k + 1), dtype=complex)
    pad[:k, :k] = osc_rho
    q, p = quadratures(k + 1, mass, omega)
    js = spin_operators(n_atoms)
    jm = tuple(_expect(spin_rho, j) for j in js)
    jsq = tuple(_expect(spin_rho, j @ j) for j in js)
    qm, pm = _expect(pad, q), _expect(pad, p)
    return MomentTable(
        j_mean=jm, j_sq=jsq, q_mean=qm, p_mean=pm,
        q_sq=_expect(pad, q @ q), p_sq=_expect(pad, p @ p), qp=_expect(pad, q @ p + p @ q),
        qj=tuple(2 * qm * v for v in jm), pj=tuple(2 * pm * v for v in jm),
    )


def mix_moments(tables, weights) -> MomentTable:
    """Convex combination of moment tables (moments are linear in the state)."""
    w = np.asarray(weights, float)
    w = w / w.sum()

    def avg(get):
        vals = [np.asarray(get(t), float) for t in tables]
        out = sum(wi * v for wi, v in zip(w, vals))
        return tuple(map(float, out)) if np.ndim(out) else float(out)

    return MomentTable(**{f: avg(lambda t, f=f: getattr(t, f))
                          for f in MomentTable.__dataclass_fields__})


def random_symmetric_spin(n_atoms: int, rng: np.random.Generator) -> np.ndarray:
    """Spin-coherent state half the time, otherwise a Haar-random symmetric state."""
    jx, jy, jz = spin_operators(n_atoms)
    if rng.random() < 0.5:
        theta, phi = np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)
        top = np.zeros(n_atoms + 1, complex)
        top[-1] = 1.0
        psi = scipy.linalg.expm(-1j * phi * jz) @ scipy.linalg.expm(-1j * theta * jy) @ top
    else:
        psi = rng.normal(size=n_atoms + 1) + 1j * rng.normal(size=n_atoms + 1)
        psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_gaussian_oscillator(fock_dim: int, rng: np.random.Generator,
                               work_dim: int | None = None) -> np.ndarray:
    """Displaced, squeezed thermal state projected onto fock_dim levels."""
    big = work_dim or 4 * fock_dim
    a = ladder(big)
    nbar = rng.exponential(0.5)
    pops = (nbar / (nbar + 1)) ** np.arange(big) / (nbar + 1)
    rho = np.diag(pops / pops.sum()).astype(complex)
    r, ang = rng.uniform(0, 0.6), rng.uniform(0, 2 * np.pi)
    zeta = r * np.exp(1j * ang)
    s_op = scipy.linalg.expm(0.5 * (np.conj(zeta) * a @ a - zeta * a.T @ a.T))
    alpha = rng.normal(scale=0.8) + 1j * rng.normal(scale=0.8)
    d_op = scipy.linalg.expm(alpha * a.T - np.conj(alpha) * a)
    u = d_op @ s_op
    rho = u @ rho @ u.conj().T
    rho = rho[:fock_dim, :fock_dim]
    rho = (rho + rho.conj().T) / 2
    return rho / np.real(np.trace(rho))


def random_separable_moments(n_atoms: int, fock_dim: int, rng: np.random.Generator,
                             max_components: int = 3, mass: float = 1.0,
                             omega: float = 1.0) -> MomentTable:
    n_comp = int(rng.integers(1, max_components + 1))
    tables = [product_moments(random_symmetric_spin(n_atoms, rng),
                              random_gaussian_oscillator(fock_dim, rng), n_atoms, mass, omega)
              for _ in range(n_comp)]
    return mix_moments(tables, rng.random(n_comp) + 0.1)
