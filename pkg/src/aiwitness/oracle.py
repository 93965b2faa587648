"""Exact small-N quantum oracle on (symmetric spin) x (truncated Fock space).

H = omega c^dag c + g (c + c^dag) J_z conserves J_z, so each sector m evolves
the oscillator independently:

    U_m |n> = exp(-i lambda^2 m^2 sin x) exp(-i x n) D(beta_m) |n>,
    beta_m = lambda m (exp(-i x) - 1),  x = omega t.

The full propagator multiplies sector m by an extra exp(+i lambda^2 x m^2)
(the one-axis twisting term), available via ``include_squeezing``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import comb, gammaln
from scipy.stats import poisson

from .core import MomentTable, ScenarioConfig, WitnessCoefficients, WitnessError
from .quadopt import quadratures, spin_operators

MAX_ATOMS = 12


class TruncationInsufficient(WitnessError):
    pass


class OracleScaleExceeded(WitnessError, ValueError):
    pass


def displacement_matrix(beta: complex, dim: int) -> np.ndarray:
    """Exact matrix elements <j|D(beta)|n> for j, n < dim.

    Uses D = exp(-|b|^2/2) exp(b c^dag) exp(-b* c); the intermediate Fock index
    never exceeds min(j, n), so truncation introduces no error in the entries.
    """
    if beta == 0:
        return np.eye(dim, dtype=complex)
    idx = np.arange(dim)
    d = idx[:, None] - idx[None, :]
    lower = d >= 0
    dd = np.where(lower, d, 0)
    lg = gammaln(idx + 1)
    logmag = (dd * math.log(abs(beta)) + 0.5 * (lg[:, None] - lg[None, :]) - gammaln(dd + 1))
    up = np.where(lower, np.exp(logmag) * np.exp(1j * dd * np.angle(beta)), 0)
    mb = -np.conj(beta)
    logmag_dn = dd * math.log(abs(mb)) + 0.5 * (lg[:, None] - lg[None, :]) - gammaln(dd + 1)
    dn = np.where(lower, np.exp(logmag_dn) * np.exp(1j * dd * np.angle(mb)), 0).T
    return math.exp(-abs(beta) ** 2 / 2) * (up @ dn)


def thermal_weights(nbar: float, tail_tol: float = 1e-12) -> np.ndarray:
    """Bose-Einstein populations up to cumulative weight 1 - tail_tol (unnormalized tail dropped)."""
    if nbar == 0:
        return np.ones(1)
    ratio = nbar / (nbar + 1)
    n_max = int(math.ceil(math.log(tail_tol) / math.log(ratio)))
    return ratio ** np.arange(n_max) / (nbar + 1)


@dataclass(frozen=True)
class HilbertSpec:
    n_atoms: int
    fock_dim: int
    tail_tol: float = 1e-12

    @classmethod
    def auto(cls, config: ScenarioConfig, tail_tol: float = 1e-12, margin: int = 8,
             thermal: bool = False) -> "HilbertSpec":
        beta_max = config.lam * config.n_atoms / 2 * abs(np.exp(-1j * config.omega_t) - 1)
        mu = beta_max**2
        k = 1
        while poisson.sf(k - 1, mu) >= tail_tol:
            k += 1
        if thermal and config.nbar > 0:
            n_top = len(thermal_weights(config.nbar, tail_tol))
            k = n_top + int(6 * (1 + beta_max * math.sqrt(n_top))) + k
        return cls(config.n_atoms, k + margin, tail_tol)


@dataclass
class EvolvedState:
    """Mixture of pure components, each an (N+1, K) amplitude array psi[m, n]."""
    components: list
    weights: np.ndarray
    spec: HilbertSpec
    include_squeezing: bool = False
    mass: float = 1.0
    omega: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(sum(w * np.vdot(p, p).real for w, p in zip(self.weights, self.components)))


def _sector_phases(config: ScenarioConfig, include_squeezing: bool) -> np.ndarray:
    m = np.arange(config.n_atoms + 1) - config.n_atoms / 2
    x = config.omega_t
    phase = -config.lam**2 * m**2 * math.sin(x)
    if include_squeezing:
        phase = phase + config.lam**2 * x * m**2
    return np.exp(1j * phase)


def _sector_displacements(config: ScenarioConfig, dim: int) -> list:
    m = np.arange(config.n_atoms + 1) - config.n_atoms / 2
    shift = np.exp(-1j * config.omega_t) - 1
    return [displacement_matrix(config.lam * mm * shift, dim) for mm in m]


def _check_scale(config: ScenarioConfig):
    if config.n_atoms > MAX_ATOMS:
        raise OracleScaleExceeded(f"oracle supports N <= {MAX_ATOMS}, got {config.n_atoms}")


def evolve(config: ScenarioConfig, spec: HilbertSpec | None = None,
           include_squeezing: bool = False, fock_levels=(0,), weights=None) -> EvolvedState:
    """Evolve |+...+> (x) (mixture of Fock states) by the conditional displacement."""
    _check_scale(config)
    spec = spec or HilbertSpec.auto(config, thermal=len(fock_levels) > 1)
    n = config.n_atoms
    amp = np.sqrt(comb(n, np.arange(n + 1))) / 2 ** (n / 2)
    phases = _sector_phases(config, include_squeezing) * amp
    disp = _sector_displacements(config, spec.fock_dim)
    levels = np.asarray(fock_levels)
    if levels.max() >= spec.fock_dim:
        raise TruncationInsufficient("initial Fock level beyond the truncation")
    free = np.exp(-1j * config.omega_t * levels)
    # cols[i, m, :] = D_m[:, n_i]
    cols = np.stack([d[:, levels].T for d in disp], axis=1)
    tail = 1 - np.sum(np.abs(cols) ** 2, axis=2)
    if tail.max() > spec.tail_tol:
        raise TruncationInsufficient(f"discarded population {tail.max():.2e} > {spec.tail_tol:.0e}")
    comps = [phases[:, None] * f * c for f, c in zip(free, cols)]
    w = np.ones(1) if weights is None else np.asarray(weights, float)
    return EvolvedState(comps, w, spec, include_squeezing, config.mass, config.omega)


def evolve_dense(config: ScenarioConfig, spec: HilbertSpec) -> np.ndarray:
    """Reference path: expm of the truncated Hamiltonian applied to |+...+>|0>."""
    _check_scale(config)
    n, k = config.n_atoms, spec.fock_dim
    _, _, jz = spin_operators(n)
    a = np.diag(np.sqrt(np.arange(1, k)), 1)
    g = config.lam * config.omega
    ham = (config.omega * np.kron(np.eye(n + 1), a.T @ a)
           + g * np.kron(jz, a + a.T))
    spin0 = np.sqrt(comb(n, np.arange(n + 1))) / 2 ** (n / 2)
    vac = np.zeros(k)
    vac[0] = 1
    psi = scipy.linalg.expm(-1j * ham * config.time) @ np.kron(spin0, vac)
    return psi.reshape(n + 1, k)


def _pad(psi: np.ndarray) -> np.ndarray:
    return np.concatenate([psi, np.zeros((psi.shape[0], 1))], axis=1)


def _raw_moments(psi: np.ndarray, js, q, p) -> np.ndarray:
    """Vector of raw moments of one pure component (see _TABLE_ORDER)."""
    psi = _pad(psi)
    jpsi = [j @ psi for j in js]
    qpsi = psi @ q.T
    ppsi = psi @ p.T
    out = []
    for jp in jpsi:
        out.append(np.vdot(psi, jp))
    for jp in jpsi:
        out.append(np.vdot(jp, jp))
    out += [np.vdot(psi, qpsi), np.vdot(psi, ppsi), np.vdot(qpsi, qpsi), np.vdot(ppsi, ppsi),
            2 * np.vdot(qpsi, ppsi).real + 0j]
    for jp in jpsi:
        out.append(2 * np.vdot(qpsi, jp))
    for jp in jpsi:
        out.append(2 * np.vdot(ppsi, jp))
    return np.array(out)


def _table(vec: np.ndarray) -> MomentTable:
    v = [float(x) for x in vec]
    return MomentTable(j_mean=tuple(v[0:3]), j_sq=tuple(v[3:6]), q_mean=v[6], p_mean=v[7],
                       q_sq=v[8], p_sq=v[9], qp=v[10], qj=tuple(v[11:14]), pj=tuple(v[14:17]))


def _operators(state: EvolvedState):
    n, k = state.spec.n_atoms, state.components[0].shape[1]
    q, p = quadratures(k + 1, state.mass, state.omega)
    return spin_operators(n), q, p


def moments(state: EvolvedState, imag_tol: float = 1e-12) -> MomentTable:
    js, q, p = _operators(state)
    total = sum(w * _raw_moments(psi, js, q, p) for w, psi in zip(state.weights, state.components))
    total = total / np.sum(state.weights)
    scale = max(1.0, float(np.abs(total).max()))
    if np.abs(total.imag).max() > imag_tol * scale:
        raise AssertionError(f"non-Hermitian expectation {np.abs(total.imag).max():.2e}")
    return _table(total.real)


def thermal_moments(config: ScenarioConfig, spec: HilbertSpec | None = None,
                    include_squeezing: bool = False) -> MomentTable:
    """Moments after evolving |+...+> (x) thermal(nbar) for time t."""
    w = thermal_weights(config.nbar, 1e-12 if spec is None else spec.tail_tol)
    spec = spec or HilbertSpec.auto(config, thermal=True)
    state = evolve(config, spec, include_squeezing, fock_levels=np.arange(len(w)), weights=w)
    return moments(state)


def sector_means(state: EvolvedState) -> tuple[np.ndarray, np.ndarray]:
    """Conditional <q>, <p> in each J_z sector of a pure state."""
    psi = _pad(state.components[0])
    _, q, p = _operators(state)
    pops = np.sum(np.abs(psi) ** 2, axis=1)
    qm = np.einsum("mi,ij,mj->m", psi.conj(), q, psi).real / pops
    pm = np.einsum("mi,ij,mj->m", psi.conj(), p, psi).real / pops
    return qm, pm


# --- dephasing ----------------------------------------------------------------

def _qubit_spin_ops(n: int):
    """Collective J_x, J_y, J_z on the full 2^N space; bit 0 is spin up."""
    sx = np.array([[0, 1], [1, 0]], complex) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]], complex) / 2
    out = []
    for s in (sx, sy, sz):
        total = np.zeros((2**n, 2**n), complex)
        for j in range(n):
            mats = [np.eye(2)] * n
            mats[j] = s
            term = mats[0]
            for mm in mats[1:]:
                term = np.kron(term, mm)
            total += term
        out.append(total)
    return out


@dataclass(frozen=True)
class DephasedEstimate:
    moments: MomentTable
    standard_errors: MomentTable
    samples: np.ndarray  # per-sample raw moment vectors, shape (n_samples, 17)

    def witness(self, coeffs: WitnessCoefficients) -> tuple[float, float]:
        """W at the averaged moments and its delta-method standard error."""
        from .quadopt import per_term
        w = float(sum(per_term(self.moments, coeffs)))
        grad = _witness_gradient(self.moments, coeffs)
        lin = self.samples @ grad
        return w, float(lin.std(ddof=1) / np.sqrt(len(lin)))


def _witness_gradient(m: MomentTable, c: WitnessCoefficients) -> np.ndarray:
    """d W / d(raw moment vector) in _raw_moments order."""
    g = np.zeros(17)
    a = (0.0, c.a_y, c.a_z)
    b = (0.0, c.b_y, c.b_z)
    suma2 = c.a_y**2 + c.a_z**2
    sumb2 = c.b_y**2 + c.b_z**2
    sumab = c.a_y * c.b_y + c.a_z * c.b_z
    for mu in range(3):
        # Var(O_mu) with O = J + a q + b p; mean of O is J + a q + b p
        mean_o = m.j_mean[mu] + a[mu] * m.q_mean + b[mu] * m.p_mean
        g[mu] += -2 * mean_o
        g[6] += -2 * mean_o * a[mu]
        g[7] += -2 * mean_o * b[mu]
        g[3 + mu] += 1.0
        g[11 + mu] += a[mu]
        g[14 + mu] += b[mu]
    g[8] += suma2
    g[9] += sumb2
    g[10] += sumab
    return g


def dephase_average(config: ScenarioConfig, spec: HilbertSpec | None = None,
                    n_samples: int = 10_000, seed: int = 0, chunk: int = 2048,
                    max_atoms: int = 8) -> DephasedEstimate:
    """Average moments over Gaussian per-atom z-rotations with variance sigma2.

    The rotations commute with H, so each sample is |+...+> rotated then evolved.
    With |phi_m> = U_m |0>, every moment is A^dag (O o M) A over bitstrings b
    where A_b carries the rotation phases and M[b, b'] is an oscillator matrix
    element between the sectors of b and b'.
    """
    n = config.n_atoms
    if n > max_atoms:
        raise OracleScaleExceeded(f"dephasing oracle works on 2^N states; N <= {max_atoms}")
    spec = spec or HilbertSpec.auto(config)
    pure = evolve(config, spec)
    amp = np.sqrt(comb(n, np.arange(n + 1))) / 2 ** (n / 2)
    phi = _pad(pure.components[0] / amp[:, None])  # row m: U_m |0>
    q, p = quadratures(phi.shape[1], config.mass, config.omega)
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[::-1]) & 1
    spins = 1 - 2 * bits  # +1 up, -1 down
    sector = ((spins.sum(axis=1) + n) // 2).astype(int)  # index into m = -N/2..N/2

    def lift(op):
        mat = phi.conj() @ op @ phi.T
        return mat[np.ix_(sector, sector)]

    eye = np.eye(phi.shape[1])
    gram, qm, pm = lift(eye), lift(q), lift(p)
    q2, p2, qp = lift(q @ q), lift(p @ p), lift(q @ p + p @ q)
    js = _qubit_spin_ops(n)
    mats = []
    mats += [j * gram for j in js]
    mats += [(j @ j) * gram for j in js]
    diag = np.eye(2**n)
    mats += [diag * qm, diag * pm, diag * q2, diag * p2, diag * qp]
    mats += [2 * j * qm for j in js]
    mats += [2 * j * pm for j in js]
    stack = np.stack(mats)

    seeds = np.random.SeedSequence(seed).spawn(-(-n_samples // chunk))
    rows = []
    sigma = math.sqrt(config.sigma2)
    for i, ss in enumerate(seeds):
        size = min(chunk, n_samples - i * chunk)
        alpha = sigma * np.random.default_rng(ss).standard_normal((size, n))
        a = np.exp(-0.5j * alpha @ spins.T) / 2 ** (n / 2)
        rows.append(np.einsum("si,kij,sj->sk", a.conj(), stack, a, optimize=True).real)
    samples = np.concatenate(rows)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n_samples) if n_samples > 1 else 0 * mean
    return DephasedEstimate(_table(mean), _table(se), samples)


# --- projective sampling ------------------------------------------------------

def observable_matrix(state: EvolvedState, which: str,
                      coeffs: WitnessCoefficients | None = None) -> np.ndarray:
    """J_x, or J_mu + a_mu q + b_mu p for which in {'y', 'z'}, on the truncated space."""
    n, k = state.spec.n_atoms, state.components[0].shape[1]
    js = spin_operators(n)
    q, p = quadratures(k, state.mass, state.omega)
    idx = {"x": 0, "y": 1, "z": 2}[which]
    op = np.kron(js[idx], np.eye(k))
    if idx and coeffs is not None:
        a, b = (coeffs.a_y, coeffs.b_y) if idx == 1 else (coeffs.a_z, coeffs.b_z)
        op = op + a * np.kron(np.eye(n + 1), q) + b * np.kron(np.eye(n + 1), p)
    return op


def spectral_distribution(state: EvolvedState, which: str,
                          coeffs: WitnessCoefficients | None = None):
    """Eigenvalues of the observable and their outcome probabilities."""
    vals, vecs = np.linalg.eigh(observable_matrix(state, which, coeffs))
    probs = np.zeros_like(vals)
    for w, psi in zip(state.weights, state.components):
        probs += w * np.abs(vecs.conj().T @ psi.ravel()) ** 2
    probs /= probs.sum()
    return vals, probs


def sample_observable(state: EvolvedState, which: str, coeffs: WitnessCoefficients | None,
                      n_shots: int, seed: int) -> np.ndarray:
    vals, probs = spectral_distribution(state, which, coeffs)
    rng = np.random.default_rng(seed)
    return vals[rng.choice(len(vals), size=n_shots, p=probs)]
