"""Magnetic atom-pendulum coupling in SI units.

Each cylinder is uniformly magnetized along its axis (z) with mu0 M = chi B_ext,
so its field equals that of a finite solenoid and has a closed form in terms of
Bulirsch's complete elliptic integral cel(kc, p, c, s).
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import WitnessError

MU0 = 1.25663706212e-6
HBAR = 1.054571817e-34
MU_B = 9.2740100783e-24
G_J = 2.00254032
G_I = -0.00039885395
CS_NUCLEAR_SPIN = 3.5


class PointInsideCylinder(WitnessError, ValueError):
    pass


class DerivativeNonConvergent(WitnessError, ArithmeticError):
    pass


class ZeemanMode(str, enum.Enum):
    QUADRATIC_CLOCK = "QuadraticClock"
    LINEAR_MF = "LinearMF"


def cel(kc, p, c, s, rtol: float = 1e-15, max_iter: int = 100):
    """Bulirsch's general complete elliptic integral, vectorized over kc and p."""
    kc, p, c, s = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (kc, p, c, s)))
    k = np.abs(kc).copy()
    if np.any(k == 0):
        raise ValueError("cel is singular at kc = 0")
    em = np.ones_like(k)
    pos = p > 0
    pp = np.where(pos, np.sqrt(np.abs(p)), 0.0)
    ss = np.where(pos, s / np.where(pos, pp, 1.0), 0.0)
    cc = c.copy()
    if not np.all(pos):
        f = k * k
        q = 1 - f
        g = 1 - p
        f = f - p
        q = q * (s - c * p)
        pneg = np.sqrt(np.where(pos, 1.0, f / g))
        ccn = (c - s) / g
        ssn = -q / (g * g * pneg) + ccn * pneg
        pp = np.where(pos, pp, pneg)
        cc = np.where(pos, cc, ccn)
        ss = np.where(pos, ss, ssn)
    kk = k.copy()
    f = cc
    cc = cc + ss / pp
    g = kk / pp
    ss = 2 * (ss + f * g)
    pp = g + pp
    g = em
    em = k + em
    for _ in range(max_iter):
        if np.all(np.abs(g - k) <= g * rtol):
            break
        k = 2 * np.sqrt(kk)
        kk = k * em
        f = cc
        cc = cc + ss / pp
        g = kk / pp
        ss = 2 * (ss + f * g)
        pp = g + pp
        g = em
        em = k + em
    return (math.pi / 2) * (ss + cc * em) / (em * (em + pp))


def solenoid_field(rho, z, radius: float, half_length: float, b0: float):
    """(B_rho, B_z) of an axially magnetized cylinder centred at the origin; b0 = mu0 M."""
    rho = np.asarray(rho, float)
    z = np.asarray(z, float)
    a = radius
    zp, zm = z + half_length, z - half_length
    ap = 1 / np.sqrt(zp**2 + (rho + a) ** 2)
    am = 1 / np.sqrt(zm**2 + (rho + a) ** 2)
    bp, bm = zp * ap, zm * am
    gam = (a - rho) / (a + rho)
    kp = np.sqrt((zp**2 + (a - rho) ** 2) / (zp**2 + (a + rho) ** 2))
    km = np.sqrt((zm**2 + (a - rho) ** 2) / (zm**2 + (a + rho) ** 2))
    b_rho = b0 * a / math.pi * (ap * cel(kp, 1, 1, -1) - am * cel(km, 1, 1, -1))
    b_z = b0 * a / (math.pi * (a + rho)) * (bp * cel(kp, gam**2, 1, gam) - bm * cel(km, gam**2, 1, gam))
    return b_rho, b_z


def on_axis_field(z, radius: float, half_length: float, b0: float):
    z = np.asarray(z, float)
    zp, zm = z + half_length, z - half_length
    return 0.5 * b0 * (zp / np.hypot(zp, radius) - zm / np.hypot(zm, radius))


@dataclass(frozen=True)
class CylinderPose:
    center: tuple[float, float, float]
    radius: float
    half_length: float


def _inside(rel, pose: CylinderPose, tol: float = 1e-12) -> np.ndarray:
    rho = np.hypot(rel[..., 0], rel[..., 1])
    return (rho < pose.radius * (1 - tol)) & (np.abs(rel[..., 2]) < pose.half_length * (1 - tol))


def cylinder_field(point, pose: CylinderPose, magnetization) -> np.ndarray:
    """Field (T) at point(s) of shape (..., 3); magnetization given as mu0 M (T), axial only."""
    mvec = np.asarray(magnetization, float)
    if abs(mvec[0]) > 0 or abs(mvec[1]) > 0:
        raise ValueError("closed form covers magnetization along the cylinder axis only")
    pts = np.asarray(point, float)
    rel = pts - np.asarray(pose.center)
    if np.any(_inside(rel, pose)):
        raise PointInsideCylinder("field requested inside magnetized material")
    rho = np.hypot(rel[..., 0], rel[..., 1])
    b_rho, b_z = solenoid_field(rho, rel[..., 2], pose.radius, pose.half_length, mvec[2])
    safe = np.where(rho > 0, rho, 1.0)
    out = np.empty(pts.shape)
    out[..., 0] = np.where(rho > 0, b_rho * rel[..., 0] / safe, 0.0)
    out[..., 1] = np.where(rho > 0, b_rho * rel[..., 1] / safe, 0.0)
    out[..., 2] = b_z
    return out


def field_by_quadrature(point, pose: CylinderPose, b0: float, rtol: float = 1e-10) -> np.ndarray:
    """Biot-Savart over the equivalent azimuthal surface current K = M on the side wall.

    The integral along the cylinder axis is done in closed form; the azimuthal
    one by adaptive quadrature.
    """
    x, y, z = np.asarray(point, float) - np.asarray(pose.center)
    r, b = pose.radius, pose.half_length

    def comps(phi):
        rx, ry = x - r * math.cos(phi), y - r * math.sin(phi)
        lx, ly = -math.sin(phi), math.cos(phi)
        d2 = rx * rx + ry * ry
        u1, u0 = z + b, z - b  # u = z - z' at z' = -b and z' = +b
        # int_{-b}^{b} u dz' / (d2 + u^2)^1.5 and int dz' / (d2 + u^2)^1.5
        i_u = 1 / math.sqrt(d2 + u0 * u0) - 1 / math.sqrt(d2 + u1 * u1)
        i_1 = (u1 / math.sqrt(d2 + u1 * u1) - u0 / math.sqrt(d2 + u0 * u0)) / d2
        return np.array([ly * i_u, -lx * i_u, (lx * ry - ly * rx) * i_1]) * r

    pref = b0 / (4 * math.pi)
    return np.array([pref * integrate.quad(lambda ph, k=k: comps(ph)[k], 0, 2 * math.pi,
                                           epsabs=1e-13, epsrel=rtol, limit=400)[0]
                     for k in range(3)])


def dipole_field(point, pose: CylinderPose, b0: float) -> np.ndarray:
    rel = np.asarray(point, float) - np.asarray(pose.center)
    r = np.linalg.norm(rel)
    moment = b0 / MU0 * math.pi * pose.radius**2 * 2 * pose.half_length
    mvec = np.array([0.0, 0.0, moment])
    rhat = rel / r
    return MU0 / (4 * math.pi) * (3 * rhat * (mvec @ rhat) - mvec) / r**3


@dataclass(frozen=True)
class CouplingGeometry:
    """Pendulum, cylinders and atom sites.  SI units; phi0 in rad/(ns T^2).

    layout ``stacked``: cylinders at azimuth +theta0 (above the base plane)
    and -theta0 (below it), plus the pair rotated by pi when n_cyl = 4.
    layout ``balanced``: a cylinder centred on the base plane at +theta0 and
    one at pi + theta0.
    """
    B_ext: float = 5e-3
    chi_m: float = 6.8e-5
    R0: float = 0.10
    omega: float = 2 * math.pi / 20
    rho_cyl: float = 19300.0
    cyl_length: float = 0.010
    cyl_radius: float = 0.005
    theta0: float = math.radians(2.0)
    s: float = 0.008
    delta_z: float = 5e-6
    n_cyl: int = 4
    phi0: float = 268.575
    alpha: float = 1.0
    atom_positions: tuple | None = None
    zeeman_mode: ZeemanMode = ZeemanMode.QUADRATIC_CLOCK
    layout: str = "stacked"
    n_atoms: float = 1.0
    g_J: float = G_J
    g_I: float = G_I
    nuclear_spin: float = CS_NUCLEAR_SPIN
    m_F: int = 1

    def __post_init__(self):
        for name in ("R0", "cyl_length", "cyl_radius", "s", "delta_z", "omega", "rho_cyl",
                     "alpha", "B_ext"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.radius < self.pendulum_radius:
            raise ValueError("cylinder radius must be smaller than the pendulum radius")
        if abs(self.chi_m) > 1:
            raise ValueError("|chi_m| must not exceed 1")
        if self.n_cyl not in (2, 4):
            raise ValueError("n_cyl must be 2 or 4")
        if self.layout not in ("stacked", "balanced"):
            raise ValueError("layout must be 'stacked' or 'balanced'")
        object.__setattr__(self, "zeeman_mode", ZeemanMode(self.zeeman_mode))

    @classmethod
    def table1(cls, **changes) -> "CouplingGeometry":
        return cls(**changes)

    @classmethod
    def simplified(cls, **changes) -> "CouplingGeometry":
        """Two superconducting lead cylinders, first-order Zeeman readout, N = 1e6."""
        base = dict(B_ext=0.05, chi_m=-1.0, R0=0.045, rho_cyl=11340.0, cyl_length=0.005,
                    cyl_radius=0.0025, n_cyl=2, layout="balanced",
                    zeeman_mode=ZeemanMode.LINEAR_MF, n_atoms=1e6)
        base.update(changes)
        return cls(**base)

    def replace(self, **changes) -> "CouplingGeometry":
        return dataclasses.replace(self, **changes)

    # lengths scaled by alpha, except delta_z
    @property
    def pendulum_radius(self) -> float:
        return self.alpha * self.R0

    @property
    def radius(self) -> float:
        return self.alpha * self.cyl_radius

    @property
    def length(self) -> float:
        return self.alpha * self.cyl_length

    @property
    def gap(self) -> float:
        return self.alpha * self.s

    @property
    def cylinder_mass(self) -> float:
        return math.pi * self.radius**2 * self.length * self.rho_cyl

    @property
    def magnetization(self) -> np.ndarray:
        """mu0 M to first order in chi."""
        return np.array([0.0, 0.0, self.chi_m * self.B_ext])

    def poses(self, theta: float = 0.0) -> list[CylinderPose]:
        rc = self.pendulum_radius - self.radius
        half = self.length / 2
        if self.layout == "stacked":
            slots = [(self.theta0, half), (-self.theta0, -half)]
            if self.n_cyl == 4:
                slots += [(math.pi + self.theta0, half), (math.pi - self.theta0, -half)]
        else:
            slots = [(self.theta0, 0.0), (math.pi + self.theta0, 0.0)]
            if self.n_cyl == 4:
                slots += [(-self.theta0, 0.0), (math.pi - self.theta0, 0.0)]
        return [CylinderPose((rc * math.cos(az + theta), rc * math.sin(az + theta), zc),
                             self.radius, half) for az, zc in slots]

    def sites(self) -> np.ndarray:
        """The two atom locations, upper first."""
        if self.atom_positions is not None:
            return np.asarray(self.atom_positions, float)
        x = self.pendulum_radius + self.gap
        if self.zeeman_mode is ZeemanMode.LINEAR_MF and self.layout == "stacked":
            top = self.length / 2
            return np.array([[x, 0.0, top], [x, 0.0, top - self.delta_z]])
        return np.array([[x, 0.0, self.delta_z / 2], [x, 0.0, -self.delta_z / 2]])


def induced_field(point, geometry: CouplingGeometry, theta: float = 0.0) -> np.ndarray:
    m = geometry.magnetization
    return sum(cylinder_field(point, pose, m) for pose in geometry.poses(theta))


def total_field(point, geometry: CouplingGeometry, theta: float = 0.0) -> np.ndarray:
    return np.array([0.0, 0.0, geometry.B_ext]) + induced_field(point, geometry, theta)


def _zeeman_linear_coefficient(geometry: CouplingGeometry) -> float:
    """Angular-frequency shift per tesla per unit m_F for the first-order Zeeman effect."""
    return (geometry.g_J - geometry.g_I) * MU_B / ((2 * geometry.nuclear_spin + 1) * HBAR)


def frequency_difference(geometry: CouplingGeometry, theta: float, points=None,
                         split: bool = False):
    """Angular-frequency difference between the two interferometer arms (rad/s).

    Quadratic mode: phi0 (B_top^2 - B_bot^2), split into the cross term
    2 B_ext . dB_cyl and the |B_cyl|^2 term (B_ext^2 cancels exactly).
    Linear mode: arms in m_F = +1 and -1, so the difference is k (|B_top| + |B_bot|).
    """
    pts = geometry.sites() if points is None else np.asarray(points, float)
    bext = np.array([0.0, 0.0, geometry.B_ext])
    bc = induced_field(pts, geometry, theta)
    top, bot = bc[..., 0, :], bc[..., 1, :]
    if geometry.zeeman_mode is ZeemanMode.QUADRATIC_CLOCK:
        phi0 = geometry.phi0 * 1e9
        cross = phi0 * 2 * (top - bot) @ bext
        square = phi0 * (np.sum(top * top, axis=-1) - np.sum(bot * bot, axis=-1))
        return (cross, square) if split else cross + square
    k = _zeeman_linear_coefficient(geometry) * geometry.m_F

    def beyond_linear(b):
        # |B_ext + b| - B_ext - b_z, written without cancellation
        full = np.linalg.norm(bext + b, axis=-1)
        perp = b[..., 0] ** 2 + b[..., 1] ** 2
        return perp / (full + geometry.B_ext + b[..., 2])

    cross = k * (top[..., 2] + bot[..., 2])
    rest = k * (beyond_linear(top) + beyond_linear(bot))
    return (cross, rest) if split else 2 * k * geometry.B_ext + cross + rest


def richardson_derivative(fn, h0: float, rtol: float = 1e-6, max_halvings: int = 12,
                          atol: float = 0.0):
    """Central difference with Richardson extrapolation, halving h until stable."""
    table = []
    h = h0
    prev = None
    for _ in range(max_halvings):
        row = [(fn(h) - fn(-h)) / (2 * h)]
        for j, old in enumerate(table[-1] if table else []):
            row.append(row[j] + (row[j] - old) / (4 ** (j + 1) - 1))
        table.append(row)
        best = row[-1]
        if prev is not None and abs(best - prev) <= max(rtol * abs(best), atol, 1e-300):
            return best
        prev = best
        h /= 2
    raise DerivativeNonConvergent(f"no convergence to {rtol} after {max_halvings} halvings")


@dataclass(frozen=True)
class CouplingResult:
    g: float
    lam: float
    lam_N: float
    dominance: float  # |B_cyl|^2 contribution / cross-term contribution to g
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {"g": self.g, "lambda": self.lam, "lambda_N": self.lam_N,
                "cross_term_dominance_ratio": self.dominance, "notes": list(self.notes)}


def coupling_g(geometry: CouplingGeometry, n_atoms: float | None = None,
               h0: float = 1e-3, rtol: float = 1e-6) -> CouplingResult:
    n = geometry.n_atoms if n_atoms is None else n_atoms
    x_zpf = math.sqrt(HBAR / (2 * geometry.n_cyl * geometry.cylinder_mass * geometry.omega))
    lever = geometry.pendulum_radius - geometry.radius
    cross = richardson_derivative(lambda th: frequency_difference(geometry, th, split=True)[0],
                                  h0, rtol)
    square = richardson_derivative(lambda th: frequency_difference(geometry, th, split=True)[1],
                                   h0, rtol, atol=rtol * abs(cross)) if geometry.chi_m != 0 else 0.0
    g = x_zpf / lever * (cross + square)
    lam = g / geometry.omega
    notes = []
    if geometry.chi_m <= -1 + 1e-12:
        notes.append("chi=-1 uses the uniform-magnetization model; Meissner boundary "
                     "conditions are not modelled")
    dom = abs(square / cross) if cross else math.nan
    return CouplingResult(g, lam, math.sqrt(n) * lam, dom, tuple(notes))


SCALING_FACTORS = {"B": ("B_ext", 2.0), "chi": ("chi_m", 2.0), "rho": ("rho_cyl", 4.0),
                   "alpha": ("alpha", 0.5)}


def scaling_check(geometry: CouplingGeometry, factor: str, ratio: float | None = None) -> float:
    """Log-slope of lambda when one parameter is multiplied by ``ratio``.

    Scaling alpha keeps delta_z fixed; in the stacked linear-mode layout the
    upper site follows the cylinder top and the lower one stays delta_z below.
    """
    name, default = SCALING_FACTORS[factor]
    r = default if ratio is None else ratio
    base = coupling_g(geometry).lam
    moved = coupling_g(geometry.replace(**{name: getattr(geometry, name) * r})).lam
    return math.log(moved / base) / math.log(r)


def phase_rate(geometry: CouplingGeometry, theta) -> np.ndarray:
    """Oscillator-induced part of the arm frequency difference, rad/s."""
    theta = np.atleast_1d(np.asarray(theta, float))
    ref = frequency_difference(geometry, 0.0)
    return np.array([frequency_difference(geometry, float(t)) - ref for t in theta])


def phase_trace(geometry: CouplingGeometry, theta_max: float, t_grid) -> np.ndarray:
    """Rows (t, theta(t), phi(t)) for classical motion theta = theta_max sin(omega t)."""
    t = np.asarray(t_grid, float)
    theta = theta_max * np.sin(geometry.omega * t)
    rate = phase_rate(geometry, theta) if theta_max != 0 else np.zeros_like(t)
    phi = integrate.cumulative_trapezoid(rate, t, initial=0.0) if len(t) > 1 else np.zeros_like(t)
    return np.column_stack([t, theta, phi])


def phase_rate_map(geometry: CouplingGeometry, z_values, y_values=None, theta_values=None,
                   theta: float = 0.0) -> np.ndarray:
    """Arm frequency difference for an atom pair (delta_z apart) centred at each grid point.

    Give ``y_values`` for a (y, z) map at fixed pendulum angle ``theta`` with
    x at the default site radius, or ``theta_values`` for a (theta, z) map at y = 0.
    Returns rows (first_coordinate, z, rate).
    """
    x = geometry.pendulum_radius + geometry.gap
    dz = geometry.delta_z / 2
    rows = []
    if (y_values is None) == (theta_values is None):
        raise ValueError("give exactly one of y_values or theta_values")
    if y_values is not None:
        for y in y_values:
            for z in z_values:
                pts = np.array([[x, y, z + dz], [x, y, z - dz]])
                rows.append((y, z, frequency_difference(geometry, theta, pts)))
    else:
        for th in theta_values:
            for z in z_values:
                pts = np.array([[x, 0.0, z + dz], [x, 0.0, z - dz]])
                rows.append((th, z, frequency_difference(geometry, th, pts)))
    return np.array(rows, float)


def divergence(point, geometry: CouplingGeometry, h: float = 1e-6) -> tuple[float, float]:
    """Central-difference div B and the local gradient scale max |dB_i/dx_j|."""
    p = np.asarray(point, float)
    jac = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        jac[:, j] = (induced_field(p + e, geometry) - induced_field(p - e, geometry)) / (2 * h)
    return float(np.trace(jac)), float(np.abs(jac).max())
