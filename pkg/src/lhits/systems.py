"""Ground-truth PDE solvers: reaction-diffusion neuron model and a chaotic
fourth-order flow on a periodic domain.

The reaction-diffusion system is integrated by second-order central
differences in space (homogeneous Neumann walls via reflected ghost points)
and classical RK4 substepping in time. The periodic fourth-order system is
integrated pseudospectrally with the ETDRK4 scheme of Kassam & Trefethen
(SIAM J. Sci. Comput. 26, 2005), evaluating the phi-coefficients by a
contour average over roots of unity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TrajectorySet
from .errors import ConfigError, DivergenceError
from .utils import rng_for
from .validation import check_vector

FHN_EPSILON = 0.015
KS_UXX_COEFFICIENT = 0.5


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-d grid; dx = L/n when periodic, L/(n-1) otherwise."""

    n: int
    length: float
    periodic: bool = False
    x0: float = 0.0

    def __post_init__(self):
        if self.n < 4:
            raise ConfigError(f"grid needs n >= 4 points, got {self.n}")
        if not self.length > 0:
            raise ConfigError(f"grid length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n if self.periodic else self.length / (self.n - 1)

    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)


# ---------------------------------------------------------------------------
# Reaction-diffusion neuron model (fast activator u, slow recovery v)
# ---------------------------------------------------------------------------

def fhn_reaction(u: np.ndarray) -> np.ndarray:
    """Cubic activation term u(u - 0.1)(1 - u)."""
    return u * (u - 0.1) * (1.0 - u)


def _laplacian_neumann(u: np.ndarray, dx: float) -> np.ndarray:
    # reflected ghost points: u[-1] := u[1], u[n] := u[n-2]
    out = np.empty_like(u)
    out[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    out[0] = 2.0 * (u[1] - u[0])
    out[-1] = 2.0 * (u[-2] - u[-1])
    out /= dx * dx
    return out


def fhn_rhs(u: np.ndarray, v: np.ndarray, grid: Grid1D, eps: float = FHN_EPSILON):
    """Time derivatives (du_dt, dv_dt) of the two coupled fields.

    du/dt = eps * u_xx + (u(u-0.1)(1-u) - v + 0.05) / eps
    dv/dt = 0.5 u - 2 v + 0.05
    """
    if grid.periodic:
        raise ConfigError("this system uses a non-periodic grid with Neumann walls")
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    u = check_vector(u, "u", size=grid.n)
    v = check_vector(v, "v", size=grid.n)
    du = eps * _laplacian_neumann(u, grid.dx) + (fhn_reaction(u) - v + 0.05) / eps
    dv = 0.5 * u - 2.0 * v + 0.05
    return du, dv


def simulate_fhn(u0, v0, grid: Grid1D, dt: float, steps: int, substeps: int = 4,
                 eps: float = FHN_EPSILON) -> np.ndarray:
    """RK4 method-of-lines integration; returns (steps+1, 2n) stacked [u; v].

    The state is recorded every `dt`; each recorded step is composed of
    `substeps` internal RK4 steps of size dt/substeps for stability of the
    stiff reaction term.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if substeps < 1:
        raise ConfigError(f"substeps must be >= 1, got {substeps}")
    u = check_vector(u0, "u0", size=grid.n).copy()
    v = check_vector(v0, "v0", size=grid.n).copy()
    n = grid.n
    dx = grid.dx
    h = dt / substeps
    out = np.empty((steps + 1, 2 * n))
    out[0, :n] = u
    out[0, n:] = v

    def rhs(uu, vv):
        du = eps * _laplacian_neumann(uu, dx) + (fhn_reaction(uu) - vv + 0.05) / eps
        dv = 0.5 * uu - 2.0 * vv + 0.05
        return du, dv

    for k in range(1, steps + 1):
        for _ in range(substeps):
            k1u, k1v = rhs(u, v)
            k2u, k2v = rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v)
            k3u, k3v = rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v)
            k4u, k4v = rhs(u + h * k3u, v + h * k3v)
            u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise DivergenceError(f"reaction-diffusion state blew up at step {k}")
        out[k, :n] = u
        out[k, n:] = v
    return out


# ---------------------------------------------------------------------------
# Periodic fourth-order flow  u_t = -u u_x - c u_xx - u_xxxx
# ---------------------------------------------------------------------------

def _spectral_setup(grid: Grid1D, uxx_coeff: float):
    if not grid.periodic:
        raise ConfigError("the fourth-order flow requires a periodic grid")
    if grid.n % 2 != 0:
        raise ConfigError(f"spectral solver needs an even grid size, got {grid.n}")
    n = grid.n
    q = 2.0 * np.pi * np.arange(n // 2 + 1) / grid.length
    deriv = 1j * q.copy()
    deriv[-1] = 0.0  # zero the Nyquist mode for odd derivatives
    lin = uxx_coeff * q ** 2 - q ** 4
    dealias = np.arange(n // 2 + 1) <= n // 3  # 2/3-rule cutoff
    return q, deriv, lin, dealias


def ks_rhs(u: np.ndarray, grid: Grid1D, uxx_coeff: float = KS_UXX_COEFFICIENT) -> np.ndarray:
    """Spectral right-hand side with 2/3-rule dealiasing of the quadratic term."""
    q, deriv, _, dealias = _spectral_setup(grid, uxx_coeff)
    u = check_vector(u, "u", size=grid.n)
    uh = np.fft.rfft(u)
    ux = np.fft.irfft(deriv * uh, n=grid.n)
    prod_h = np.fft.rfft(u * ux)
    prod_h[~dealias] = 0.0
    u_xx = np.fft.irfft(-(q ** 2) * uh, n=grid.n)
    u_xxxx = np.fft.irfft(q ** 4 * uh, n=grid.n)
    return -np.fft.irfft(prod_h, n=grid.n) - uxx_coeff * u_xx - u_xxxx


class KsEtdrk4:
    """ETDRK4 stepper in spectral space with precomputed phi-coefficients.

    The coefficients are contour averages of the phi-functions over
    `n_quadrature` points on the unit circle centered at each h*L_k; the
    points come in conjugate pairs so the averages are real up to rounding
    (the largest imaginary residue is kept in `phi_imag_residual_`).
    """

    def __init__(self, grid: Grid1D, dt: float, uxx_coeff: float = KS_UXX_COEFFICIENT,
                 n_quadrature: int = 32, nonlinear: bool = True):
        if not dt > 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        self.grid = grid
        self.dt = float(dt)
        self.nonlinear = bool(nonlinear)
        q, deriv, lin, dealias = _spectral_setup(grid, uxx_coeff)
        self._deriv = deriv
        self._dealias = dealias
        self.linear_multipliers = lin
        h = self.dt
        self.exp_full = np.exp(h * lin)
        self.exp_half = np.exp(0.5 * h * lin)
        m = int(n_quadrature)
        roots = np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
        z = h * lin[:, None] + roots[None, :]
        ez = np.exp(z)
        q_c = h * ((np.exp(z / 2.0) - 1.0) / z).mean(axis=1)
        f1_c = h * ((-4.0 - z + ez * (4.0 - 3.0 * z + z ** 2)) / z ** 3).mean(axis=1)
        f2_c = h * ((2.0 + z + ez * (z - 2.0)) / z ** 3).mean(axis=1)
        f3_c = h * ((-4.0 - 3.0 * z - z ** 2 + ez * (4.0 - z)) / z ** 3).mean(axis=1)
        self.phi_imag_residual_ = max(
            float(np.max(np.abs(c.imag))) for c in (q_c, f1_c, f2_c, f3_c))
        self.coeff_q = q_c.real
        self.coeff_f1 = f1_c.real
        self.coeff_f2 = f2_c.real
        self.coeff_f3 = f3_c.real

    def nonlinear_term(self, vh: np.ndarray) -> np.ndarray:
        """Spectral tendency of -u u_x with a dealiased product."""
        if not self.nonlinear:
            return np.zeros_like(vh)
        n = self.grid.n
        u = np.fft.irfft(vh, n=n)
        ux = np.fft.irfft(self._deriv * vh, n=n)
        out = -np.fft.rfft(u * ux)
        out[~self._dealias] = 0.0
        return out

    def step(self, vh: np.ndarray) -> np.ndarray:
        n0 = self.nonlinear_term(vh)
        a = self.exp_half * vh + self.coeff_q * n0
        na = self.nonlinear_term(a)
        b = self.exp_half * vh + self.coeff_q * na
        nb = self.nonlinear_term(b)
        c = self.exp_half * a + self.coeff_q * (2.0 * nb - n0)
        nc = self.nonlinear_term(c)
        return (self.exp_full * vh + self.coeff_f1 * n0
                + 2.0 * self.coeff_f2 * (na + nb) + self.coeff_f3 * nc)


def simulate_ks_etdrk4(u0, grid: Grid1D, dt: float, steps: int,
                       uxx_coeff: float = KS_UXX_COEFFICIENT,
                       nonlinear: bool = True) -> np.ndarray:
    """Integrate the periodic flow, recording every dt; returns (steps+1, n)."""
    u0 = check_vector(u0, "u0", size=grid.n)
    stepper = KsEtdrk4(grid, dt, uxx_coeff=uxx_coeff, nonlinear=nonlinear)
    out = np.empty((steps + 1, grid.n))
    out[0] = u0
    vh = np.fft.rfft(u0)
    for k in range(1, steps + 1):
        vh = stepper.step(vh)
        u = np.fft.irfft(vh, n=grid.n)
        if not np.all(np.isfinite(u)):
            raise DivergenceError(f"spectral state blew up at step {k}")
        out[k] = u
    return out


# ---------------------------------------------------------------------------
# Initial condition families
# ---------------------------------------------------------------------------

def ks_fourier_profile(coeffs: np.ndarray, length: float, x) -> np.ndarray:
    """Evaluate sum_j a_j cos(2 pi j x / L) + b_j sin(2 pi j x / L).

    coeffs has shape (n_modes, 2) holding (a_j, b_j) for j = 1..n_modes; the
    construction is periodic with period L by design.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(x)
    for j, (a, b) in enumerate(coeffs, start=1):
        arg = 2.0 * np.pi * j * x / length
        out += a * np.cos(arg) + b * np.sin(arg)
    return out


def sample_initial_conditions(system: str, count: int, seed: int, grid: Grid1D,
                              ic_modes: int = 5, ic_amplitude: float = 0.5,
                              ic_bump_amplitude=(0.8, 1.2),
                              ic_bump_width=(0.08, 0.16),
                              ic_bump_center=(0.3, 0.7)) -> list[np.ndarray]:
    """Random initial states, one per trajectory, deterministic per seed.

    "ks": a sum of up to `ic_modes` random Fourier modes with amplitudes
    drawn from [-ic_amplitude, ic_amplitude]. "fhn": a smooth activator
    pulse with randomized amplitude, width, and position (fractions of the
    domain length) over a quiescent recovery field; returns stacked [u; v].
    """
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    states = []
    for i in range(count):
        rng = rng_for(seed, "ic", i)
        if system == "ks":
            coeffs = rng.uniform(-ic_amplitude, ic_amplitude, size=(int(ic_modes), 2))
            states.append(ks_fourier_profile(coeffs, grid.length, grid.points()))
        elif system == "fhn":
            x = grid.points()
            amp = rng.uniform(*ic_bump_amplitude)
            width = rng.uniform(*ic_bump_width) * grid.length
            center = grid.x0 + rng.uniform(*ic_bump_center) * grid.length
            u0 = amp * np.exp(-(((x - center) / width) ** 2))
            v0 = np.full(grid.n, 0.05)
            states.append(np.concatenate([u0, v0]))
        else:
            raise ConfigError(f"unknown system {system!r}")
    return states


def generate_dataset(system: str, grid: Grid1D, dt: float, n_trajectories: int,
                     n_steps: int, seed: int, *, substeps: int = 4,
                     eps: float = FHN_EPSILON, uxx_coeff: float = KS_UXX_COEFFICIENT,
                     **ic_params) -> TrajectorySet:
    """Simulate `n_trajectories` ground-truth trajectories of n_steps+1 states."""
    ics = sample_initial_conditions(system, n_trajectories, seed, grid, **ic_params)
    trajs = []
    for state0 in ics:
        if system == "fhn":
            u0, v0 = state0[:grid.n], state0[grid.n:]
            trajs.append(simulate_fhn(u0, v0, grid, dt, n_steps, substeps=substeps, eps=eps))
        else:
            trajs.append(simulate_ks_etdrk4(state0, grid, dt, n_steps, uxx_coeff=uxx_coeff))
    return TrajectorySet(np.stack(trajs), dt, system)
