"""Bichromatic continuous-DD entangling gate with phase modulation and flips.

The gate Hamiltonian, in the bichromatic interaction picture and after the
rotating-wave step, displaces the center-of-mass mode conditioned on S_y and
closes the loop every 2 pi / xi, leaving exp(i theta_n S_y^2) with
theta_n = 2 pi n_RT eta^2 nu^2 J1^2(2 Omega/delta) / xi^2. The carrier
drive at Omega_DD protects against dephasing; its interfering sideband is
removed by the sin^2 phase modulation, and slow shift terms are refocused by
carrier phase flips plus two pi pulses on one qubit.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.special import j0, j1

from .. import hilbert as hb
from ..dynamics import OUProcess, ou_trajectory
from .axy import SQRT3
from .pulsed import thermal_occupation


@dataclasses.dataclass(frozen=True)
class ContinuousGateNoise:
    """OU noise processes for magnetic field (per ion) and drive amplitude."""

    dephasing: OUProcess | None = None  # frequency noise, rad/s
    amplitude: OUProcess | None = None  # relative drive error (dimensionless)

    @classmethod
    def from_times(cls, tau_b: float, t2: float, tau_omega: float,
                   delta_omega: float, dt: float) -> "ContinuousGateNoise":
        """Build from (tau_B, T2) magnetic and (tau_Omega, relative error) specs."""
        from ..dynamics import ou_diffusion_for_t2

        deph = OUProcess(tau=tau_b, c_d=ou_diffusion_for_t2(tau_b, t2), dt=dt)
        amp = OUProcess(tau=tau_omega, c_d=2 * delta_omega ** 2 / tau_omega, dt=dt)
        return cls(deph, amp)


@dataclasses.dataclass(frozen=True)
class ContinuousGateConfig:
    eta: float
    nu: float  # center-of-mass frequency, rad/s
    omega: float  # bichromatic Rabi, rad/s
    xi: float  # gate detuning; delta = nu + xi
    omega_dd: float = 0.0  # carrier Rabi, rad/s
    n_round_trips: int = 1
    n_phase_flips: int = 0
    phase_modulated: bool = True
    include_breathing: bool = False
    crosstalk_gap: float | None = None  # omega_2 - omega_1 (rad/s)
    refocusing_pulses: bool = True

    def __post_init__(self):
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.omega / self.delta > 0.3:
            warnings.warn("Omega/delta above 0.3: first-order Jacobi-Anger "
                          "truncation becomes questionable", stacklevel=2)

    @property
    def delta(self) -> float:
        return self.nu + self.xi

    @property
    def gate_time(self) -> float:
        return 2 * math.pi * self.n_round_trips / self.xi

    @property
    def bessel_j0(self) -> float:
        return float(j0(2 * self.omega / self.delta))

    @property
    def bessel_j1(self) -> float:
        return float(j1(2 * self.omega / self.delta))


def continuous_gate_phase(cfg: ContinuousGateConfig) -> tuple[float, float]:
    """(exact Bessel form, small-argument approximation) of theta_n."""
    exact = (2 * math.pi * cfg.n_round_trips * cfg.eta ** 2 * cfg.nu ** 2
             * cfg.bessel_j1 ** 2 / cfg.xi ** 2)
    approx = (2 * math.pi * cfg.n_round_trips * cfg.eta ** 2 * cfg.omega ** 2
              / cfg.xi ** 2)
    return exact, approx


def phase_modulation(t: float, cfg: ContinuousGateConfig, sign: float = 1.0) -> float:
    """Drive phase phi(t) = 4 (Omega_DD J1 / delta J0) sin^2(delta t / 2)."""
    amp = 4.0 * cfg.omega_dd * cfg.bessel_j1 / (cfg.delta * cfg.bessel_j0)
    return sign * amp * math.sin(cfg.delta * t / 2.0) ** 2


def second_order_couplings(cfg: ContinuousGateConfig) -> tuple[float, float, float]:
    """(g_Omega, g_nu, effective carrier Rabi) of the second-order Hamiltonian."""
    j0v, j1v = cfg.bessel_j0, cfg.bessel_j1
    omega_eff = j0v * cfg.omega_dd * (1.0 + 2.0 * j1v ** 2 / j0v ** 2)
    denom = 1.0 - omega_eff ** 2 / cfg.nu ** 2
    if abs(denom) < 1e-9:
        raise ValueError("effective carrier resonant with the trap frequency")
    g_omega = omega_eff * cfg.eta ** 2 * j0v ** 2 / denom
    g_nu = cfg.nu * cfg.eta ** 2 * j0v ** 2 / denom
    return g_omega, g_nu, omega_eff


def solve_drive_for_phase(eta: float, nu: float, cycles: int, n_round_trips: int,
                          target: float = math.pi / 8) -> ContinuousGateConfig:
    """Pick Omega so theta_n hits the target with xi = nu / cycles.

    Locking xi to an integer fraction of nu closes both the gate loop and the
    off-resonant J0 S_z loop at the gate time.
    """
    xi = nu / cycles
    delta = nu + xi
    j1_target = xi * math.sqrt(target / (2 * math.pi * n_round_trips)) / (eta * nu)
    if j1_target > 0.5819:  # max of J1
        raise ValueError("target phase unreachable: required J1 exceeds its maximum")
    x = brentq(lambda y: j1(y) - j1_target, 0.0, 1.8412)
    return ContinuousGateConfig(eta=eta, nu=nu, omega=x * delta / 2.0, xi=xi,
                                n_round_trips=n_round_trips)


# ---------------------------------------------------------------------------
# simulation


def gate_picture_hamiltonian(cfg: ContinuousGateConfig, fock_dim: int):
    """Time-dependent matrix of the post-RWA gate Hamiltonian (two qubits x mode)."""
    sy = hb.tensor([hb.sigmay(), hb.qeye(2), hb.qeye(fock_dim)]).data + \
        hb.tensor([hb.qeye(2), hb.sigmay(), hb.qeye(fock_dim)]).data
    bdag = hb.tensor([hb.qeye(2), hb.qeye(2), hb.create(fock_dim)]).data
    b = bdag.conj().T
    coup = cfg.eta * cfg.nu * cfg.bessel_j1

    def func(t: float) -> np.ndarray:
        osc = bdag * np.exp(-1j * cfg.xi * t) - b * np.exp(1j * cfg.xi * t)
        return 1j * coup * (osc @ sy)

    return func


def ideal_gate_unitary(theta: float) -> np.ndarray:
    """Closed-loop gate propagator exp(-i theta S_y^2) on the two qubits.

    The rotation sense of the gate Hamiltonian (b† going with exp(-i xi t))
    accumulates the S_y^2 phase with this sign; at theta = pi/8 it maps
    |gg> to (|gg> + i|ee>)/sqrt(2).
    """
    sy = np.kron(hb.sigmay().data, np.eye(2)) + np.kron(np.eye(2), hb.sigmay().data)
    return sla.expm(-1j * theta * (sy @ sy))


def bell_target(theta: float = math.pi / 8) -> np.ndarray:
    """State exp(-i theta S_y^2)|gg>; maximally entangled at theta = pi/8."""
    gg = np.zeros(4, dtype=complex)
    gg[3] = 1.0
    return ideal_gate_unitary(theta) @ gg


@dataclasses.dataclass(frozen=True)
class ContinuousGateResult:
    fidelity: float
    infidelity: float
    theta: float


class _ContinuousHamiltonian:
    """Sparse components of the full rotating-frame Hamiltonian."""

    def __init__(self, cfg: ContinuousGateConfig, fock_dims):
        self.cfg = cfg
        dims = [2, 2] + list(fock_dims)
        self.dims = tuple(dims)
        self.size = int(np.prod(dims))
        eye = [hb.qeye(d) for d in dims]

        def full(idx, op):
            ops = list(eye)
            ops[idx] = op
            return sp.csr_matrix(hb.tensor(ops).data)

        self.sz = [np.real(full(j, hb.sigmaz()).diagonal()) for j in range(2)]
        self.sp_ops = [full(j, hb.sigmap()) for j in range(2)]
        self.sm_ops = [op.conj().T.tocsr() for op in self.sp_ops]
        self.b = full(2, hb.destroy(fock_dims[0]))
        self.bdag = self.b.conj().T.tocsr()
        if len(fock_dims) > 1:
            self.c = full(3, hb.destroy(fock_dims[1]))
            self.cdag = self.c.conj().T.tocsr()
        else:
            self.c = None

    def coefficients(self, t, drive):
        """(raising coefficients per qubit, diagonal shift vector) at time t."""
        cfg = self.cfg
        raising = drive(t)
        diag = np.zeros(self.size)
        for j in range(2):
            sv = drive.shift(j, t)
            if sv:
                diag = diag + (0.5 * sv) * self.sz[j]
        cb = cfg.eta * cfg.nu * np.exp(-1j * cfg.nu * t)
        return raising, diag, cb

    def apply(self, t, psi, drive):
        cfg = self.cfg
        raising, diag, cb = self.coefficients(t, drive)
        zsum = self.sz[0] + self.sz[1]
        out = zsum * (cb * (self.b @ psi) + np.conj(cb) * (self.bdag @ psi))
        if self.c is not None:
            nu2 = SQRT3 * cfg.nu
            eta2 = cfg.eta * 3.0 ** -0.75
            cc = eta2 * nu2 * np.exp(-1j * nu2 * t)
            zdiff = self.sz[1] - self.sz[0]
            out += zdiff * (cc * (self.c @ psi) + np.conj(cc) * (self.cdag @ psi))
        for j in range(2):
            if raising[j]:
                out += raising[j] * (self.sp_ops[j] @ psi) \
                    + np.conj(raising[j]) * (self.sm_ops[j] @ psi)
        if diag.any():
            out += diag * psi
        return out

    def matrix(self, t, drive) -> sp.csr_matrix:
        cfg = self.cfg
        raising, diag, cb = self.coefficients(t, drive)
        zsum = sp.diags(self.sz[0] + self.sz[1])
        h = zsum @ (cb * self.b + np.conj(cb) * self.bdag)
        if self.c is not None:
            nu2 = SQRT3 * cfg.nu
            eta2 = cfg.eta * 3.0 ** -0.75
            cc = eta2 * nu2 * np.exp(-1j * nu2 * t)
            zdiff = sp.diags(self.sz[1] - self.sz[0])
            h = h + zdiff @ (cc * self.c + np.conj(cc) * self.cdag)
        for j in range(2):
            if raising[j]:
                h = h + raising[j] * self.sp_ops[j] \
                    + np.conj(raising[j]) * self.sm_ops[j]
        if diag.any():
            h = h + sp.diags(diag)
        return h


class _Drive:
    """Per-qubit raising-operator coefficients of all microwave tones.

    In each qubit's rotating frame, its own bichromatic + carrier tones are
    resonant while the other qubit's tones oscillate at the splitting gap
    (delta_1 = -(omega_2 - omega_1) on ion 1 and +gap on ion 2).
    """

    def __init__(self, cfg: ContinuousGateConfig, shift_value, amp_value,
                 carrier_sign):
        self.cfg = cfg
        self.shift = shift_value
        self.amp = amp_value
        self.sign = carrier_sign

    def __call__(self, t):
        cfg = self.cfg
        s_c = self.sign(t)
        rel = 1.0 + self.amp(t)
        phi = phase_modulation(t, cfg, s_c) if cfg.phase_modulated else 0.0
        # sigma_+ coefficient of [Omega cos(dt) sigma_par + (Odd/2) sigma_perp]
        bracket = (cfg.omega * rel * math.cos(cfg.delta * t)
                   - 0.5j * cfg.omega_dd * rel * s_c)
        coeffs = []
        for j in range(2):
            c = bracket * np.exp(1j * phi)
            if cfg.crosstalk_gap:
                det = -cfg.crosstalk_gap if j == 0 else cfg.crosstalk_gap
                c = c + bracket * np.exp(1j * (phi + det * t))
            coeffs.append(c)
        return coeffs


def simulate_continuous_gate(cfg: ContinuousGateConfig, *,
                             noise: ContinuousGateNoise | None = None,
                             heating_ndot: float = 0.0,
                             temperature: float = 300.0,
                             fock_dims=(10,),
                             mode_nbar=(0.0, 0.0),
                             realizations: int = 1,
                             seed: int = 0,
                             max_step: float | None = None) -> ContinuousGateResult:
    """Bell-state preparation fidelity under the full drive pattern.

    Without heating the thermal modes are expanded as a Fock mixture and each
    component propagated as a pure state; with heating the run switches to a
    density matrix with the thermal occupancy jumps on the center-of-mass
    mode. Noise realizations are averaged with per-realization OU seeds.
    """
    noise = noise or ContinuousGateNoise()
    ham = _ContinuousHamiltonian(cfg, fock_dims)
    t_gate = cfg.gate_time
    if max_step is None:
        max_step = 0.05 / cfg.delta
    theta, _ = continuous_gate_phase(cfg)
    target = bell_target(theta)
    cycle = 2 * math.pi / cfg.delta

    # carrier flip times snapped to whole delta cycles so phi(t) stays continuous
    if cfg.n_phase_flips:
        raw = [(k + 1) * t_gate / (cfg.n_phase_flips + 1)
               for k in range(cfg.n_phase_flips)]
        flips = [round(x / cycle) * cycle for x in raw]
    else:
        flips = []

    def carrier_sign(t):
        return (-1.0) ** sum(1 for f in flips if f <= t)

    pulse_times = [round((t_gate / 2) / cycle) * cycle] if cfg.refocusing_pulses else []

    fids = []
    rng = np.random.default_rng(seed)
    for real in range(realizations):
        shifts, amps = [None, None], None
        if noise.dephasing is not None:
            for j in range(2):
                p = dataclasses.replace(noise.dephasing, seed=int(rng.integers(2 ** 31)))
                shifts[j] = (p.dt, ou_trajectory(p, t_gate)[1])
        if noise.amplitude is not None:
            p = dataclasses.replace(noise.amplitude, seed=int(rng.integers(2 ** 31)))
            amps = (p.dt, ou_trajectory(p, t_gate)[1])

        def shift_value(j, t):
            if shifts[j] is None:
                return 0.0
            dt, xs = shifts[j]
            return xs[min(int(t / dt), len(xs) - 1)]

        def amp_value(t):
            if amps is None:
                return 0.0
            dt, xs = amps
            return xs[min(int(t / dt), len(xs) - 1)]

        drive = _Drive(cfg, shift_value, amp_value, carrier_sign)
        marks = sorted({0.0, t_gate} | set(flips) | set(pulse_times))
        if heating_ndot > 0:
            fid = _run_density_continuous(cfg, ham, drive, marks, pulse_times,
                                          heating_ndot, temperature, fock_dims,
                                          mode_nbar, target, max_step)
        else:
            fid = _run_pure_continuous(cfg, ham, drive, marks, pulse_times,
                                       fock_dims, mode_nbar, target, max_step)
        fids.append(fid)
    fid = float(np.mean(fids))
    return ContinuousGateResult(fid, 1.0 - fid, theta)


def _gg_state() -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[3] = 1.0  # |g,g> in the (e, g) ordering
    return v


def _pi_y_kick(psi, dims):
    u = sla.expm(1j * (math.pi / 2) * hb.sigmay().data)
    mat = psi.reshape(2, -1)
    return (u @ mat).reshape(-1)


def _pi_y_matrix(size):
    u = sla.expm(1j * (math.pi / 2) * hb.sigmay().data)
    return np.kron(u, np.eye(size // 2))


def _run_pure_continuous(cfg, ham, drive, marks, pulse_times, fock_dims,
                         mode_nbar, target, max_step):
    from .pulsed import _rk4_span, _thermal_components

    comps = [_thermal_components(nb, d) for nb, d in zip(mode_nbar, fock_dims)]
    while len(comps) < len(fock_dims):
        comps.append([(0, 1.0)])
    rho_q = np.zeros((4, 4), dtype=complex)
    total_w = 0.0
    from itertools import product as iproduct

    for combo in iproduct(*comps):
        w = float(np.prod([c[1] for c in combo]))
        total_w += w
        mode_vec = hb.basis(fock_dims[0], combo[0][0]).data
        for d, c in zip(fock_dims[1:], combo[1:]):
            mode_vec = np.kron(mode_vec, hb.basis(d, c[0]).data)
        psi = np.kron(_gg_state(), mode_vec)

        def rhs(t, p):
            return -1j * ham.apply(t, p, drive)

        for t0, t1 in zip(marks[:-1], marks[1:]):
            psi = _rk4_span(rhs, psi, t0, t1, max_step)
            if any(abs(t1 - pt) < 1e-15 for pt in pulse_times):
                psi = _pi_y_kick(psi, ham.dims)
        if pulse_times and cfg.refocusing_pulses:
            psi = _pi_y_kick(psi, ham.dims)  # final pi pulse at the gate end
        state = hb.StateVector(ham.dims, psi, normalized=False)
        rho_q += w * hb.ptrace(state, [0, 1]).data
    rho_q /= total_w
    return float(np.real(np.vdot(target, rho_q @ target)))


def _run_density_continuous(cfg, ham, drive, marks, pulse_times, heating_ndot,
                            temperature, fock_dims, mode_nbar, target, max_step):
    from .pulsed import _rk4_span

    nbar_bath = thermal_occupation(cfg.nu, temperature)
    gamma = heating_ndot / nbar_bath
    jump_list = [(gamma * (nbar_bath + 1), ham.b), (gamma * nbar_bath, ham.bdag)]
    dense_terms = [(rate, c, c.conj().T.toarray(), (c.conj().T @ c).tocsr(),
                    (c.conj().T @ c).toarray())
                   for rate, c in jump_list if rate > 0]

    rho_modes = hb.thermal_state(mode_nbar[0], fock_dims[0]).data
    for d, nb in zip(fock_dims[1:], mode_nbar[1:]):
        rho_modes = np.kron(rho_modes, hb.thermal_state(nb, d).data)
    gg = _gg_state()
    rho = np.kron(np.outer(gg, gg.conj()), rho_modes)

    def rhs(t, r):
        hr = ham.matrix(t, drive) @ r
        d = -1j * (hr - hr.conj().T)  # rho and H Hermitian: (H rho)^dag = rho H
        for rate, c, cdag_d, cdc, cdc_d in dense_terms:
            cr = c @ r
            d = d + rate * (cr @ cdag_d - 0.5 * (cdc @ r + r @ cdc_d))
        return d

    for t0, t1 in zip(marks[:-1], marks[1:]):
        rho = _rk4_span(rhs, rho, t0, t1, max_step)
        if any(abs(t1 - pt) < 1e-15 for pt in pulse_times):
            u = _pi_y_matrix(ham.size)
            rho = u @ rho @ u.conj().T
    if pulse_times and cfg.refocusing_pulses:
        u = _pi_y_matrix(ham.size)
        rho = u @ rho @ u.conj().T
    state = hb.DensityMatrix(ham.dims, 0.5 * (rho + rho.conj().T), check=False)
    rho_q = hb.ptrace(state, [0, 1]).data
    return float(np.real(np.vdot(target, rho_q @ target)))
