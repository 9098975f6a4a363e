"""Two-ion pulsed-gate engine: crosstalk condition, heating rates, full simulation.

The simulation works in the rotating frame of the qubit and mode free
energies, with the spin-motion couplings oscillating at the mode frequencies
and the pi pulses applied either as instantaneous kicks or as top-hat drive
segments including the off-resonant crosstalk on the spectator ion.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.sparse as sp

from .. import constants as const
from .. import hilbert as hb
from ..dynamics import OUProcess, ou_trajectory
from .axy import SQRT3, AXYSequence


def crosstalk_rabi(delta: float, k: int) -> float:
    """Rabi frequency making an off-resonant pulse factor into pure dephasing.

    Omega = delta / sqrt(4 k^2 - 1): the spectator Bloch rotation then winds
    an integer number of times during the pi pulse and drops to a global
    sign, leaving only the dephasing factor exp(i delta/2 sigma_z t_pi).
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    return delta / math.sqrt(4.0 * k * k - 1.0)


@dataclasses.dataclass(frozen=True)
class HeatingReference:
    ndot: float  # quanta/s
    nu: float  # rad/s
    distance: float  # m, ion-electrode
    temperature: float  # K


# measured center-of-mass / breathing references for a room-temperature trap
COM_REFERENCE = HeatingReference(41.0, 2 * math.pi * 427e3, 310e-6, 300.0)
BREATHING_REFERENCE = HeatingReference(7.0, 2 * math.pi * 459e3, 310e-6, 300.0)


def heating_scaling(ref: HeatingReference, nu: float, distance: float,
                    temperature: float) -> float:
    """ndot = ndot_ref (nu_ref/nu)^2 (d_ref/d)^4 (T_ref/T)^(-2.13)."""
    if min(nu, distance, temperature) <= 0:
        raise ValueError("nu, distance and temperature must be positive")
    return (ref.ndot * (ref.nu / nu) ** 2 * (ref.distance / distance) ** 4
            * (ref.temperature / temperature) ** -2.13)


def thermal_occupation(nu: float, temperature: float) -> float:
    """Bose occupation 1/(exp(hbar nu / kB T) - 1)."""
    x = const.HBAR * nu / (const.KB * temperature)
    return 1.0 / math.expm1(x)


def electrode_distance_for_gradient(g_b: float, d0: float = 150e-6,
                                    g0: float = 150.0) -> float:
    """Ion-electrode distance scaling g_B ~ 1/d^2 off a 150 T/m @ 150 um anchor."""
    return d0 * math.sqrt(g0 / g_b)


@dataclasses.dataclass(frozen=True)
class IonPairConfig:
    """Two ions in a linear trap under a static magnetic-field gradient.

    nu1 is the center-of-mass frequency; the breathing mode sits at
    sqrt(3) nu1. The gradient sets both the qubit-mode coupling eta_m and
    the qubit splitting difference that enables individual addressing.
    """

    nu1: float  # rad/s
    g_b: float  # T/m
    mass: float = const.M_YB171
    temperature: float = 50.0  # K
    heating_com: float | None = None  # ndot (quanta/s); derived if None
    heating_breathing: float | None = None

    @property
    def nu2(self) -> float:
        return SQRT3 * self.nu1

    def nu(self, m: int) -> float:
        return self.nu1 if m == 1 else self.nu2

    def eta(self, m: int) -> float:
        """Effective Lamb-Dicke coupling of the qubits to mode m."""
        nu = self.nu(m)
        return (const.GAMMA_E_ION * self.g_b / (8 * nu)
                * math.sqrt(const.HBAR / (self.mass * nu)))

    @property
    def ion_distance(self) -> float:
        """Equilibrium separation (2 e^2 / 4 pi eps0 M nu^2)^(1/3)."""
        return (2 * const.E_CHARGE ** 2
                / (4 * math.pi * const.EPS0 * self.mass * self.nu1 ** 2)) ** (1.0 / 3.0)

    @property
    def qubit_gap(self) -> float:
        """delta_2 = -delta_1 = gamma_e g_B Delta z / 2 (rad/s)."""
        return const.GAMMA_E_ION * self.g_b * self.ion_distance / 2.0

    def ndot(self, m: int) -> float:
        stored = self.heating_com if m == 1 else self.heating_breathing
        if stored is not None:
            return stored
        ref = COM_REFERENCE if m == 1 else BREATHING_REFERENCE
        d = electrode_distance_for_gradient(self.g_b)
        return heating_scaling(ref, self.nu(m), d, self.temperature)

    def nbar(self, m: int) -> float:
        return thermal_occupation(self.nu(m), self.temperature)

    def gamma(self, m: int) -> float:
        """Lindblad rate Gamma_m = ndot / Nbar, quanta/s."""
        return self.ndot(m) / self.nbar(m)


@dataclasses.dataclass(frozen=True)
class PulsedGateNoise:
    """Error budget of the pulsed gate; defaults are the benchmark values."""

    rabi_fraction: float = 0.01  # relative Rabi mismatch
    trap_fraction: float = 0.001  # relative trap-frequency shift
    qubit_shift: float = 2 * math.pi * 20e3  # rad/s, both ions
    dephasing: OUProcess | None = None  # per-ion OU frequency noise
    heating: bool = True

    @classmethod
    def none(cls) -> "PulsedGateNoise":
        return cls(0.0, 0.0, 0.0, None, False)


@dataclasses.dataclass(frozen=True)
class PulsedGateResult:
    fidelity: float
    infidelity: float
    phase: float
    final_qubit_state: hb.DensityMatrix


def _qubit_kick(phase: float, angle: float) -> np.ndarray:
    sig = np.array([[0, np.exp(1j * phase)], [np.exp(-1j * phase), 0]])
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sig


def ideal_scaffold(seq: AXYSequence) -> np.ndarray:
    """Net 2x2 pulse product of one ion's sequence with perfect pi kicks."""
    p = np.eye(2, dtype=complex)
    for phase in seq.pulse_phases():
        p = _qubit_kick(phase, math.pi) @ p
    return p


class _PulsedHamiltonian:
    """Precomputed sparse pieces of the rotating-frame two-ion Hamiltonian."""

    def __init__(self, cfg: IonPairConfig, fock_dims: tuple[int, int],
                 noise: PulsedGateNoise):
        nb, nc = fock_dims
        self.dims = (2, 2, nb, nc)
        n = 4 * nb * nc
        self.size = n
        trap = 1.0 + noise.trap_fraction
        self.nu = np.array([cfg.nu1 * trap, cfg.nu2 * trap])
        # eta evaluated at the true (shifted) frequencies
        shifted = dataclasses.replace(cfg, nu1=cfg.nu1 * trap)
        self.eta = np.array([shifted.eta(1), shifted.eta(2)])

        def full(ops):
            return hb.tensor(ops).data

        eye2, eyeb, eyec = hb.qeye(2), hb.qeye(nb), hb.qeye(nc)
        self.sz = [np.real(np.diag(full([hb.sigmaz(), eye2, eyeb, eyec]))),
                   np.real(np.diag(full([eye2, hb.sigmaz(), eyeb, eyec])))]
        self.a_ops = [sp.csr_matrix(full([eye2, eye2, hb.destroy(nb), eyec])),
                      sp.csr_matrix(full([eye2, eye2, eyeb, hb.destroy(nc)]))]
        self.adag_ops = [op.conj().T.tocsr() for op in self.a_ops]
        self.sp_ops = [sp.csr_matrix(full([hb.sigmap(), eye2, eyeb, eyec])),
                       sp.csr_matrix(full([eye2, hb.sigmap(), eyeb, eyec]))]
        self.sm_ops = [op.conj().T.tocsr() for op in self.sp_ops]
        # mode-coupling sign of ion j to mode m: com +, breathing -/+
        self.sign = np.array([[1.0, -1.0], [1.0, 1.0]])

    def spin_motion_apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi)
        for m in range(2):
            c = self.eta[m] * self.nu[m] * np.exp(-1j * self.nu[m] * t)
            u = self.a_ops[m] @ psi
            v = self.adag_ops[m] @ psi
            zdiag = (self.sign[0, m] * self.sz[0] + self.sign[1, m] * self.sz[1])
            out += zdiag * (c * u + np.conj(c) * v)
        return out

    def spin_motion_matrix(self, t: float) -> sp.csr_matrix:
        h = sp.csr_matrix((self.size, self.size), dtype=complex)
        for m in range(2):
            c = self.eta[m] * self.nu[m] * np.exp(-1j * self.nu[m] * t)
            zdiag = sp.diags(self.sign[0, m] * self.sz[0] + self.sign[1, m] * self.sz[1])
            h = h + zdiag @ (c * self.a_ops[m] + np.conj(c) * self.adag_ops[m])
        return h


def _pulse_events(seq: AXYSequence):
    """Time-sorted pulse list [(t_center, ion, phase)] for both ions."""
    events = []
    phases = seq.pulse_phases()
    for t, ph in zip(seq.pulse_times(), phases):
        events.append((t, 0, ph))
    for t, ph in zip(seq.pulse_times(seq.stagger), phases):
        events.append((t, 1, ph))
    events.sort()
    return events


def simulate_pulsed_gate(cfg: IonPairConfig, seq: AXYSequence, *,
                         target_phase: float,
                         initial: hb.StateVector,
                         fock_dims: tuple[int, int] = (12, 8),
                         mode_nbar: tuple[float, float] = (0.0, 0.0),
                         noise: PulsedGateNoise | None = None,
                         rabi_k: int = 2,
                         max_step: float | None = None,
                         seed: int = 0) -> PulsedGateResult:
    """Run the two-qubit gate and report fidelity against the ideal phase gate.

    ``initial`` is the two-qubit state; the motional modes start thermal with
    the given occupations. The ideal target folds in the exact pulse-product
    scaffold (identity up to sign for 4-block sequences) times
    exp(i target_phase sigma_z sigma_z).
    """
    noise = noise or PulsedGateNoise.none()
    ham = _PulsedHamiltonian(cfg, fock_dims, noise)
    nb, nc = fock_dims
    events = _pulse_events(seq)
    t_total = seq.duration + seq.stagger + seq.t_pi

    # ideal target: scaffold x phase gate on the qubits
    scaffold = np.kron(ideal_scaffold(seq), ideal_scaffold(seq))
    zz_diag = np.array([1.0, -1.0, -1.0, 1.0])
    ideal = scaffold @ np.diag(np.exp(1j * target_phase * zz_diag))
    psi_ideal = ideal @ initial.data

    # static + stochastic qubit shifts
    shifts = [None, None]
    if noise.dephasing is not None:
        for j in range(2):
            p = dataclasses.replace(noise.dephasing, seed=seed * 2 + j)
            _, xs = ou_trajectory(p, t_total)
            shifts[j] = (p.dt, xs)

    def shift_value(j: int, t: float) -> float:
        val = noise.qubit_shift
        if shifts[j] is not None:
            dt, xs = shifts[j]
            val += xs[min(int(t / dt), len(xs) - 1)]
        return val

    lind = noise.heating
    if lind:
        rho_q = _run_density(cfg, seq, ham, events, t_total, initial, mode_nbar,
                             noise, shift_value, rabi_k, max_step)
    else:
        rho_q = _run_pure(cfg, seq, ham, events, t_total, initial, mode_nbar,
                          noise, shift_value, rabi_k, max_step)

    fid = float(np.real(np.vdot(psi_ideal, rho_q @ psi_ideal)))
    red = hb.DensityMatrix((2, 2), rho_q, check=False)
    measured_phase = _extract_zz_phase(rho_q, scaffold, initial.data)
    return PulsedGateResult(fid, 1.0 - fid, measured_phase, red)


def _extract_zz_phase(rho_q: np.ndarray, scaffold: np.ndarray,
                      psi0: np.ndarray) -> float:
    """Realized zz phase from the parity-changing coherence, scaffold removed.

    exp(i phi zz) advances the <ee|rho|eg> coherence by 2 phi relative to its
    initial value; returns nan when the initial state carries no such
    coherence to read out.
    """
    bare = scaffold.conj().T @ rho_q @ scaffold
    rho0 = np.outer(psi0, psi0.conj())
    ref = rho0[0, 1]
    if abs(ref) < 1e-12 or abs(bare[0, 1]) < 1e-12:
        return float("nan")
    return float(0.5 * np.angle(bare[0, 1] / ref))


def _thermal_components(nbar: float, dim: int, weight_cut: float = 1e-8):
    if nbar == 0:
        return [(0, 1.0)]
    ns = np.arange(dim)
    p = nbar ** ns / (nbar + 1.0) ** (ns + 1)
    p = p / p.sum()
    return [(int(n), float(w)) for n, w in zip(ns, p) if w > weight_cut]


def _run_pure(cfg, seq, ham, events, t_total, initial, mode_nbar, noise,
              shift_value, rabi_k, max_step):
    """Hamiltonian-only path: thermal modes as a weighted mixture of Fock runs."""
    nb, nc = ham.dims[2], ham.dims[3]
    omega = crosstalk_rabi(cfg.qubit_gap, rabi_k)
    if max_step is None:
        max_step = 0.05 / max(ham.nu[1], omega if seq.t_pi else ham.nu[1],
                              cfg.qubit_gap if seq.t_pi else ham.nu[1])
    rho_q = np.zeros((4, 4), dtype=complex)
    comps_b = _thermal_components(mode_nbar[0], nb)
    comps_c = _thermal_components(mode_nbar[1], nc)
    for n_b, w_b in comps_b:
        for n_c, w_c in comps_c:
            psi0 = np.kron(initial.data,
                           np.kron(hb.basis(nb, n_b).data, hb.basis(nc, n_c).data))
            psi = _propagate_pure(cfg, seq, ham, events, t_total, psi0, noise,
                                  shift_value, omega, max_step)
            state = hb.StateVector(ham.dims, psi, normalized=False)
            rho_q += (w_b * w_c) * hb.ptrace(state, [0, 1]).data
    return rho_q / (sum(w for _, w in comps_b) * sum(w for _, w in comps_c))


def _propagate_pure(cfg, seq, ham, events, t_total, psi0, noise, shift_value,
                    omega, max_step):
    psi = psi0.copy()
    gap = [-cfg.qubit_gap, cfg.qubit_gap]  # delta_1, delta_2

    def rhs_factory(active):
        # active: list of (ion, phase) pulses on during this segment
        def rhs(t, p):
            h = ham.spin_motion_apply(t, p)
            for j in range(2):
                sv = shift_value(j, t)
                if sv:
                    h += (0.5 * sv) * (ham.sz[j] * p)
            for ion, phase in active:
                amp = 0.5 * omega * (1.0 + noise.rabi_fraction)
                h += amp * (np.exp(1j * phase) * (ham.sp_ops[ion] @ p)
                            + np.exp(-1j * phase) * (ham.sm_ops[ion] @ p))
                other = 1 - ion
                ph = gap[other] * t + phase
                h += amp * (np.exp(1j * ph) * (ham.sp_ops[other] @ p)
                            + np.exp(-1j * ph) * (ham.sm_ops[other] @ p))
            return -1j * h
        return rhs

    if seq.t_pi == 0:
        # instantaneous pulses: free segments + kicks
        boundaries = [0.0] + [e[0] for e in events] + [t_total]
        rhs = rhs_factory([])
        for (t0, t1), event in zip(zip(boundaries[:-1], boundaries[1:]),
                                   events + [None]):
            psi = _rk4_span(rhs, psi, t0, t1, max_step)
            if event is not None:
                _, ion, phase = event
                angle = math.pi * (1.0 + noise.rabi_fraction)
                psi = _apply_kick(psi, ham.dims, ion, phase, angle)
        return psi

    # finite top-hat pulses
    marks = sorted({0.0, t_total}
                   | {e[0] - seq.t_pi / 2 for e in events}
                   | {e[0] + seq.t_pi / 2 for e in events})
    for t0, t1 in zip(marks[:-1], marks[1:]):
        mid = 0.5 * (t0 + t1)
        active = [(ion, phase) for (tc, ion, phase) in events
                  if abs(mid - tc) < seq.t_pi / 2]
        psi = _rk4_span(rhs_factory(active), psi, t0, t1, max_step)
    return psi


def _rk4_span(rhs, psi, t0, t1, max_step):
    span = t1 - t0
    if span <= 0:
        return psi
    nsub = max(1, int(math.ceil(span / max_step)))
    dt = span / nsub
    t = t0
    for _ in range(nsub):
        k1 = rhs(t, psi)
        k2 = rhs(t + dt / 2, psi + dt / 2 * k1)
        k3 = rhs(t + dt / 2, psi + dt / 2 * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return psi


def _apply_kick(psi, dims, ion, phase, angle):
    u = _qubit_kick(phase, angle)
    mat = psi.reshape(2, 2, -1)
    if ion == 0:
        mat = np.einsum("ab,bcd->acd", u, mat)
    else:
        mat = np.einsum("ab,cbd->cad", u, mat)
    return mat.reshape(-1)


def _run_density(cfg, seq, ham, events, t_total, initial, mode_nbar, noise,
                 shift_value, rabi_k, max_step):
    """Lindblad path with motional heating on both modes."""
    nb, nc = ham.dims[2], ham.dims[3]
    omega = crosstalk_rabi(cfg.qubit_gap, rabi_k)
    if max_step is None:
        fastest = max(ham.nu[1], (omega + cfg.qubit_gap) if seq.t_pi else ham.nu[1])
        max_step = 0.05 / fastest
    rho_modes = np.kron(hb.thermal_state(mode_nbar[0], nb).data,
                        hb.thermal_state(mode_nbar[1], nc).data)
    rho = np.kron(np.outer(initial.data, initial.data.conj()), rho_modes)

    jumps = []
    for m in range(2):
        gamma, nbar_m = cfg.gamma(m + 1), cfg.nbar(m + 1)
        jumps.append((gamma * (nbar_m + 1), ham.a_ops[m]))
        jumps.append((gamma * nbar_m, ham.adag_ops[m]))
    jump_terms = [(rate, op, op.conj().T.tocsr(), (op.conj().T @ op).tocsr())
                  for rate, op in jumps if rate > 0]
    gap = [-cfg.qubit_gap, cfg.qubit_gap]

    def h_matrix(t, active):
        h = ham.spin_motion_matrix(t)
        diag = np.zeros(ham.size)
        for j in range(2):
            sv = shift_value(j, t)
            if sv:
                diag = diag + 0.5 * sv * ham.sz[j]
        h = h + sp.diags(diag)
        for ion, phase in active:
            amp = 0.5 * omega * (1.0 + noise.rabi_fraction)
            h = h + amp * (np.exp(1j * phase) * ham.sp_ops[ion]
                           + np.exp(-1j * phase) * ham.sm_ops[ion])
            other = 1 - ion
            ph = gap[other] * t + phase
            h = h + amp * (np.exp(1j * ph) * ham.sp_ops[other]
                           + np.exp(-1j * ph) * ham.sm_ops[other])
        return h

    dense_terms = [(rate, c, cdag.toarray(), cdc, cdc.toarray())
                   for rate, c, cdag, cdc in jump_terms]

    def dissipator(r):
        d = np.zeros_like(r)
        for rate, c, cdag_d, cdc, cdc_d in dense_terms:
            cr = c @ r
            d += rate * (cr @ cdag_d - 0.5 * (cdc @ r + r @ cdc_d))
        return d

    def rhs_for(active):
        def rhs(t, r):
            h = h_matrix(t, active)
            return -1j * (h @ r - (h @ r.conj().T).conj().T) + dissipator(r)
        return rhs

    if seq.t_pi == 0:
        boundaries = [0.0] + [e[0] for e in events] + [t_total]
        for (t0, t1), event in zip(zip(boundaries[:-1], boundaries[1:]),
                                   events + [None]):
            rho = _rk4_span(rhs_for([]), rho, t0, t1, max_step)
            if event is not None:
                _, ion, phase = event
                angle = math.pi * (1.0 + noise.rabi_fraction)
                u2 = _qubit_kick(phase, angle)
                ufull = _kick_matrix(u2, ham.dims, ion)
                rho = ufull @ rho @ ufull.conj().T
    else:
        marks = sorted({0.0, t_total}
                       | {e[0] - seq.t_pi / 2 for e in events}
                       | {e[0] + seq.t_pi / 2 for e in events})
        for t0, t1 in zip(marks[:-1], marks[1:]):
            mid = 0.5 * (t0 + t1)
            active = [(ion, phase) for (tc, ion, phase) in events
                      if abs(mid - tc) < seq.t_pi / 2]
            rho = _rk4_span(rhs_for(active), rho, t0, t1, max_step)

    state = hb.DensityMatrix(ham.dims, 0.5 * (rho + rho.conj().T), check=False)
    return hb.ptrace(state, [0, 1]).data


def _kick_matrix(u2, dims, ion):
    eye_modes = np.eye(dims[2] * dims[3])
    if ion == 0:
        q = np.kron(u2, np.eye(2))
    else:
        q = np.kron(np.eye(2), u2)
    return np.kron(q, eye_modes)
