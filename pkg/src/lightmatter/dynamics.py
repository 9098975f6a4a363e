"""Time-evolution engines.

Four tools shared by every chapter-level module: a Schrödinger integrator
(exact eigenbasis propagation for constant H, fixed-step RK4 or per-segment
matrix exponentials otherwise), a Lindblad solver (Krylov ``expm_multiply``
on the sparse Liouvillian when H is constant, RK4 otherwise), the analytic
propagator for sigma_z-coupled spin-boson Hamiltonians under pulsed
modulation, and exactly-discretized Ornstein-Uhlenbeck noise.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .hilbert import DensityMatrix, Operator, StateVector

HERMITICITY_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class TimeDependentHamiltonian:
    """Callback t -> matrix (complex ndarray), plus integrator hints.

    smoothness: 'constant' | 'smooth' | 'piecewise'. Piecewise-constant
    Hamiltonians are stepped with exact per-step matrix exponentials; smooth
    ones with RK4 sampling the midpoint.
    """

    dims: tuple[int, ...]
    func: Callable[[float], np.ndarray]
    smoothness: str = "smooth"

    def __post_init__(self):
        if self.smoothness not in ("constant", "smooth", "piecewise"):
            raise ValueError(f"unknown smoothness hint {self.smoothness!r}")

    @classmethod
    def constant(cls, op: Operator) -> "TimeDependentHamiltonian":
        mat = op.data
        return cls(op.dims, lambda t: mat, "constant")

    @classmethod
    def from_terms(cls, static: Operator, terms: Sequence[tuple[Operator, Callable[[float], complex]]],
                   smoothness: str = "smooth") -> "TimeDependentHamiltonian":
        """H(t) = static + sum_k f_k(t) * H_k, with H_k + H_k† assumed assembled by caller."""
        h0 = static.data
        mats = [op.data for op, _ in terms]
        funcs = [f for _, f in terms]

        def func(t: float) -> np.ndarray:
            h = h0.copy()
            for m, f in zip(mats, funcs):
                h += f(t) * m
            return h

        return cls(static.dims, func, smoothness)

    def __call__(self, t: float) -> np.ndarray:
        return self.func(t)


@dataclasses.dataclass(frozen=True)
class LindbladModel:
    hamiltonian: TimeDependentHamiltonian
    jumps: tuple[tuple[float, Operator], ...] = ()

    def __init__(self, hamiltonian, jumps=()):
        jumps = tuple((float(rate), op) for rate, op in jumps)
        if any(rate < 0 for rate, _ in jumps):
            raise ValueError("jump rates must be nonnegative")
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "jumps", jumps)


def _check_hermitian(h: np.ndarray, t: float):
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL * max(1.0, np.max(np.abs(h))):
        raise ValueError(f"Hamiltonian is not Hermitian at t={t}")


def evolve_schrodinger(H: TimeDependentHamiltonian, psi0: StateVector, times,
                       max_step: float | None = None) -> list[StateVector]:
    """Integrate i dpsi/dt = H(t) psi on the given monotone grid.

    Constant H propagates exactly through its eigenbasis. Otherwise the grid
    is refined to ``max_step`` and stepped with RK4 (smooth) or midpoint
    matrix exponentials (piecewise-constant).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a monotone nondecreasing 1-d grid")
    psi = psi0.data.copy()

    if H.smoothness == "constant":
        h = H.func(times[0])
        _check_hermitian(h, times[0])
        evals, vecs = np.linalg.eigh(h)
        coeff = vecs.conj().T @ psi
        out = []
        for t in times:
            ph = np.exp(-1j * evals * (t - times[0]))
            out.append(StateVector(psi0.dims, vecs @ (ph * coeff), normalized=False))
        return out

    _check_hermitian(H.func(times[0]), times[0])
    out = [StateVector(psi0.dims, psi, normalized=False)]
    for t0, t1 in zip(times[:-1], times[1:]):
        span = t1 - t0
        if span == 0:
            out.append(StateVector(psi0.dims, psi.copy(), normalized=False))
            continue
        nsub = 1 if max_step is None else max(1, int(math.ceil(span / max_step)))
        dt = span / nsub
        t = t0
        if H.smoothness == "piecewise":
            for _ in range(nsub):
                u = sla.expm(-1j * dt * H.func(t + dt / 2))
                psi = u @ psi
                t += dt
        else:
            for _ in range(nsub):
                psi = _rk4_step(H.func, psi, t, dt)
                t += dt
        out.append(StateVector(psi0.dims, psi.copy(), normalized=False))
    return out


def _rk4_step(hfunc, psi, t, dt):
    k1 = -1j * (hfunc(t) @ psi)
    hm = hfunc(t + dt / 2)
    k2 = -1j * (hm @ (psi + dt / 2 * k1))
    k3 = -1j * (hm @ (psi + dt / 2 * k2))
    k4 = -1j * (hfunc(t + dt) @ (psi + dt * k3))
    return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate_segmented(segments, psi: np.ndarray, max_step: float) -> np.ndarray:
    """RK4 through a list of (t0, t1, hfunc) with hfunc smooth on its own segment.

    Pulse trains make H(t) discontinuous at switch times; evaluating one
    global callback at segment boundaries feeds RK4 the wrong side of the
    jump. Here each segment owns a callback valid on its closed interval.
    """
    psi = np.array(psi, dtype=complex)
    for t0, t1, hfunc in segments:
        span = t1 - t0
        if span <= 0:
            continue
        nsub = max(1, int(math.ceil(span / max_step)))
        dt = span / nsub
        t = t0
        for _ in range(nsub):
            psi = _rk4_step(hfunc, psi, t, dt)
            t += dt
    return psi


def convergence_probe(H: TimeDependentHamiltonian, psi0: StateVector, t_final: float,
                      steps: int) -> float:
    """Fidelity change between a run with ``steps`` and one with 2x steps."""
    grid = np.linspace(0.0, t_final, 2)
    a = evolve_schrodinger(H, psi0, grid, max_step=t_final / steps)[-1]
    b = evolve_schrodinger(H, psi0, grid, max_step=t_final / (2 * steps))[-1]
    ova = np.vdot(a.data, b.data)
    na = np.linalg.norm(a.data) * np.linalg.norm(b.data)
    return float(1.0 - abs(ova) / na)


def liouvillian(h: np.ndarray, jumps) -> sp.csr_matrix:
    """Sparse Liouvillian for row-major vec(rho)."""
    n = h.shape[0]
    eye = sp.identity(n, dtype=complex, format="csr")
    hs = sp.csr_matrix(h)
    L = -1j * (sp.kron(hs, eye, format="csr") - sp.kron(eye, hs.T, format="csr"))
    for rate, op in jumps:
        if rate == 0:
            continue
        c = sp.csr_matrix(op.data)
        cdc = (c.getH() @ c).tocsr()
        L = L + rate * (
            sp.kron(c, c.conj(), format="csr")
            - 0.5 * sp.kron(cdc, eye, format="csr")
            - 0.5 * sp.kron(eye, cdc.T, format="csr")
        )
    return L.tocsr()


def evolve_lindblad(model: LindbladModel, rho0: DensityMatrix, times,
                    max_step: float | None = None,
                    trace_tol: float = 1e-7) -> list[DensityMatrix]:
    """Master-equation evolution on the grid; raises if the trace drifts."""
    times = np.asarray(times, dtype=float)
    H = model.hamiltonian
    dims = rho0.dims
    tr0 = rho0.trace()

    if H.smoothness == "constant":
        L = liouvillian(H.func(times[0]), model.jumps)
        out = []
        vec = rho0.data.ravel().copy()
        tprev = times[0]
        for t in times:
            if t > tprev:
                vec = expm_multiply(L * (t - tprev), vec)
                tprev = t
            n = rho0.dim
            out.append(DensityMatrix(dims, _hermitize(vec.reshape(n, n)), check=False))
        _assert_trace(out[-1], tr0, trace_tol)
        return out

    rho = rho0.data.copy()
    rates = [
        (rate, op.data, op.data.conj().T, op.data.conj().T @ op.data)
        for rate, op in model.jumps
    ]

    def rhs(t, r):
        h = H.func(t)
        d = -1j * (h @ r - r @ h)
        for rate, c, cdag, cdc in rates:
            d += rate * (c @ r @ cdag - 0.5 * (cdc @ r + r @ cdc))
        return d

    out = [DensityMatrix(dims, rho, check=False)]
    for t0, t1 in zip(times[:-1], times[1:]):
        span = t1 - t0
        nsub = 1 if max_step is None else max(1, int(math.ceil(span / max_step)))
        dt = span / nsub
        t = t0
        for _ in range(nsub):
            k1 = rhs(t, rho)
            k2 = rhs(t + dt / 2, rho + dt / 2 * k1)
            k3 = rhs(t + dt / 2, rho + dt / 2 * k2)
            k4 = rhs(t + dt, rho + dt * k3)
            rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
        out.append(DensityMatrix(dims, _hermitize(rho), check=False))
    _assert_trace(out[-1], tr0, trace_tol)
    return out


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _assert_trace(rho: DensityMatrix, tr0: float, tol: float):
    drift = abs(rho.trace() - tr0)
    if drift > tol:
        raise RuntimeError(
            f"Lindblad trace drifted by {drift:.2e} (> {tol:.0e}); step did not converge"
        )


# ---------------------------------------------------------------------------
# analytic propagator for pulsed sigma_z spin-boson Hamiltonians


@dataclasses.dataclass(frozen=True)
class ModulationFunction:
    """Piecewise ±1 modulation imprinted by a pi-pulse train; flips at each switch time."""

    switch_times: tuple[float, ...]
    initial_sign: int = 1

    def __init__(self, switch_times, initial_sign: int = 1):
        st = tuple(float(t) for t in switch_times)
        if any(b <= a for a, b in zip(st, st[1:])):
            raise ValueError("switch times must be strictly increasing")
        if initial_sign not in (1, -1):
            raise ValueError("initial sign must be ±1")
        object.__setattr__(self, "switch_times", st)
        object.__setattr__(self, "initial_sign", initial_sign)

    def sign_at(self, t: float) -> int:
        flips = sum(1 for s in self.switch_times if s <= t)
        return self.initial_sign * (-1) ** flips


def _merged_segments(mods: Sequence[ModulationFunction], t: float):
    cuts = sorted({0.0, t} | {s for m in mods for s in m.switch_times if 0.0 < s < t})
    for u, v in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (u + v)
        yield u, v, [m.sign_at(mid) for m in mods]


def g_function(mod: ModulationFunction, nu: float, t: float) -> complex:
    """G(t) = nu * integral_0^t f(t') exp(-i nu t') dt', exact per segment."""
    g = 0.0 + 0.0j
    for u, v, (s,) in _merged_segments([mod], t):
        g += s * 1j * (np.exp(-1j * nu * v) - np.exp(-1j * nu * u))
    return complex(g)


def magnus_sz_propagator(mods: Sequence[ModulationFunction], etas, nus, t: float):
    """Exact Magnus data for H = sum_jm f_j eta_jm nu_m (a_m e^{-i nu_m t} + h.c.) sigma_j^z.

    Returns (alphas, phi): alphas[j, m] = eta_jm * G_jm(t) are the
    displacement amplitudes entering U_s, and phi the two-qubit phase of U_c.
    All integrals are closed-form per constant-sign segment; the Magnus
    series terminates at second order for this Hamiltonian class.
    """
    etas = np.asarray(etas, dtype=float)
    nus = np.asarray(nus, dtype=float)
    if len(mods) != 2 or etas.shape != (2, len(nus)):
        raise ValueError("expected 2 modulation functions and a 2 x n_modes eta matrix")
    nmodes = len(nus)
    G = np.zeros((2, nmodes), dtype=complex)
    phi = 0.0
    for u, v, (s1, s2) in _merged_segments(mods, t):
        for m, nu in enumerate(nus):
            eu = np.exp(-1j * nu * u)
            ev = np.exp(-1j * nu * v)
            A = s1 * G[1, m] + s2 * G[0, m] - 2j * s1 * s2 * eu
            B = 2j * s1 * s2
            integral = A * (np.conj(ev) - np.conj(eu)) / (1j * nu) + B * (v - u)
            phi += etas[0, m] * etas[1, m] * nu * integral.imag
            G[0, m] += s1 * 1j * (ev - eu)
            G[1, m] += s2 * 1j * (ev - eu)
    alphas = etas * G
    return alphas, float(phi)


def sz_spin_boson_unitary(alphas, phi: float, fock_dims: Sequence[int]) -> Operator:
    """Dense U = U_s U_c on (qubit, qubit, modes...) from Magnus data.

    U_s = exp[-i sum_jm sigma_j^z (alpha_jm a_m + conj(alpha_jm) a_m†)] built
    per qubit branch (sigma_z eigenvalues) as exact mode displacements;
    U_c = exp[i phi sigma_1^z sigma_2^z].
    """
    from .hilbert import ladder_ops

    alphas = np.asarray(alphas, dtype=complex)
    fock_dims = [int(d) for d in fock_dims]
    dims = (2, 2, *fock_dims)
    n = int(np.prod(dims))
    u = np.zeros((n, n), dtype=complex)
    mode_ops = [ladder_ops(d) for d in fock_dims]
    qubit_block = int(np.prod(fock_dims))
    for i1, s1 in enumerate((1, -1)):
        for i2, s2 in enumerate((1, -1)):
            blocks = []
            for m, d in enumerate(fock_dims):
                a, adag = mode_ops[m]
                z = s1 * alphas[0, m] + s2 * alphas[1, m]
                blocks.append(sla.expm(-1j * (z * a.data + np.conj(z) * adag.data)))
            mode_u = blocks[0]
            for b in blocks[1:]:
                mode_u = np.kron(mode_u, b)
            phase = np.exp(1j * phi * s1 * s2)
            row = (2 * i1 + i2) * qubit_block
            u[row:row + qubit_block, row:row + qubit_block] = phase * mode_u
    return Operator(dims, u)


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck noise


@dataclasses.dataclass(frozen=True)
class OUProcess:
    """Stationary Gaussian noise with exponential correlation time tau.

    c_d is the diffusion constant (units 1/s^3 for a frequency-valued
    process); the stationary variance is c_d * tau / 2. The update rule is
    the exact conditional Gaussian, so the step size carries no bias.
    """

    tau: float
    c_d: float
    seed: int = 0
    dt: float = 1e-6
    x0: float | None = None

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("correlation time must be positive")
        if self.c_d < 0:
            raise ValueError("diffusion constant must be nonnegative")
        if self.dt >= self.tau:
            raise ValueError("dt must be small compared to the correlation time")


def ou_trajectory(p: OUProcess, duration: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample one trajectory on [0, duration] with the exact-update discretization.

    x_{n+1} = x_n e^{-dt/tau} + sqrt(var (1 - e^{-2 dt/tau})) xi_n is a
    first-order linear recursion, evaluated as an IIR filter.
    """
    from scipy.signal import lfilter

    rng = np.random.default_rng(p.seed)
    n = int(math.ceil(duration / p.dt)) + 1
    ts = np.arange(n) * p.dt
    var = p.c_d * p.tau / 2.0
    decay = math.exp(-p.dt / p.tau)
    step_sd = math.sqrt(var * (1.0 - decay * decay))
    if p.x0 is None:
        x0 = rng.normal(0.0, math.sqrt(var)) if var > 0 else 0.0
    else:
        x0 = float(p.x0)
    drive = np.empty(n)
    drive[0] = x0
    drive[1:] = step_sd * rng.normal(0.0, 1.0, n - 1)
    xs = lfilter([1.0], [1.0, -decay], drive)
    return ts, xs


def ou_diffusion_for_t2(tau_b: float, t2: float) -> float:
    """Diffusion constant giving a dephasing 1/e time of t2 for OU frequency noise.

    In the fast-noise limit the coherence decays at sigma^2 * tau_b with
    sigma^2 = c_d tau_b / 2, so c_d = 2 / (tau_b^2 * t2) lands the decay
    constant on t2. (A dimensionally inconsistent shorthand for this
    calibration circulates; the fitted decay time is what we guarantee.)
    """
    return 2.0 / (tau_b * tau_b * t2)
