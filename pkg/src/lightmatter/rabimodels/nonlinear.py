"""Beyond-Lamb-Dicke qubit-boson models: the f1 coupling dressing and its uses.

f1(n, eta) is the diagonal operator that multiplies the sideband coupling
when the ion sits outside the Lamb-Dicke regime. Its zeros cut the Fock
ladder: a transition |g,n> <-> |e,n+1> with f1(n) = 0 freezes, which blocks
population transport past n ("barrier"), and combined with qubit decay pumps
everything below into the Fock state at the barrier.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .. import hilbert as hb
from ..dynamics import LindbladModel, TimeDependentHamiltonian, evolve_lindblad


def f1_nonlinear(n: int, eta: float) -> float:
    """f1(n) = exp(-eta^2/2) sum_l (-eta^2)^l / (l! (l+1)!) * n!/(n-l)!.

    The sum terminates at l = n exactly (a†^l a^l kills smaller Fock states).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    x = eta * eta
    total = 0.0
    term = 1.0  # l = 0: 1/(0! 1!) * n!/n!
    for l in range(n + 1):
        if l > 0:
            # ratio of consecutive summands: (-x) * (n-l+1) / (l (l+1))
            term *= -x * (n - l + 1) / (l * (l + 1))
        total += term
    return math.exp(-x / 2) * total


def f1_operator(dim: int, eta: float) -> hb.Operator:
    return hb.Operator((dim,), np.diag([f1_nonlinear(n, eta) for n in range(dim)]))


def f1_zero(n: int, bracket: tuple[float, float] | None = None,
            tol: float = 1e-10) -> float:
    """Lamb-Dicke parameter where f1(n, eta) = 0, by bisection over eta.

    Without an explicit bracket the first sign change above eta = 0 is
    located by a fine upward scan (f1 oscillates, so wide brackets can
    enclose an even number of zeros and lose the sign change).
    """
    if bracket is None:
        step = 0.005
        eta = step
        prev = f1_nonlinear(n, 0.0)
        while eta < 2.0:
            cur = f1_nonlinear(n, eta)
            if prev * cur <= 0:
                bracket = (eta - step, eta)
                break
            prev, eta = cur, eta + step
        else:
            raise ValueError(f"no zero of f1({n}) found below eta = 2")
    lo, hi = bracket
    flo, fhi = f1_nonlinear(n, lo), f1_nonlinear(n, hi)
    if flo * fhi > 0:
        raise ValueError(f"no sign change of f1({n}) on {bracket}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f1_nonlinear(n, mid)
        if abs(fmid) < tol:
            return mid
        if flo * fmid <= 0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


@dataclasses.dataclass(frozen=True)
class NQRMParams:
    """Nonlinear quantum Rabi model parameters (rad/s) plus truncation."""

    omega0: float
    omega: float
    g: float
    eta: float
    dim: int

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.dim < 4:
            raise ValueError("Fock truncation too small")


def nqrm_hamiltonian(p: NQRMParams) -> hb.Operator:
    """H = omega0/2 sz + omega n + i g (s+ - s-)(f1 a + a† f1)."""
    dim = p.dim
    sz = hb.tensor([hb.sigmaz(), hb.qeye(dim)]).data
    n = hb.tensor([hb.qeye(2), hb.number(dim)]).data
    f1a = f1_operator(dim, p.eta).data @ hb.destroy(dim).data
    sp_full = hb.tensor([hb.sigmap(), hb.qeye(dim)]).data
    x_full = hb.tensor([hb.qeye(2), hb.Operator((dim,), f1a)]).data
    # i (s+ - s-)(f1 a + a† f1) with (f1 a)† = a† f1
    term = 1j * sp_full @ (x_full + x_full.conj().T)
    h = (p.omega0 / 2) * sz + p.omega * n + p.g * (term + term.conj().T)
    return hb.Operator((2, dim), h)


def linear_qrm_hamiltonian(omega0: float, omega: float, g: float, dim: int,
                           coupling_axis: str = "y") -> hb.Operator:
    """Linear model with the same conventions; axis 'y' matches the eta->0 limit."""
    sz = hb.tensor([hb.sigmaz(), hb.qeye(dim)]).data
    n = hb.tensor([hb.qeye(2), hb.number(dim)]).data
    a = hb.tensor([hb.qeye(2), hb.destroy(dim)]).data
    if coupling_axis == "y":
        spin = 1j * (hb.tensor([hb.sigmap(), hb.qeye(dim)]).data
                     - hb.tensor([hb.sigmam(), hb.qeye(dim)]).data)
    elif coupling_axis == "x":
        spin = hb.tensor([hb.sigmax(), hb.qeye(dim)]).data
    else:
        raise ValueError("coupling_axis must be 'x' or 'y'")
    h = (omega0 / 2) * sz + omega * n + g * (spin @ (a + a.conj().T))
    return hb.Operator((2, dim), h)


def barrier_leakage(p: NQRMParams, psi0: hb.StateVector, barrier: int,
                    t_final: float, samples: int = 60) -> float:
    """Max population found above the barrier along the evolution."""
    h = nqrm_hamiltonian(p)
    evals, vecs = np.linalg.eigh(h.data)
    coeff = vecs.conj().T @ psi0.data
    mask = np.zeros(2 * p.dim)
    for q in range(2):
        for n in range(barrier + 1, p.dim):
            mask[q * p.dim + n] = 1.0
    worst = 0.0
    for t in np.linspace(0, t_final, samples):
        psi = vecs @ (np.exp(-1j * evals * t) * coeff)
        worst = max(worst, float(np.sum(mask * np.abs(psi) ** 2)))
    return worst


# ---------------------------------------------------------------------------
# JC-type dynamics and the dissipative Fock pump


def jc_hamiltonian(g: float, dim: int, nonlinear_eta: float | None = None) -> hb.Operator:
    """Resonant (anti-rotating-free) JC coupling i g (s+ f1 a - s- a† f1).

    nonlinear_eta = None gives the linear model (f1 = identity).
    """
    f1 = np.eye(dim) if nonlinear_eta is None else f1_operator(dim, nonlinear_eta).data
    a = hb.destroy(dim).data
    sp_full = hb.tensor([hb.sigmap(), hb.qeye(dim)]).data
    fa_full = hb.tensor([hb.qeye(2), hb.Operator((dim,), f1 @ a)]).data
    term = 1j * (sp_full @ fa_full)
    return hb.Operator((2, dim), term + term.conj().T)


def anti_jc_hamiltonian(g_b: float, dim: int, eta: float) -> hb.Operator:
    """Nonlinear anti-JC coupling i g_b (s+ a† f1 - s- f1 a)."""
    f1 = f1_operator(dim, eta).data
    adag = hb.create(dim).data
    sp_full = hb.tensor([hb.sigmap(), hb.qeye(dim)]).data
    af_full = hb.tensor([hb.qeye(2), hb.Operator((dim,), adag @ f1)]).data
    term = 1j * g_b * (sp_full @ af_full)
    return hb.Operator((2, dim), term + term.conj().T)


def sigma_z_trace(h: hb.Operator, psi0: hb.StateVector, times) -> np.ndarray:
    """<sigma_z>(t) under a constant Hamiltonian, exact eigenbasis propagation."""
    dim = h.dims[1]
    evals, vecs = np.linalg.eigh(h.data)
    coeff = vecs.conj().T @ psi0.data
    szd = np.real(np.diag(hb.tensor([hb.sigmaz(), hb.qeye(dim)]).data))
    out = np.empty(len(times))
    for i, t in enumerate(times):
        psi = vecs @ (np.exp(-1j * evals * t) * coeff)
        out[i] = float(np.sum(szd * np.abs(psi) ** 2))
    return out


@dataclasses.dataclass(frozen=True)
class FockPumpResult:
    times: np.ndarray
    target_population: np.ndarray
    above_barrier_max: float
    final_rho: hb.DensityMatrix


def fock_state_pump(eta: float, g_b: float, gamma: float,
                    rho0: hb.DensityMatrix, t_final: float,
                    target: int | None = None,
                    samples: int = 80) -> FockPumpResult:
    """Dissipative climb of the Fock ladder up to the f1 barrier.

    Evolves rho under the nonlinear anti-JC Hamiltonian plus qubit decay at
    rate gamma. The initial state must not carry appreciable weight above
    the barrier (guard at 1e-3), since that part never comes back down.
    A mode-only rho0 is promoted to |g><g| x rho0.
    """
    if len(rho0.dims) == 1:
        qubit_g = hb.basis(2, 1).to_density_matrix()
        rho0 = hb.DensityMatrix((2, rho0.dims[0]),
                                np.kron(qubit_g.data, rho0.data), check=False)
    dim = rho0.dims[-1]
    if target is None:
        # barrier = first f1 zero crossing within the truncation
        target = next((n for n in range(dim - 1)
                       if f1_nonlinear(n, eta) * f1_nonlinear(n + 1, eta) < 0
                       or abs(f1_nonlinear(n, eta)) < 1e-9), dim - 1)
    pops = np.real(np.diag(rho0.data))
    above = float(sum(pops[q * dim + n] for q in range(2)
                      for n in range(target + 1, dim)))
    if above > 1e-3:
        raise ValueError(f"initial weight {above:.2e} above the barrier n={target}")

    h = anti_jc_hamiltonian(g_b, dim, eta)
    sm_full = hb.tensor([hb.sigmam(), hb.qeye(dim)])
    model = LindbladModel(TimeDependentHamiltonian.constant(h),
                          [(gamma, sm_full)])
    times = np.linspace(0.0, t_final, samples)
    traj = evolve_lindblad(model, rho0, times)
    target_pop = np.empty(samples)
    worst_above = 0.0
    for i, rho in enumerate(traj):
        diag = np.real(np.diag(rho.data))
        target_pop[i] = diag[target] + diag[dim + target]
        worst_above = max(worst_above, float(
            sum(diag[q * dim + n] for q in range(2)
                for n in range(target + 1, dim))))
    return FockPumpResult(times, target_pop, worst_above, traj[-1])


def truncated_thermal(nbar: float, dim: int, ceiling: int) -> hb.DensityMatrix:
    """Thermal mode state with all weight at or below ``ceiling``, renormalized."""
    ns = np.arange(dim, dtype=float)
    p = nbar ** ns / (nbar + 1.0) ** (ns + 1)
    p[ceiling + 1:] = 0.0
    p /= p.sum()
    return hb.DensityMatrix((dim,), np.diag(p).astype(complex))
