"""Qubit-boson model with a number-dependent Stark shift and its selective resonances.

The Stark term gamma * n * sigma_z makes every Jaynes-Cummings doublet carry
its own detuning, so one- and k-photon transitions can be switched on for a
single preselected Fock state. The k-photon ladder comes out of the Dyson
series: detunings chain through intermediate one-photon virtual steps and
the coupling picks up one power of g per photon.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .. import hilbert as hb


@dataclasses.dataclass(frozen=True)
class RabiStarkParams:
    """(omega0, omega, gamma, g) parameter bundle, frequencies in rad/s."""

    omega0: float
    omega: float
    gamma: float
    g: float
    dim: int = 40

    def __post_init__(self):
        if self.dim < 4:
            raise ValueError("Fock truncation too small")

    @property
    def below_collapse(self) -> bool:
        """|gamma| < omega keeps the spectrum bounded from below."""
        return abs(self.gamma) < self.omega


def rabi_stark_hamiltonian(p: RabiStarkParams) -> hb.Operator:
    """H = omega0/2 sz + omega n + gamma n sz + g sx (a + a†) on (qubit, mode)."""
    dim = p.dim
    sz = hb.tensor([hb.sigmaz(), hb.qeye(dim)]).data
    sx = hb.tensor([hb.sigmax(), hb.qeye(dim)]).data
    n = hb.tensor([hb.qeye(2), hb.number(dim)]).data
    a = hb.tensor([hb.qeye(2), hb.destroy(dim)]).data
    h = (p.omega0 / 2) * sz + p.omega * n + p.gamma * (n @ sz) \
        + p.g * (sx @ (a + a.conj().T))
    return hb.Operator((2, dim), h)


def dressed_energies(p: RabiStarkParams, n: int) -> tuple[float, float]:
    """Bare-basis diagonal energies (omega_n^e, omega_n^g) at g = 0."""
    we = (p.omega + p.gamma) * n + p.omega0 / 2
    wg = (p.omega - p.gamma) * n - p.omega0 / 2
    return we, wg


def one_photon_resonances(p: RabiStarkParams, n: int) -> tuple[float, float]:
    """(delta_n^+, delta_n^-) = omega ± [omega0 + gamma (2n + 1)].

    delta_n^- = 0 puts the JC doublet {|e,n>, |g,n+1>} on resonance;
    delta_n^+ = 0 the anti-JC pair {|g,n>, |e,n+1>}.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    wn0 = p.omega0 + p.gamma * (2 * n + 1)
    return p.omega + wn0, p.omega - wn0


def rabi_coupling(p: RabiStarkParams, n: int) -> float:
    """Omega_n = g sqrt(n+1); zero for n < 0 (no lower neighbour)."""
    return 0.0 if n < 0 else p.g * math.sqrt(n + 1)


def second_order_shifts(p: RabiStarkParams, n: int,
                        divisor_tol: float = 1e-12) -> tuple[float, float]:
    """AC-Stark corrections (Delta_n^e, Delta_n^g) from the second-order Hamiltonian."""
    def guarded(num, den):
        if abs(den) < divisor_tol * p.omega:
            raise ZeroDivisionError("resonant divisor in second-order shift")
        return num / den

    dp_nm1, dm_nm1 = one_photon_resonances(p, n - 1) if n > 0 else (math.inf, math.inf)
    dp_n, dm_n = one_photon_resonances(p, n)
    om_nm1 = rabi_coupling(p, n - 1)
    om_n = rabi_coupling(p, n)
    delta_e = (guarded(om_nm1 ** 2, dp_nm1) if n > 0 else 0.0) - guarded(om_n ** 2, dm_n)
    delta_g = (guarded(om_nm1 ** 2, dm_nm1) if n > 0 else 0.0) - guarded(om_n ** 2, dp_n)
    return delta_e, delta_g


@dataclasses.dataclass(frozen=True)
class KPhotonResonance:
    k: int
    n: int
    delta_plus: float
    delta_minus: float
    rabi_plus: float
    rabi_minus: float
    corrected_delta_plus: float | None = None
    corrected_delta_minus: float | None = None


def k_photon_resonance(p: RabiStarkParams, k: int, n: int,
                       divisor_tol: float = 1e-9) -> KPhotonResonance:
    """Detunings and effective couplings of the k-photon transition at n.

    Only odd k survives the averaging. delta^(k)_{n±} = (k-1) omega +
    delta^±_{n+(k-1)/2}; the coupling chains through the odd-order
    intermediate detunings. For k = 3 the second-order Stark shifts give the
    corrected resonance positions as well.
    """
    if k < 3 or k % 2 == 0:
        raise ValueError("selective multi-photon processes need odd k >= 3")
    if n < 0:
        raise ValueError("n must be nonnegative")

    def chain(sign: str) -> tuple[float, float]:
        idx = 0 if sign == "+" else 1
        delta_k = (k - 1) * p.omega + one_photon_resonances(p, n + (k - 1) // 2)[idx]
        prod = 1.0
        for s in range(1, k - 1, 2):
            d_s = (s - 1) * p.omega + one_photon_resonances(p, n + (s - 1) // 2)[idx]
            if abs(d_s) < divisor_tol * p.omega:
                raise ZeroDivisionError(
                    f"degenerate intermediate path: delta^({s}) ~ 0 at n={n}")
            prod *= d_s
        sgn_gamma = p.gamma if sign == "+" else -p.gamma
        amp = (p.g ** k
               / (_double_factorial(k - 1) * (p.omega - sgn_gamma) ** ((k - 1) // 2))
               * math.sqrt(math.factorial(n + k) / math.factorial(n))
               / prod)
        return delta_k, amp

    dp, rp = chain("+")
    dm, rm = chain("-")
    res = KPhotonResonance(k, n, dp, dm, rp, rm)
    if k == 3:
        d_e_n3, d_g_n3 = second_order_shifts(p, n + 3)
        d_e_n, d_g_n = second_order_shifts(p, n)
        res = dataclasses.replace(
            res,
            corrected_delta_plus=dp + d_e_n3 - d_g_n,
            corrected_delta_minus=dm + d_g_n3 - d_e_n,
        )
    return res


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def five_photon_crude_frequency(omega: float, gamma: float, n0: int) -> float:
    """Approximate qubit frequency of the JC-type five-photon resonance.

    Solves delta^(5)_{n0 -} = 0 at zeroth order: omega0 = 5 omega - gamma (2 n0 + 5).
    """
    return 5 * omega - gamma * (2 * n0 + 5)


def excited_population_after(p: RabiStarkParams, psi0: hb.StateVector,
                             t: float) -> float:
    """<sigma_+ sigma_-> after evolving under the full model for time t."""
    h = rabi_stark_hamiltonian(p)
    evals, vecs = np.linalg.eigh(h.data)
    psi = vecs @ (np.exp(-1j * evals * t) * (vecs.conj().T @ psi0.data))
    proj = hb.tensor([hb.Operator((2,), np.diag([1.0, 0.0])), hb.qeye(p.dim)]).data
    return float(np.real(np.vdot(psi, proj @ psi)))


def quadratic_peak(xs: np.ndarray, ys: np.ndarray) -> float:
    """Peak location by quadratic interpolation around the sample maximum."""
    i = int(np.argmax(ys))
    if i == 0 or i == len(xs) - 1:
        return float(xs[i])
    x0, x1, x2 = xs[i - 1], xs[i], xs[i + 1]
    y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
    denom = (y0 - 2 * y1 + y2)
    if denom == 0:
        return float(x1)
    return float(x1 + 0.5 * (y0 - y2) / denom * (x1 - x0))


def five_photon_scan(omega: float, gamma: float, g: float, n0: int,
                     dim: int = 40, window: float = 0.12, points: int = 41,
                     refine: bool = True) -> tuple[np.ndarray, np.ndarray, float]:
    """Scan omega0 near the crude five-photon resonance from |g, n0+5>.

    Returns (omega0 grid, excited population, interpolated peak location).
    The evolution time pi / (2 Omega^(5)) is fixed at the crude center. The
    five-photon line is much narrower than a practical coarse grid, so the
    coarse peak is re-scanned on a zoomed grid before interpolating.
    """
    center = five_photon_crude_frequency(omega, gamma, n0)
    p_center = RabiStarkParams(center, omega, gamma, g, dim)
    res = k_photon_resonance(p_center, 5, n0)
    t = math.pi / (2 * abs(res.rabi_minus))
    psi0 = hb.tensor_states([hb.basis(2, 1), hb.basis(dim, n0 + 5)])

    def run(grid):
        pops = np.empty(len(grid))
        for i, w0 in enumerate(grid):
            p = RabiStarkParams(w0, omega, gamma, g, dim)
            pops[i] = excited_population_after(p, psi0, t)
        return pops

    # the line is roughly Omega^(5) wide; the coarse spacing must not be much
    # coarser than that or the scan can fall between the wings entirely
    coarse_n = max(points, int(2 * window * omega / (3 * abs(res.rabi_minus))))
    grid = np.linspace(center - window * omega, center + window * omega, coarse_n)
    pops = run(grid)
    peak = quadratic_peak(grid, pops)
    if refine:
        span = 2 * (grid[1] - grid[0])
        fine = np.linspace(peak - span, peak + span, points)
        fine_pops = run(fine)
        peak = quadratic_peak(fine, fine_pops)
        return fine, fine_pops, peak
    return grid, pops, peak
