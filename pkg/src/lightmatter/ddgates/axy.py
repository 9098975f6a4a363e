"""AXY-n pulse sequences and the closure search for pulsed two-qubit gates.

An AXY-n sequence is n blocks of 5 non-equally spaced pi pulses; the block
symmetry gives the modulation function f(t + tau) = -f(t), which kills the
center-of-mass displacement exactly whenever nu_1 tau = 2 pi r with an even
block count. The remaining breathing-mode displacement and the accumulated
two-qubit phase depend only on the rescaled timings (tau_a/tau, tau_b/tau),
the block count and r, so the design search runs in dimensionless units.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .. import constants as const
from ..dynamics import ModulationFunction, magnus_sz_propagator

SQRT3 = math.sqrt(3.0)

# pulse phases of the 5-pulse X block; the Y block adds pi/2
X_BLOCK_PHASES = (math.pi / 6, math.pi / 2, 0.0, math.pi / 2, math.pi / 6)


@dataclasses.dataclass(frozen=True)
class AXYSequence:
    """Timing and phase data of an AXY-n_B sequence.

    tau_a < tau_b < tau/2 are the first two pulse times inside the symmetric
    5-pulse block. t_pi = 0 means instantaneous pulses; stagger shifts every
    pulse of the second ion by a fixed delay to avoid simultaneous driving.
    """

    tau: float
    tau_a: float
    tau_b: float
    n_blocks: int
    zeta: float = 0.0
    t_pi: float = 0.0
    stagger: float = 0.0

    def __post_init__(self):
        if not 0 < self.tau_a < self.tau_b < self.tau / 2:
            raise ValueError("need 0 < tau_a < tau_b < tau/2")
        if self.n_blocks < 1:
            raise ValueError("need at least one block")
        if self.t_pi < 0 or self.stagger < 0:
            raise ValueError("t_pi and stagger must be nonnegative")
        if self.t_pi > 0 and self.stagger <= self.t_pi:
            raise ValueError("staggered pulses must not overlap: stagger > t_pi")

    @property
    def duration(self) -> float:
        return self.n_blocks * self.tau

    def pulse_times(self, offset: float = 0.0) -> list[float]:
        """Pulse centers, block-symmetric: (ta, tb, tau/2, tau-tb, tau-ta)."""
        inner = (self.tau_a, self.tau_b, self.tau / 2,
                 self.tau - self.tau_b, self.tau - self.tau_a)
        return [offset + k * self.tau + t for k in range(self.n_blocks) for t in inner]

    def pulse_phases(self) -> list[float]:
        """Per-pulse rotation-axis phases, alternating X and Y blocks."""
        out = []
        for k in range(self.n_blocks):
            shift = self.zeta + (math.pi / 2 if k % 2 else 0.0)
            out.extend(p + shift for p in X_BLOCK_PHASES)
        return out

    def modulation(self, offset: float = 0.0) -> ModulationFunction:
        return ModulationFunction(tuple(self.pulse_times(offset)))


def g_function(seq: AXYSequence, nu_m: float, t: float) -> complex:
    """G(t) = nu_m * integral_0^t f(t') exp(-i nu_m t') dt' for the sequence."""
    if t > seq.duration + 1e-12:
        raise ValueError("t beyond the end of the sequence")
    from ..dynamics import g_function as _g

    return _g(seq.modulation(), nu_m, t)


def _block_boundaries(ta: np.ndarray, tb: np.ndarray, tau: float):
    """Segment boundaries and signs of one AXY block (vectorized over ta, tb)."""
    zeros = np.zeros_like(ta)
    bounds = [zeros, ta, tb, np.full_like(ta, tau / 2), tau - tb, tau - ta,
              np.full_like(ta, tau)]
    signs = [1, -1, 1, -1, 1, -1]
    return bounds, signs


def _block_integral(ta, tb, tau: float, nu: float):
    """nu * integral over one block of f(t) exp(-i nu t) dt, vectorized."""
    bounds, signs = _block_boundaries(np.asarray(ta, float), np.asarray(tb, float), tau)
    acc = np.zeros(np.broadcast(bounds[0], bounds[1]).shape, dtype=complex)
    for k, s in enumerate(signs):
        acc += s * 1j * (np.exp(-1j * nu * bounds[k + 1]) - np.exp(-1j * nu * bounds[k]))
    return acc


def g_sequence_end(ta, tb, tau: float, nu: float, n_blocks: int):
    """G at t = n_blocks * tau via the block decomposition, vectorized.

    Blocks repeat with alternating sign, so the total is the single-block
    integral times a geometric factor in exp(-i nu tau).
    """
    block = _block_integral(ta, tb, tau, nu)
    q = -np.exp(-1j * nu * tau)
    if abs(q - 1.0) < 1e-14:
        factor = complex(n_blocks)  # nu*tau an odd multiple of pi
    else:
        factor = (1.0 - q ** n_blocks) / (1.0 - q)
    return block * factor


def closure_scalar(ta, tb, tau: float, nu: float):
    """Real scalar whose zeros are the G = 0 closure manifold.

    The block modulation is antisymmetric about tau/2, which makes
    exp(i nu tau / 2) * block integral purely imaginary; its imaginary part
    is the one real condition on (tau_a, tau_b).
    """
    block = _block_integral(ta, tb, tau, nu)
    return np.imag(np.exp(1j * nu * tau / 2) * block)


def normalized_phase(ta: float, tb: float, r: int, n_blocks: int,
                     t_frac: float = 1.0) -> float:
    """Rescaled two-qubit phase phitilde; depends only on (ta/tau, tb/tau, r, n_B).

    Computed with nu_1 = 1, tau = 2 pi r and unit center-of-mass coupling;
    the physical phase is eta_1^2 * phitilde. The breathing mode enters with
    weight -1/(3 sqrt 3) from the eta ~ nu^(-3/2) scaling.
    """
    nu1 = 1.0
    tau = 2 * math.pi * r / nu1
    seq = AXYSequence(tau, ta * tau, tb * tau, n_blocks)
    mod = seq.modulation()
    etas = np.array([[1.0, -3.0 ** -0.75], [1.0, 3.0 ** -0.75]])
    t = t_frac * seq.duration
    _, phi = magnus_sz_propagator([mod, mod], etas, [nu1, SQRT3 * nu1], t)
    return phi


@dataclasses.dataclass(frozen=True)
class ClosureCandidate:
    tau_a: float  # units of tau
    tau_b: float  # units of tau
    phitilde: float
    g2_residual: float


def search_closure(r: int, n_blocks: int, target_phitilde: float | None = None,
                   grid: int = 600, gtol: float | None = None) -> list[ClosureCandidate]:
    """Grid scan of |G_j2(n_B tau)| over rescaled (tau_a, tau_b).

    Returns cells below the closure threshold, annotated with the rescaled
    phase and sorted by |phitilde - target| when a target is given (by
    |G_j2| otherwise). Empty result means no closure at this (r, n_B).
    """
    if r < 1:
        raise ValueError("r must be a positive integer")
    nu1 = 1.0
    tau = 2 * math.pi * r / nu1
    nu2 = SQRT3 * nu1
    if gtol is None:
        gtol = 1e-3 * nu2 * tau
    xs = (np.arange(grid) + 0.5) / grid * 0.5  # tau_a/tau in (0, 1/2)
    ta, tb = np.meshgrid(xs, xs, indexing="ij")
    mask = ta < tb
    g2 = np.where(mask, np.abs(g_sequence_end(ta * tau, tb * tau, tau, nu2, n_blocks)),
                  np.inf)
    hits = np.argwhere(g2 < gtol)
    out = []
    for i, j in hits:
        phit = normalized_phase(float(ta[i, j]), float(tb[i, j]), r, n_blocks)
        out.append(ClosureCandidate(float(ta[i, j]), float(tb[i, j]), phit,
                                    float(g2[i, j])))
    if target_phitilde is not None:
        out.sort(key=lambda c: abs(c.phitilde - target_phitilde))
    else:
        out.sort(key=lambda c: c.g2_residual)
    return out


def refine_closure(ta: float, tb: float, r: int, n_blocks: int,
                   tol: float = 1e-14) -> tuple[float, float]:
    """Polish a closure candidate by bisecting the scalar condition in tau_a.

    The closure manifold is one real condition, so tau_b is held and tau_a
    bisected across the sign change of the block-integral scalar.
    """
    tau = 2 * math.pi * r
    nu2 = SQRT3

    def f(x):
        return float(closure_scalar(x * tau, tb * tau, tau, nu2))

    lo, hi = ta, ta
    step = 1e-4
    flo = f(ta)
    for _ in range(60):
        lo2, hi2 = lo - step, hi + step
        if lo2 > 0 and np.sign(f(lo2)) != np.sign(flo):
            lo = lo2
            break
        if hi2 < tb and np.sign(f(hi2)) != np.sign(flo):
            lo, hi, flo = hi2, lo, f(hi2)
            break
        lo, hi = lo2, hi2
        step *= 1.6
    else:
        raise ValueError("no sign change near the candidate; not a closure point")
    a, b = (lo, hi) if lo < hi else (hi, lo)
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if abs(fm) < tol or (b - a) < 1e-16:
            return m, tb
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b), tb


def solve_gate_timings(r: int, n_blocks: int, target_phitilde: float,
                       grid: int = 300) -> tuple[float, float, float]:
    """Find (tau_a, tau_b) on the closure manifold hitting a target phase.

    Walks the closure curve over tau_b (tau_a refined at each point), then
    root-finds the phase match along it. Returns (tau_a, tau_b, phitilde) in
    units of tau.
    """
    from scipy.optimize import brentq

    cands = search_closure(r, n_blocks, target_phitilde, grid=grid)
    if not cands:
        raise ValueError(f"no closure region at r={r}, n_B={n_blocks}")

    def phase_on_curve(tb: float, ta_seed: float) -> tuple[float, float]:
        ta, _ = refine_closure(ta_seed, tb, r, n_blocks)
        return normalized_phase(ta, tb, r, n_blocks), ta

    best = cands[0]
    # local continuation around the best cell to bracket the phase target
    tb0 = best.tau_b
    ta_seed = best.tau_a
    step = 0.5 / grid
    pts = []
    for direction in (1, -1):
        tb, seed = tb0, ta_seed
        for _ in range(grid):
            try:
                phit, ta = phase_on_curve(tb, seed)
            except ValueError:
                break
            pts.append((tb, ta, phit))
            seed = ta
            tb += direction * step
            if not 0 < tb < 0.5:
                break
    pts.sort()
    for (tb1, ta1, p1), (tb2, ta2, p2) in zip(pts[:-1], pts[1:]):
        if (p1 - target_phitilde) * (p2 - target_phitilde) <= 0 and abs(tb2 - tb1) < 2 * step:
            seed_mid = 0.5 * (ta1 + ta2)

            def resid(tb):
                return phase_on_curve(tb, seed_mid)[0] - target_phitilde

            tb_star = brentq(resid, tb1, tb2, xtol=1e-13)
            phit, ta_star = phase_on_curve(tb_star, seed_mid)
            return ta_star, tb_star, phit
    raise ValueError("target phase not crossed on the scanned closure branch")


def gate_phase(seq1: AXYSequence, seq2: AXYSequence, eta1: float, nu1: float,
               t: float | None = None) -> float:
    """Physical two-qubit phase phi = eta_1^2 * phitilde at time t.

    Both sequences must share the block period; the second sequence may be a
    staggered copy. Exact piecewise evaluation, no quadrature.
    """
    if abs(seq1.tau - seq2.tau) > 1e-15 * seq1.tau:
        raise ValueError("sequences must share the block period tau")
    if t is None:
        t = seq1.duration
    nu2 = SQRT3 * nu1
    eta2 = eta1 * 3.0 ** -0.75
    etas = np.array([[eta1, -eta2], [eta1, eta2]])
    mods = [seq1.modulation(), seq2.modulation(seq2.stagger)]
    _, phi = magnus_sz_propagator(mods, etas, [nu1, nu2], t)
    return phi
