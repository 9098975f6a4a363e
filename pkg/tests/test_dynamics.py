import numpy as np
import pytest
import scipy.linalg as sla

from lightmatter import hilbert as hb
from lightmatter import dynamics as dyn


def jc_hamiltonian(wc, wa, g, dim):
    sz = hb.tensor([hb.sigmaz(), hb.qeye(dim)])
    n = hb.tensor([hb.qeye(2), hb.number(dim)])
    sp = hb.tensor([hb.sigmap(), hb.destroy(dim)])
    h = wa / 2 * sz.data + wc * n.data + g * (sp.data + sp.data.conj().T)
    return hb.Operator((2, dim), h)


def test_larmor_pi_rotation():
    h = hb.Operator((2,), hb.sigmaz().data / 2)
    H = dyn.TimeDependentHamiltonian.constant(h)
    plus = hb.StateVector((2,), np.array([1, 1]) / np.sqrt(2))
    minus = hb.StateVector((2,), np.array([1, -1]) / np.sqrt(2))
    out = dyn.evolve_schrodinger(H, plus, [0.0, np.pi])[-1]
    assert hb.state_fidelity(out, minus) > 1 - 1e-9


def test_resonant_jc_vacuum_rabi():
    # resonant JC, g = 0.01 w: |e,0> fully transfers to |g,1> at t = pi/2g
    w, g, dim = 1.0, 0.01, 6
    H = dyn.TimeDependentHamiltonian.constant(jc_hamiltonian(w, w, g, dim))
    psi0 = hb.tensor_states([hb.basis(2, 0), hb.basis(dim, 0)])
    out = dyn.evolve_schrodinger(H, psi0, [0.0, np.pi / (2 * g)])[-1]
    target = hb.tensor_states([hb.basis(2, 1), hb.basis(dim, 1)])
    assert hb.state_fidelity(out, target) > 1 - 1e-4


def test_random_hermitian_matches_expm():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = (m + m.conj().T) / 2
    psi0 = hb.StateVector((6,), np.eye(6)[0])
    out = dyn.evolve_schrodinger(
        dyn.TimeDependentHamiltonian.constant(hb.Operator((6,), h)), psi0, [0.0, 1.0]
    )[-1]
    expected = sla.expm(-1j * h) @ psi0.data
    assert np.max(np.abs(out.data - expected)) < 1e-8


def test_rk4_norm_preservation():
    # smooth drive, check norm drift stays within 1e-8
    sx = hb.sigmax().data

    def h(t):
        return 0.3 * np.cos(1.7 * t) * sx

    H = dyn.TimeDependentHamiltonian((2,), h, "smooth")
    psi0 = hb.basis(2, 0)
    out = dyn.evolve_schrodinger(H, psi0, np.linspace(0, 20.0, 5), max_step=1e-3)[-1]
    assert abs(out.norm() - 1.0) < 1e-8


def test_halving_step_convergence():
    sx = hb.sigmax().data

    def h(t):
        return 0.3 * np.cos(1.7 * t) * sx

    H = dyn.TimeDependentHamiltonian((2,), h, "smooth")
    probe = dyn.convergence_probe(H, hb.basis(2, 0), 10.0, 4000)
    assert probe < 1e-7


def test_non_hermitian_rejected():
    H = dyn.TimeDependentHamiltonian((2,), lambda t: np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        dyn.evolve_schrodinger(H, hb.basis(2, 0), [0.0, 1.0])


def test_lindblad_closed_system_matches_schrodinger():
    w, g, dim = 1.0, 0.02, 5
    op = jc_hamiltonian(w, w, g, dim)
    H = dyn.TimeDependentHamiltonian.constant(op)
    psi0 = hb.tensor_states([hb.basis(2, 0), hb.basis(dim, 0)])
    t = 30.0
    pure = dyn.evolve_schrodinger(H, psi0, [0.0, t])[-1]
    mixed = dyn.evolve_lindblad(dyn.LindbladModel(H), psi0.to_density_matrix(), [0.0, t])[-1]
    expected = pure.to_density_matrix()
    assert np.max(np.abs(mixed.data - expected.data)) < 1e-7


def test_lindblad_pure_decay():
    gamma = 0.37
    H = dyn.TimeDependentHamiltonian.constant(hb.Operator((2,), np.zeros((2, 2))))
    model = dyn.LindbladModel(H, [(gamma, hb.sigmam())])
    rho0 = hb.basis(2, 0).to_density_matrix()
    t = 2.1
    rho = dyn.evolve_lindblad(model, rho0, [0.0, t])[-1]
    assert abs(rho.data[0, 0].real - np.exp(-gamma * t)) < 1e-6


def test_lindblad_thermal_heating_rate():
    # empty mode heated at rate Gb*Nb: <n(t)> ~ Gb*Nb*t for small t
    dim = 8
    nu = 1.0
    gb, nb = 0.001, 2.0
    a, adag = hb.ladder_ops(dim)
    H = dyn.TimeDependentHamiltonian.constant(hb.Operator((dim,), nu * hb.number(dim).data))
    model = dyn.LindbladModel(
        H, [(gb * (nb + 1), a), (gb * nb, adag)]
    )
    rho0 = hb.basis(dim, 0).to_density_matrix()
    t = 1.0  # gb*t << 1: rate-equation regime
    rho = dyn.evolve_lindblad(model, rho0, [0.0, t], max_step=0.01)[-1]
    got = hb.expect(hb.number(dim), rho).real
    # rate-equation oracle: dn/dt = gb*nb*(n+1)... at n<<nb: n(t) = nb*(1-exp(-gb*t)) expanded
    expected = nb * (1 - np.exp(-gb * t))
    assert abs(got - expected) < 1e-4


def test_lindblad_time_dependent_path():
    sx = hb.sigmax().data

    def h(t):
        return 0.2 * np.cos(t) * sx

    H = dyn.TimeDependentHamiltonian((2,), h, "smooth")
    model = dyn.LindbladModel(H, [(0.05, hb.sigmam())])
    rho = dyn.evolve_lindblad(model, hb.basis(2, 0).to_density_matrix(),
                              np.linspace(0, 5, 11), max_step=1e-3)[-1]
    assert abs(rho.trace() - 1.0) < 1e-7
    assert np.linalg.eigvalsh(rho.data).min() > -1e-7


# ---------------------------------------------------------------------------
# Magnus closed form


def _axy_block_times(tau, ta, tb, offset=0.0):
    return [offset + x for x in (ta, tb, tau / 2, tau - tb, tau - ta)]


def axy_modulation(tau, ta, tb, n_blocks, offset=0.0):
    times = []
    for k in range(n_blocks):
        times.extend(_axy_block_times(tau, ta, tb, offset + k * tau))
    return dyn.ModulationFunction(tuple(times))


def test_g_function_full_period_no_pulses():
    m = dyn.ModulationFunction(())
    assert abs(dyn.g_function(m, 2.0, np.pi)) < 1e-14


def test_g_function_matches_quadrature():
    rng = np.random.default_rng(3)
    m = dyn.ModulationFunction(tuple(np.sort(rng.uniform(0, 10, 7))))
    nu = 1.3
    t = 9.7
    # dense-segment Gauss-Legendre oracle of the defining integral
    xg, wg = np.polynomial.legendre.leggauss(50)
    cuts = sorted({0.0, t} | {s for s in m.switch_times if s < t})
    val = 0j
    for u, v in zip(cuts[:-1], cuts[1:]):
        ts = 0.5 * (v - u) * xg + 0.5 * (u + v)
        s = m.sign_at(0.5 * (u + v))
        val += 0.5 * (v - u) * np.sum(wg * s * np.exp(-1j * nu * ts))
    assert abs(dyn.g_function(m, nu, t) - nu * val) < 1e-10


def test_magnus_matches_direct_integration():
    rng = np.random.default_rng(5)
    nu = np.array([1.0, np.sqrt(3)])
    etas = np.array([[0.05, -0.03], [0.05, 0.03]])
    d = 10
    t_final = 2 * 2 * np.pi
    m1 = dyn.ModulationFunction(tuple(np.sort(rng.uniform(0, t_final, 5))))
    m2 = dyn.ModulationFunction(tuple(np.sort(rng.uniform(0, t_final, 5))))

    alphas, phi = dyn.magnus_sz_propagator([m1, m2], etas, nu, t_final)
    u_closed = dyn.sz_spin_boson_unitary(alphas, phi, [d, d])

    szs, ams = [], []
    for j in range(2):
        ops = [hb.sigmaz() if j == 0 else hb.qeye(2),
               hb.sigmaz() if j == 1 else hb.qeye(2), hb.qeye(d), hb.qeye(d)]
        szs.append(hb.tensor(ops).data)
    for m in range(2):
        ops = [hb.qeye(2), hb.qeye(2)] + [hb.destroy(d) if k == m else hb.qeye(d) for k in range(2)]
        ams.append(hb.tensor(ops).data)
    parts = [[ams[m] @ szs[j] for m in range(2)] for j in range(2)]

    def make_h(signs):
        def h(t):
            out = np.zeros_like(parts[0][0])
            for j in range(2):
                for m in range(2):
                    out += (signs[j] * etas[j, m] * nu[m] * np.exp(-1j * nu[m] * t)) * parts[j][m]
            return out + out.conj().T
        return h

    segs = [(u, v, make_h(s)) for u, v, s in dyn._merged_segments([m1, m2], t_final)]
    psi0 = hb.tensor_states([
        hb.StateVector((2,), np.array([1, 1]) / np.sqrt(2)),
        hb.StateVector((2,), np.array([1, 1j]) / np.sqrt(2)),
        hb.basis(d, 0), hb.basis(d, 0),
    ])
    psi_num = dyn.propagate_segmented(segs, psi0.data, 0.01)
    psi_cf = u_closed.data @ psi0.data
    fid = abs(np.vdot(psi_num, psi_cf)) ** 2 / (
        np.linalg.norm(psi_num) ** 2 * np.linalg.norm(psi_cf) ** 2
    )
    assert fid > 1 - 1e-8


def test_axy_g_closure_even_blocks():
    # nu*tau = 2*pi*r makes G vanish for even block counts, any (ta, tb)
    nu1 = 1.0
    for r in (1, 2, 3):
        tau = 2 * np.pi * r / nu1
        m = axy_modulation(tau, 0.11 * tau, 0.27 * tau, 4)
        assert abs(dyn.g_function(m, nu1, 4 * tau)) < 1e-12


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck


def test_ou_zero_diffusion_decays():
    p = dyn.OUProcess(tau=1e-3, c_d=0.0, seed=1, dt=1e-5, x0=2.0)
    ts, xs = dyn.ou_trajectory(p, 5e-3)
    assert xs[0] == 2.0
    assert np.allclose(xs, 2.0 * np.exp(-ts / p.tau), atol=1e-12)


def test_ou_stationary_variance():
    tau, c_d = 50e-6, 4e8
    target = c_d * tau / 2
    samples = []
    for seed in range(400):
        p = dyn.OUProcess(tau=tau, c_d=c_d, seed=seed, dt=5e-6)
        _, xs = dyn.ou_trajectory(p, 50 * tau)
        samples.append(xs[::10])
    var = np.var(np.concatenate(samples))
    assert abs(var - target) / target < 0.03


def test_ou_seed_reproducible():
    p = dyn.OUProcess(tau=1e-3, c_d=1e6, seed=42, dt=1e-5)
    _, a = dyn.ou_trajectory(p, 1e-2)
    _, b = dyn.ou_trajectory(p, 1e-2)
    assert np.array_equal(a, b)


def test_ou_dt_guard():
    with pytest.raises(ValueError):
        dyn.OUProcess(tau=1e-6, c_d=1.0, dt=1e-5)


def test_ou_dephasing_t2_calibration():
    # frequency noise X(t) on a qubit: coherence <exp(i phi)> should decay
    # with fitted time constant near the requested T2 (within 15%)
    tau_b, t2 = 50e-6, 3e-3
    c_d = dyn.ou_diffusion_for_t2(tau_b, t2)
    dt = 5e-6
    tmax = 4 * t2
    n_traj = 300
    acc = None
    for seed in range(n_traj):
        p = dyn.OUProcess(tau=tau_b, c_d=c_d, seed=seed, dt=dt)
        _, xs = dyn.ou_trajectory(p, tmax)
        phase = np.cumsum(xs) * dt
        val = np.exp(1j * phase)
        acc = val if acc is None else acc + val
    coh = np.abs(acc) / n_traj
    ts = np.arange(len(coh)) * dt
    # fit log decay over the first 1.5*T2 where statistics are solid
    mask = (ts > 0.2e-3) & (ts < 1.5 * t2) & (coh > 0.05)
    slope = np.polyfit(ts[mask], np.log(coh[mask]), 1)[0]
    fitted_t2 = -1.0 / slope
    assert abs(fitted_t2 - t2) / t2 < 0.15
