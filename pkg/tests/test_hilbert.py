import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lightmatter import hilbert as hb


def test_ladder_two_level():
    a, adag = hb.ladder_ops(2)
    assert np.allclose(a.data, [[0, 1], [0, 0]])
    assert np.allclose(adag.data, [[0, 0], [1, 0]])


def test_number_operator_eigenvalue():
    a, adag = hb.ladder_ops(4)
    n = adag.data @ a.data
    v = hb.basis(4, 3).data
    assert np.allclose(n @ v, 3 * v)


def test_ladder_commutator_truncation():
    a, adag = hb.ladder_ops(20)
    comm = a.data @ adag.data - adag.data @ a.data
    expected = np.eye(20)
    expected[-1, -1] = -19.0
    assert np.allclose(comm, expected, atol=1e-12)


def test_ladder_number_expectation_exact():
    dim = 9
    a, adag = hb.ladder_ops(dim)
    n = adag.data @ a.data
    for k in range(dim - 1):
        v = hb.basis(dim, k).data
        # product of correctly-rounded sqrt entries: exact to 1 ulp
        assert np.vdot(v, n @ v).real == pytest.approx(k, rel=5e-16, abs=0)
    # the dedicated number operator is exactly integer-valued
    assert np.array_equal(np.diag(hb.number(dim).data).real, np.arange(dim))


def test_ladder_rejects_small_dim():
    with pytest.raises(ValueError):
        hb.ladder_ops(1)


def test_tensor_sigmaz_identity():
    t = hb.tensor([hb.sigmaz(), hb.qeye(2)])
    assert np.allclose(t.data, np.diag([1, 1, -1, -1]))
    assert t.dims == (2, 2)


def test_tensor_identity_absorbs():
    t = hb.tensor([hb.qeye(3), hb.qeye(2)])
    assert np.allclose(t.data, np.eye(6))


def test_tensor_matches_index_arithmetic():
    sx = hb.sigmax()
    a = hb.destroy(3)
    t = hb.tensor([sx, a]).data
    # independent oracle: element-by-element Kronecker indexing
    for i in range(6):
        for j in range(6):
            i1, i2 = divmod(i, 3)
            j1, j2 = divmod(j, 3)
            assert t[i, j] == sx.data[i1, j1] * a.data[i2, j2]


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 10 ** 6))
def test_tensor_product_homomorphism(d1, d2, seed):
    rng = np.random.default_rng(seed)

    def rand(d):
        return hb.Operator((d,), rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))

    a, b, c, d = rand(d1), rand(d2), rand(d1), rand(d2)
    left = hb.tensor([a, b]) @ hb.tensor([c, d])
    right = hb.tensor([a @ c, b @ d])
    assert np.max(np.abs(left.data - right.data)) < 1e-12 * max(1, np.max(np.abs(right.data)))


def test_thermal_zero_temperature():
    rho = hb.thermal_state(0.0, 6)
    expected = np.zeros((6, 6))
    expected[0, 0] = 1.0
    assert np.allclose(rho.data, expected)


def test_thermal_ground_population():
    rho = hb.thermal_state(0.2, 10)
    assert abs(rho.data[0, 0].real - 1 / 1.2) < 1e-4


def test_thermal_mean_occupation():
    rho = hb.thermal_state(1.0, 30)
    n = hb.number(30)
    assert abs(hb.expect(n, rho).real - 1.0) < 1e-6


def test_thermal_trace_renormalized():
    for nbar in (0.2, 0.7, 1.0):
        rho = hb.thermal_state(nbar, 40)
        assert abs(rho.trace() - 1.0) < 1e-12


def test_thermal_tail_guard():
    with pytest.raises(ValueError):
        hb.thermal_state(5.0, 4)


def test_coherent_vacuum():
    psi = hb.coherent_state(0.0, 5)
    assert np.allclose(psi.data, hb.basis(5, 0).data)


def test_coherent_poisson_mean():
    psi = hb.coherent_state(1.0, 20)
    n = hb.number(20)
    assert abs(hb.expect(n, psi).real - 1.0) < 1e-8


def test_coherent_large_alpha_mean():
    psi = hb.coherent_state(np.sqrt(30), 100)
    n = hb.number(100)
    assert abs(hb.expect(n, psi).real - 30.0) < 1e-6


def test_coherent_tail_guard():
    with pytest.raises(ValueError):
        hb.coherent_state(3.0, 5)


def test_fidelity_identical():
    psi = hb.basis(4, 0)
    assert hb.state_fidelity(psi, psi) == pytest.approx(1.0)


def test_fidelity_orthogonal():
    assert hb.state_fidelity(hb.basis(4, 0), hb.basis(4, 1)) == pytest.approx(0.0)


def test_fidelity_unnormalized_inputs():
    s1 = hb.StateVector((2,), [2.0, 0.0], normalized=False)
    s2 = hb.StateVector((2,), [1.0, 1.0], normalized=False)
    assert hb.state_fidelity(s1, s2) == pytest.approx(0.5)


def test_fidelity_zero_vector_rejected():
    z = hb.StateVector((2,), [0.0, 0.0], normalized=False)
    with pytest.raises(ValueError):
        hb.state_fidelity(z, hb.basis(2, 0))


def test_ptrace_product_state():
    psi = hb.tensor_states([hb.basis(2, 0), hb.coherent_state(1.0, 12)])
    red = hb.ptrace(psi, [0])
    assert np.allclose(red.data, [[1, 0], [0, 0]], atol=1e-12)


def test_ptrace_bell_state():
    bell = hb.StateVector((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))
    red = hb.ptrace(bell, [1])
    assert np.allclose(red.data, np.eye(2) / 2, atol=1e-12)


def test_operator_hermiticity_check():
    assert hb.sigmay().is_hermitian()
    assert not hb.Operator((2,), [[0, 1], [0, 0]]).is_hermitian()


def test_spin1_nv_operators():
    ops = hb.spin1_ops()
    assert np.allclose(ops["z"].data, np.diag([1, 0, -1]))
    # S_x couples |0> (index 1) to both |±1> with 1/sqrt(2)
    assert ops["x"].data[0, 1] == pytest.approx(1 / np.sqrt(2))
    assert ops["x"].is_hermitian()
    assert ops["y"].is_hermitian()
