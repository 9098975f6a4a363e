"""Dense finite-dimensional quantum objects over composite qubit/Fock spaces.

Everything downstream (gates, Rabi models, NV spectra) builds its Hamiltonians
and states from these types. Matrices are dense complex128 throughout: the
largest systems in this package stay near 10^4 dimensions where dense wins on
simplicity. Fock truncations are explicit and validated by tail-weight checks.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-10
PSD_TOL = -1e-8


def _as_dims(dims) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 1 for d in out):
        raise ValueError(f"invalid subsystem dimensions {dims!r}")
    return out


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclasses.dataclass(frozen=True)
class Operator:
    """Square complex matrix on a tensor product of subsystems."""

    dims: tuple[int, ...]
    data: np.ndarray

    def __init__(self, dims, data):
        dims = _as_dims(dims)
        data = np.ascontiguousarray(data, dtype=np.complex128)
        n = int(np.prod(dims))
        if data.shape != (n, n):
            raise ValueError(f"matrix shape {data.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", _freeze(data))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T)) <= tol)

    def is_unitary(self, tol: float = HERMITICITY_TOL) -> bool:
        eye = np.eye(self.dim)
        return bool(np.max(np.abs(self.data.conj().T @ self.data - eye)) <= tol)

    def dag(self) -> "Operator":
        return Operator(self.dims, self.data.conj().T)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.dims, self.data @ other.data)
        if isinstance(other, StateVector):
            return StateVector(self.dims, self.data @ other.data, normalized=False)
        return NotImplemented

    def __add__(self, other):
        return Operator(self.dims, self.data + other.data)

    def __sub__(self, other):
        return Operator(self.dims, self.data - other.data)

    def __mul__(self, scalar):
        return Operator(self.dims, self.data * scalar)

    __rmul__ = __mul__


@dataclasses.dataclass(frozen=True)
class StateVector:
    """Pure state; norm 1 unless explicitly flagged unnormalized.

    Lossy (non-Hermitian) evolutions shrink the norm on purpose, so the flag
    is part of the type instead of a silent renormalization.
    """

    dims: tuple[int, ...]
    data: np.ndarray
    normalized: bool = True

    def __init__(self, dims, data, normalized: bool = True):
        dims = _as_dims(dims)
        data = np.ascontiguousarray(data, dtype=np.complex128).ravel()
        n = int(np.prod(dims))
        if data.shape != (n,):
            raise ValueError(f"vector length {data.shape} does not match dims {dims}")
        if normalized and abs(np.linalg.norm(data) - 1.0) > NORM_TOL:
            raise ValueError("state norm deviates from 1; pass normalized=False")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", _freeze(data))
        object.__setattr__(self, "normalized", normalized)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def to_density_matrix(self) -> "DensityMatrix":
        v = self.data / np.linalg.norm(self.data)
        return DensityMatrix(self.dims, np.outer(v, v.conj()))


@dataclasses.dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive-semidefinite matrix; trace may drop below 1 for lossy runs."""

    dims: tuple[int, ...]
    data: np.ndarray

    def __init__(self, dims, data, check: bool = True):
        dims = _as_dims(dims)
        data = np.ascontiguousarray(data, dtype=np.complex128)
        n = int(np.prod(dims))
        if data.shape != (n, n):
            raise ValueError(f"matrix shape {data.shape} does not match dims {dims}")
        if check:
            if np.max(np.abs(data - data.conj().T)) > HERMITICITY_TOL:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(data).real
            if tr > 1.0 + 1e-10:
                raise ValueError(f"density matrix trace {tr} exceeds 1")
            evals = np.linalg.eigvalsh(data)
            if evals.min() < PSD_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {evals.min()}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", _freeze(data))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.data).real)


# ---------------------------------------------------------------------------
# elementary operators


def qeye(dim: int) -> Operator:
    return Operator((dim,), np.eye(dim))


def ladder_ops(dim: int) -> tuple[Operator, Operator]:
    """Truncated-Fock annihilation and creation operators (a, a†)."""
    if dim < 2:
        raise ValueError("Fock space needs dim >= 2")
    a = np.zeros((dim, dim), dtype=np.complex128)
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return Operator((dim,), a), Operator((dim,), a.conj().T)


def destroy(dim: int) -> Operator:
    return ladder_ops(dim)[0]


def create(dim: int) -> Operator:
    return ladder_ops(dim)[1]


def number(dim: int) -> Operator:
    return Operator((dim,), np.diag(np.arange(dim, dtype=np.complex128)))


def sigmax() -> Operator:
    return Operator((2,), np.array([[0, 1], [1, 0]], dtype=np.complex128))


def sigmay() -> Operator:
    return Operator((2,), np.array([[0, -1j], [1j, 0]], dtype=np.complex128))


def sigmaz() -> Operator:
    return Operator((2,), np.array([[1, 0], [0, -1]], dtype=np.complex128))


def sigmap() -> Operator:
    """sigma_+ = |e><g| in the (|e>, |g>) ordering used throughout."""
    return Operator((2,), np.array([[0, 1], [0, 0]], dtype=np.complex128))


def sigmam() -> Operator:
    return Operator((2,), np.array([[0, 0], [1, 0]], dtype=np.complex128))


def spin1_ops() -> dict[str, Operator]:
    """NV ground-triplet operators in the (|1>, |0>, |-1>) basis.

    S_z = |1><1| - |-1><-1| and S_x couples |0> to both |±1>; these are the
    operators entering the NV Hamiltonian, not the generic spin-1 algebra
    normalization.
    """
    sz = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
    sx = np.zeros((3, 3), dtype=np.complex128)
    sx[0, 1] = sx[1, 0] = sx[2, 1] = sx[1, 2] = 1.0 / math.sqrt(2.0)
    sy = np.zeros((3, 3), dtype=np.complex128)
    sy[0, 1] = -1j / math.sqrt(2.0)
    sy[1, 0] = 1j / math.sqrt(2.0)
    sy[1, 2] = -1j / math.sqrt(2.0)
    sy[2, 1] = 1j / math.sqrt(2.0)
    return {
        "z": Operator((3,), sz),
        "x": Operator((3,), sx),
        "y": Operator((3,), sy),
    }


def tensor(ops: list[Operator] | tuple[Operator, ...]) -> Operator:
    """Kronecker product with concatenated dims; associative by construction."""
    if not ops:
        raise ValueError("tensor of empty operator list")
    data = ops[0].data
    dims: tuple[int, ...] = ops[0].dims
    for op in ops[1:]:
        data = np.kron(data, op.data)
        dims = dims + op.dims
    return Operator(dims, data)


def tensor_states(states: list[StateVector] | tuple[StateVector, ...]) -> StateVector:
    if not states:
        raise ValueError("tensor of empty state list")
    data = states[0].data
    dims: tuple[int, ...] = states[0].dims
    normalized = states[0].normalized
    for s in states[1:]:
        data = np.kron(data, s.data)
        dims = dims + s.dims
        normalized = normalized and s.normalized
    return StateVector(dims, data, normalized=normalized)


def basis(dim: int, n: int) -> StateVector:
    if not 0 <= n < dim:
        raise ValueError(f"basis index {n} outside dimension {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[n] = 1.0
    return StateVector((dim,), v)


# ---------------------------------------------------------------------------
# states


def thermal_state(nbar: float, dim: int, tail_tol: float = 1e-6) -> DensityMatrix:
    """Thermal Fock-diagonal state p_n = nbar^n/(nbar+1)^(n+1), renormalized.

    Rejects truncations whose discarded tail weight exceeds ``tail_tol``; the
    accuracy of every spin-boson run here hinges on that tail.
    """
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    if nbar == 0:
        p = np.zeros(dim)
        p[0] = 1.0
        return DensityMatrix((dim,), np.diag(p).astype(np.complex128))
    ns = np.arange(dim)
    logp = ns * math.log(nbar) - (ns + 1) * math.log(nbar + 1.0)
    p = np.exp(logp)
    tail = 1.0 - p.sum()
    if tail > tail_tol:
        raise ValueError(
            f"thermal tail weight {tail:.3e} above {tail_tol:.1e}; increase dim"
        )
    p = p / p.sum()
    return DensityMatrix((dim,), np.diag(p).astype(np.complex128))


def coherent_state(alpha: complex, dim: int, tail_tol: float = 1e-8) -> StateVector:
    """Coherent state c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!)."""
    ns = np.arange(dim)
    if alpha == 0:
        return basis(dim, 0)
    # log-domain for |alpha|^2 up to ~50 without overflow
    logmag = -abs(alpha) ** 2 / 2.0 + ns * math.log(abs(alpha)) - 0.5 * np.array(
        [math.lgamma(n + 1) for n in range(dim)]
    )
    phases = np.exp(1j * ns * np.angle(alpha))
    c = np.exp(logmag) * phases
    tail = 1.0 - float(np.vdot(c, c).real)
    if tail > tail_tol:
        raise ValueError(
            f"coherent tail weight {tail:.3e} above {tail_tol:.1e}; increase dim"
        )
    return StateVector((dim,), c / np.linalg.norm(c))


def state_fidelity(s1: StateVector, s2: StateVector) -> float:
    """|<s1|s2>|^2 / (<s1|s1><s2|s2>); tolerates unnormalized inputs."""
    if s1.dims != s2.dims:
        raise ValueError(f"dims mismatch {s1.dims} vs {s2.dims}")
    n1 = np.vdot(s1.data, s1.data).real
    n2 = np.vdot(s2.data, s2.data).real
    if n1 == 0 or n2 == 0:
        raise ValueError("fidelity of a zero vector is undefined")
    return float(abs(np.vdot(s1.data, s2.data)) ** 2 / (n1 * n2))


def expect(op: Operator, state: StateVector | DensityMatrix) -> complex:
    if isinstance(state, StateVector):
        v = state.data
        val = np.vdot(v, op.data @ v) / np.vdot(v, v)
    else:
        val = np.trace(op.data @ state.data)
    return complex(val)


def ptrace(state: StateVector | DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix over the subsystems in ``keep`` (indices)."""
    keep = sorted(int(k) for k in (keep if np.iterable(keep) else [keep]))
    dims = state.dims
    nsub = len(dims)
    if any(not 0 <= k < nsub for k in keep):
        raise ValueError(f"keep indices {keep} out of range for dims {dims}")
    if isinstance(state, StateVector):
        rho = np.outer(state.data, state.data.conj())
        tr = np.vdot(state.data, state.data).real
        if tr > 0:
            rho = rho / tr
    else:
        rho = state.data
    full = rho.reshape(dims + dims)
    drop = [i for i in range(nsub) if i not in keep]
    for off, i in enumerate(drop):
        ax = i - sum(1 for d in drop[:off] if d < i)
        n_now = full.ndim // 2
        full = np.trace(full, axis1=ax, axis2=ax + n_now)
    kept = tuple(dims[k] for k in keep)
    n = int(np.prod(kept))
    return DensityMatrix(kept, full.reshape(n, n), check=False)
