"""Composite Hilbert space of one qubit and truncated oscillator modes.

Conventions, fixed once and used everywhere:

* spin basis ordering is (|+z>, |-z>), so sigma_z = diag(+1, -1) and
  sigma_plus maps |-z> to |+z>;
* tensor order is qubit (x) mode-x (x) mode-y (or qubit (x) mode for the
  single-mode space);
* quadratures are x = (a + a^dag)/sqrt(2) and p = i(a^dag - a)/sqrt(2),
  so a coherent state |alpha> has <x> = sqrt(2) Re(alpha) and
  <p> = sqrt(2) Im(alpha).

All values are immutable after construction; operators and states can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonHermitianError, TruncationError

SPIN_LABELS = ("plus_z", "minus_z", "plus_x", "minus_x")

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}

_SPIN_VECS = {
    "plus_z": np.array([1, 0], dtype=complex),
    "minus_z": np.array([0, 1], dtype=complex),
    "plus_x": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "minus_x": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def _frozen(arr: np.ndarray) -> np.ndarray:
    """Read-only view; copies first unless the array is already frozen."""
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpaceSpec:
    """Truncation sizes of the two oscillator modes.

    The composite dimension is 2 * (n_max_x + 1) * (n_max_y + 1).
    """

    n_max_x: int = 15
    n_max_y: int = 15

    def __post_init__(self):
        if self.n_max_x < 1 or self.n_max_y < 1:
            raise DomainError("mode truncations must satisfy n_max >= 1")

    @property
    def modes(self) -> tuple[str, ...]:
        return ("x", "y")

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return (self.n_max_x + 1, self.n_max_y + 1)

    @property
    def dim(self) -> int:
        return 2 * (self.n_max_x + 1) * (self.n_max_y + 1)

    def n_max(self, mode: str) -> int:
        return {"x": self.n_max_x, "y": self.n_max_y}[mode]


@dataclass(frozen=True)
class SingleModeSpec:
    """Qubit plus a single truncated mode, used by the transformed model."""

    n_max: int = 31

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("mode truncation must satisfy n_max >= 1")

    @property
    def modes(self) -> tuple[str, ...]:
        return ("x",)

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return (self.n_max + 1,)

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


AnySpace = SpaceSpec | SingleModeSpec


@dataclass(frozen=True, eq=False)
class LinOp:
    """Dense complex operator on a composite space.

    Equality and hashing are by identity; the matrix payload is frozen, so
    instances can be shared and memoized freely.
    """

    matrix: np.ndarray
    space: AnySpace

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise DomainError(
                f"operator shape {m.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.space.dim

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigendecomposition of a Hermitian operator, memoized per instance."""
        cached = self.__dict__.get("_eigh")
        if cached is None:
            cached = np.linalg.eigh(self.matrix)
            self.__dict__["_eigh"] = cached
        return cached

    def dagger(self) -> "LinOp":
        return LinOp(self.matrix.conj().T.copy(), self.space)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def _check_space(self, other: "LinOp"):
        if other.space != self.space:
            raise DomainError("operators live on different spaces")

    def __add__(self, other: "LinOp") -> "LinOp":
        self._check_space(other)
        return LinOp(self.matrix + other.matrix, self.space)

    def __sub__(self, other: "LinOp") -> "LinOp":
        self._check_space(other)
        return LinOp(self.matrix - other.matrix, self.space)

    def __matmul__(self, other: "LinOp") -> "LinOp":
        self._check_space(other)
        return LinOp(self.matrix @ other.matrix, self.space)

    def __mul__(self, scalar: complex) -> "LinOp":
        return LinOp(self.matrix * scalar, self.space)

    __rmul__ = __mul__

    def __neg__(self) -> "LinOp":
        return LinOp(-self.matrix, self.space)


@dataclass(frozen=True, eq=False)
class QState:
    """Pure state vector or density matrix on a composite space."""

    kind: str  # "pure" | "mixed"
    data: np.ndarray
    space: AnySpace

    def __post_init__(self):
        d = self.space.dim
        arr = np.asarray(self.data, dtype=complex)
        if self.kind == "pure":
            if arr.shape != (d,):
                raise DomainError(f"pure state must be a vector of length {d}")
            norm = np.linalg.norm(arr)
            if abs(norm - 1.0) > 1e-9:
                raise DomainError(f"pure state norm {norm} deviates from 1")
        elif self.kind == "mixed":
            if arr.shape != (d, d):
                raise DomainError(f"density matrix must be {d}x{d}")
            tr = np.trace(arr)
            if abs(tr - 1.0) > 1e-9:
                raise DomainError(f"density matrix trace {tr} deviates from 1")
            if np.abs(arr - arr.conj().T).max() > 1e-9:
                raise DomainError("density matrix is not Hermitian")
            if np.linalg.eigvalsh(arr).min() < -1e-8:
                raise DomainError("density matrix has a negative eigenvalue")
        else:
            raise DomainError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "data", _frozen(arr))

    def to_density(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)


# ---------------------------------------------------------------------------
# elementary operators
# ---------------------------------------------------------------------------


def _mode_index(space: AnySpace, mode: str) -> int:
    if mode not in space.modes:
        raise DomainError(f"mode {mode!r} not in space modes {space.modes}")
    return space.modes.index(mode)


@lru_cache(maxsize=None)
def _lowering_1m(d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        m[n - 1, n] = np.sqrt(n)
    return _frozen(m)


@lru_cache(maxsize=None)
def _embedded(space: AnySpace, which: str, mode: str | None) -> np.ndarray:
    """Operator on one tensor factor, padded with identities elsewhere."""
    dims = space.mode_dims
    if which.startswith("pauli_"):
        factors = [_PAULI[which[6:]]] + [np.eye(d, dtype=complex) for d in dims]
    else:
        k = _mode_index(space, mode)
        base = _lowering_1m(dims[k])
        if which == "lower":
            m1 = base
        elif which == "number":
            m1 = base.conj().T @ base
        elif which == "position":
            m1 = (base + base.conj().T) / np.sqrt(2)
        elif which == "momentum":
            m1 = 1j * (base.conj().T - base) / np.sqrt(2)
        else:
            raise DomainError(f"unknown operator kind {which!r}")
        factors = [np.eye(2, dtype=complex)] + [
            m1 if i == k else np.eye(d, dtype=complex) for i, d in enumerate(dims)
        ]
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return _frozen(out)


def mode_lowering(space: AnySpace, mode: str = "x") -> LinOp:
    """Annihilation operator of one mode, <n-1|a|n> = sqrt(n)."""
    return LinOp(_embedded(space, "lower", mode), space)


def number_operator(space: AnySpace, mode: str = "x") -> LinOp:
    """Occupation operator a^dag a of one mode."""
    return LinOp(_embedded(space, "number", mode), space)


def quadrature(space: AnySpace, mode: str = "x", which: str = "position") -> LinOp:
    """Hermitian position or momentum quadrature of one mode."""
    if which not in ("position", "momentum"):
        raise DomainError(f"unknown quadrature {which!r}")
    return LinOp(_embedded(space, which, mode), space)


def pauli(space: AnySpace, axis: str) -> LinOp:
    """Qubit operator sigma_axis (or raising/lowering) on the composite space."""
    if axis not in _PAULI:
        raise DomainError(f"unknown axis {axis!r}")
    return LinOp(_embedded(space, "pauli_" + axis, None), space)


def identity(space: AnySpace) -> LinOp:
    return LinOp(np.eye(space.dim, dtype=complex), space)


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


def spin_vector(spin: str) -> np.ndarray:
    if spin not in _SPIN_VECS:
        raise DomainError(f"unknown spin label {spin!r}")
    return np.array(_SPIN_VECS[spin])


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Truncated, renormalized coherent-state Fock amplitudes."""
    c = np.zeros(dim, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c / np.linalg.norm(c)


def coherent_leakage(alpha: complex, n_max: int) -> float:
    """Squared-norm weight of a coherent state beyond Fock level n_max."""
    c = np.zeros(n_max + 1, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, n_max + 1):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return float(max(0.0, 1.0 - np.sum(np.abs(c) ** 2)))


def _guard_alpha(alpha: complex, n_max: int, mode: str):
    if abs(alpha) ** 2 > n_max / 4:
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha)**2:.3f} exceeds n_max/4 = {n_max/4:.3f} "
            f"on mode {mode}; raise the truncation"
        )


def coherent_state(
    space: SpaceSpec, alpha_x: complex, alpha_y: complex, spin: str = "plus_z"
) -> QState:
    """Product state |spin>|alpha_x>|alpha_y> on the two-mode space."""
    _guard_alpha(alpha_x, space.n_max_x, "x")
    _guard_alpha(alpha_y, space.n_max_y, "y")
    vec = np.kron(
        spin_vector(spin),
        np.kron(
            coherent_amplitudes(alpha_x, space.n_max_x + 1),
            coherent_amplitudes(alpha_y, space.n_max_y + 1),
        ),
    )
    return QState("pure", vec, space)


def single_mode_coherent(
    space: SingleModeSpec, alpha: complex, spin: str = "plus_z"
) -> QState:
    """Product state |spin>|alpha> on the single-mode space."""
    _guard_alpha(alpha, space.n_max, "x")
    vec = np.kron(spin_vector(spin), coherent_amplitudes(alpha, space.n_max + 1))
    return QState("pure", vec, space)


def basis_state(space: AnySpace, spin: str, *occupations: int) -> QState:
    """Fock product state |spin>|n_x>(|n_y>)."""
    if len(occupations) != len(space.mode_dims):
        raise DomainError("one occupation number per mode is required")
    vec = spin_vector(spin)
    for n, d in zip(occupations, space.mode_dims):
        if not 0 <= n < d:
            raise DomainError(f"occupation {n} outside truncation {d - 1}")
        e = np.zeros(d, dtype=complex)
        e[n] = 1.0
        vec = np.kron(vec, e)
    return QState("pure", vec, space)


# ---------------------------------------------------------------------------
# spin manipulations and measurement plumbing
# ---------------------------------------------------------------------------


def _motional_dim(space: AnySpace) -> int:
    return space.dim // 2


def _apply_spin_matrix(state: QState, u: np.ndarray) -> QState:
    m = _motional_dim(state.space)
    full = np.kron(u, np.eye(m, dtype=complex))
    if state.kind == "pure":
        return QState("pure", full @ state.data, state.space)
    return QState("mixed", full @ state.data @ full.conj().T, state.space)


def spin_rotation(state: QState, axis: str, angle: float) -> QState:
    """Apply exp(-i angle sigma_axis / 2) to the spin factor only."""
    if axis not in ("x", "y", "z"):
        raise DomainError(f"rotation axis must be x, y or z, got {axis!r}")
    u = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * _PAULI[axis]
    return _apply_spin_matrix(state, u)


def reduced_motional(state: QState) -> np.ndarray:
    """Density matrix of the motional factor, qubit traced out."""
    m = _motional_dim(state.space)
    rho = state.to_density().reshape(2, m, 2, m)
    return np.einsum("smsn->mn", rho)


def reduced_spin(state: QState) -> np.ndarray:
    """2x2 density matrix of the qubit, modes traced out."""
    m = _motional_dim(state.space)
    rho = state.to_density().reshape(2, m, 2, m)
    return np.einsum("smtm->st", rho)


def spin_reset(state: QState, target: str = "minus_z") -> QState:
    """Discard the qubit and re-prepare it, keeping the motional state.

    Returns a mixed state |target><target| (x) Tr_spin(rho); the motional
    reduced state is preserved exactly.
    """
    if target != "minus_z":
        raise DomainError("only reset to minus_z is supported")
    rho_m = reduced_motional(state)
    sv = spin_vector(target)
    rho = np.kron(np.outer(sv, sv.conj()), rho_m)
    return QState("mixed", rho, state.space)


def expectation(obs: LinOp, state: QState) -> float:
    """<psi|O|psi> or Tr(rho O) for a Hermitian observable."""
    if obs.space != state.space:
        raise DomainError("observable and state live on different spaces")
    if obs.hermiticity_defect() > 1e-9:
        raise NonHermitianError("observable is not Hermitian within 1e-9")
    if state.kind == "pure":
        val = np.vdot(state.data, obs.matrix @ state.data)
    else:
        val = np.trace(obs.matrix @ state.data)
    if abs(val.imag) > 1e-9:
        raise NonHermitianError(f"expectation has imaginary residual {val.imag}")
    return float(val.real)
