import math

import numpy as np
import pytest

from weylsim import fockspace as fs
from weylsim.errors import DomainError, NonHermitianError, TruncationError
from weylsim.fockspace import SingleModeSpec, SpaceSpec


# --- independent oracles ----------------------------------------------------


def coherent_amps_oracle(alpha, dim):
    """Direct Fock sum c_n = e^{-|a|^2/2} a^n / sqrt(n!), renormalized."""
    n = np.arange(dim)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    c = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(fact)
    return c / np.linalg.norm(c)


def lowering_expect_oracle(c):
    """<a> of a single-mode state by explicit Fock sum."""
    return sum(
        np.conj(c[n]) * c[n + 1] * math.sqrt(n + 1) for n in range(len(c) - 1)
    )


def ptrace_spin_oracle(vec, m):
    """Motional density matrix by explicit index contraction."""
    psi = vec.reshape(2, m)
    out = np.zeros((m, m), dtype=complex)
    for s in range(2):
        out += np.outer(psi[s], psi[s].conj())
    return out


# --- mode operators ----------------------------------------------------------


def test_lowering_matrix_elements(space):
    a = fs.mode_lowering(space, "x").matrix
    ket = fs.basis_state(space, "plus_z", 1, 0).data
    bra = fs.basis_state(space, "plus_z", 0, 0).data
    assert abs(np.vdot(bra, a @ ket) - 1.0) < 1e-14
    ket4 = fs.basis_state(space, "plus_z", 4, 0).data
    bra3 = fs.basis_state(space, "plus_z", 3, 0).data
    assert abs(np.vdot(bra3, a @ ket4) - 2.0) < 1e-14


def test_commutator_truncation_identity(space):
    # [a, a^dag] = 1 - (n_max + 1)|n_max><n_max| on the truncated mode
    for mode in ("x", "y"):
        a = fs.mode_lowering(space, mode)
        comm = (a @ a.dagger() - a.dagger() @ a).matrix
        nm = space.n_max(mode)
        edge = fs.basis_state(
            space, "plus_z", *((nm, 0) if mode == "x" else (0, nm))
        ).data
        expected = np.eye(space.dim) - (nm + 1) * _edge_projector(space, mode, nm)
        assert np.abs(comm - expected).max() < 1e-12
        assert abs(np.vdot(edge, comm @ edge) + nm) < 1e-12


def _edge_projector(space, mode, level):
    dx, dy = space.mode_dims
    p1 = np.zeros((dx if mode == "x" else dy,) * 2)
    p1[level, level] = 1.0
    if mode == "x":
        return np.kron(np.eye(2), np.kron(p1, np.eye(dy)))
    return np.kron(np.eye(2), np.kron(np.eye(dx), p1))


def test_quadratures_hermitian_and_canonical(space):
    x = fs.quadrature(space, "x", "position")
    p = fs.quadrature(space, "x", "momentum")
    assert x.hermiticity_defect() < 1e-14
    assert p.hermiticity_defect() < 1e-14
    # [x, p] = i away from the truncation edge
    comm = (x @ p - p @ x).matrix
    interior = []
    for n in range(space.n_max_x):
        v = fs.basis_state(space, "plus_z", n, 0).data
        interior.append(np.vdot(v, comm @ v))
    assert np.abs(np.array(interior) - 1j).max() < 1e-12


def test_vacuum_position_mean(space):
    x = fs.quadrature(space, "x", "position")
    vac = fs.coherent_state(space, 0, 0, "plus_z")
    assert abs(fs.expectation(x, vac)) < 1e-14


def test_coherent_position_against_fock_sum_oracle(space):
    alpha = 1 / math.sqrt(2)
    st = fs.coherent_state(space, alpha, 0, "plus_z")
    got = fs.expectation(fs.quadrature(space, "x", "position"), st)
    c = coherent_amps_oracle(alpha, space.n_max_x + 1)
    want = math.sqrt(2) * lowering_expect_oracle(c).real
    assert abs(got - want) < 1e-12
    assert abs(got - 1.0) < 1e-9


def test_pauli_conventions(space):
    sz = fs.pauli(space, "z")
    up = fs.basis_state(space, "plus_z", 0, 0)
    assert abs(fs.expectation(sz, up) - 1.0) < 1e-14
    sx = fs.pauli(space, "x")
    assert np.abs((sx @ sx).matrix - np.eye(space.dim)).max() < 1e-14
    sp, sm = fs.pauli(space, "plus"), fs.pauli(space, "minus")
    anti = (sp @ sm + sm @ sp).matrix
    assert np.abs(anti - np.eye(space.dim)).max() < 1e-14
    # sigma_plus |-z> = |+z>
    down = fs.basis_state(space, "minus_z", 0, 0).data
    assert np.abs(sp.matrix @ down - up.data).max() < 1e-14


# --- coherent states ---------------------------------------------------------


def test_coherent_vacuum_is_exact(space):
    st = fs.coherent_state(space, 0, 0, "plus_z")
    want = fs.basis_state(space, "plus_z", 0, 0).data
    assert np.abs(st.data - want).max() == 0.0


def test_coherent_momentum_mean(space):
    st = fs.coherent_state(space, 1j / math.sqrt(2), 0, "plus_z")
    px = fs.quadrature(space, "x", "momentum")
    assert abs(fs.expectation(px, st) - 1.0) < 1e-6


def test_coherent_occupation_oracle(space):
    st = fs.coherent_state(space, 1j, 0, "plus_z")
    n_op = fs.number_operator(space, "x")
    assert abs(fs.expectation(n_op, st) - 1.0) < 1e-6
    st2 = fs.coherent_state(space, 0.5j, 0, "plus_z")
    assert abs(fs.expectation(n_op, st2) - 0.25) < 1e-6


def test_coherent_guard_and_leakage(space):
    with pytest.raises(TruncationError):
        fs.coherent_state(space, 2.1, 0)  # |alpha|^2 = 4.41 > 15/4
    # strongest in-range amplitude keeps the discarded tail tiny
    assert fs.coherent_leakage(1.68, space.n_max_x) < 1e-6
    st = fs.coherent_state(space, 1.68, 0)
    assert abs(np.linalg.norm(st.data) - 1.0) < 1e-12


def test_single_mode_coherent(sm_space):
    st = fs.single_mode_coherent(sm_space, 1j, "plus_z")
    n_op = fs.number_operator(sm_space, "x")
    assert abs(fs.expectation(n_op, st) - 1.0) < 1e-9


# --- spin rotations and reset -------------------------------------------------


def test_rotation_identity_at_zero_angle(space):
    st = fs.coherent_state(space, 0.3, 0.2j, "plus_x")
    out = fs.spin_rotation(st, "y", 0.0)
    assert np.abs(out.data - st.data).max() < 1e-15


def test_rotation_minus_z_to_plus_x(space):
    st = fs.basis_state(space, "minus_z", 0, 0)
    out = fs.spin_rotation(st, "y", -math.pi / 2)
    assert abs(fs.expectation(fs.pauli(space, "x"), out) - 1.0) < 1e-12


def test_two_pi_rotation_restores_z(space):
    st = fs.basis_state(space, "plus_z", 0, 0)
    out = fs.spin_rotation(fs.spin_rotation(st, "x", math.pi), "x", math.pi)
    assert abs(fs.expectation(fs.pauli(space, "z"), out) - 1.0) < 1e-12


def test_spin_reset_preserves_motional_state(space):
    st = fs.coherent_state(space, 0.7j, 0.2, "plus_z")
    x_op = fs.quadrature(space, "x", "position")
    px_op = fs.quadrature(space, "x", "momentum")
    before = (fs.expectation(x_op, st), fs.expectation(px_op, st))
    out = fs.spin_reset(st)
    assert out.kind == "mixed"
    assert abs(fs.expectation(fs.pauli(space, "z"), out) + 1.0) < 1e-12
    after = (fs.expectation(x_op, out), fs.expectation(px_op, out))
    assert abs(before[0] - after[0]) < 1e-10
    assert abs(before[1] - after[1]) < 1e-10


def test_spin_reset_entangled_purity_oracle(small_space):
    # spin-motion entangled state: (|+z>|alpha> + |-z>|-alpha>)/norm
    a = fs.coherent_state(small_space, 0.8, 0, "plus_z").data
    b = fs.coherent_state(small_space, -0.8, 0, "minus_z").data
    vec = (a + b) / np.linalg.norm(a + b)
    st = fs.QState("pure", vec, small_space)
    out = fs.spin_reset(st)
    m = small_space.dim // 2
    rho_m_oracle = ptrace_spin_oracle(vec, m)
    purity_oracle = np.trace(rho_m_oracle @ rho_m_oracle).real
    rho_m_out = fs.reduced_motional(out)
    purity_out = np.trace(rho_m_out @ rho_m_out).real
    assert abs(purity_out - purity_oracle) < 1e-12
    assert np.abs(rho_m_out - rho_m_oracle).max() < 1e-12


# --- expectation -------------------------------------------------------------


def test_expectation_identity_and_orthogonal_spin(space):
    st = fs.coherent_state(space, 0.5, 0.5j, "plus_x")
    assert abs(fs.expectation(fs.identity(space), st) - 1.0) < 1e-12
    assert abs(fs.expectation(fs.pauli(space, "z"), st)) < 1e-12


def test_expectation_rejects_non_hermitian(space):
    a = fs.mode_lowering(space, "x")
    st = fs.coherent_state(space, 0.5, 0)
    with pytest.raises(NonHermitianError):
        fs.expectation(a, st)


def test_expectation_linearity_and_symmetry(small_space, rng):
    dim = small_space.dim
    for _ in range(5):
        h1 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h1 = fs.LinOp(h1 + h1.conj().T, small_space)
        h2 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h2 = fs.LinOp(h2 + h2.conj().T, small_space)
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        st = fs.QState("pure", v / np.linalg.norm(v), small_space)
        lhs = fs.expectation(2.0 * h1 + (-0.5) * h2, st)
        rhs = 2.0 * fs.expectation(h1, st) - 0.5 * fs.expectation(h2, st)
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))
        # Hermitian matrix elements are conjugate symmetric across states
        w = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        w = w / np.linalg.norm(w)
        lhs_c = np.vdot(st.data, h1.matrix @ w)
        rhs_c = np.conj(np.vdot(w, h1.matrix @ st.data))
        assert abs(lhs_c - rhs_c) < 1e-9 * max(1.0, abs(lhs_c))


def test_state_validation():
    space = SpaceSpec(2, 2)
    with pytest.raises(DomainError):
        fs.QState("pure", np.ones(space.dim), space)  # unnormalized
    with pytest.raises(DomainError):
        fs.QState("mixed", np.eye(space.dim), space)  # trace != 1
    with pytest.raises(DomainError):
        SpaceSpec(0, 3)
    with pytest.raises(DomainError):
        SingleModeSpec(0)


def test_values_are_immutable(space):
    st = fs.coherent_state(space, 0.5, 0)
    with pytest.raises(ValueError):
        st.data[0] = 1.0
    op = fs.pauli(space, "x")
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5.0
