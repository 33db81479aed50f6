import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given
from hypothesis import strategies as st

from tlsrelax.tls import (
    SPIN1_SCALE, DensityVector, PointerBasis, liouville_matrix, pointer_transform,
    pseudospin_to_vector, rotation_to_green, spin1_generator, vector_to_matrix, vector_to_pseudospin,
)

unit = st.floats(-1.0, 1.0)
angle = st.floats(0.0, 2 * math.pi)


@st.composite
def pseudospins(draw):
    theta = draw(st.floats(0.0, math.pi))
    phi = draw(angle)
    r = draw(st.floats(0.0, 1.0))
    return r * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@given(pseudospins())
def test_density_vector_views_consistent(s):
    d = DensityVector.from_pseudospin(s)
    assert np.allclose(d.pseudospin, s)
    m = d.matrix()
    assert np.allclose(m, m.conj().T)
    assert np.trace(m).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(m).min() >= -1e-12
    assert np.allclose(DensityVector.from_matrix(m).vector, d.vector)
    assert np.allclose(pseudospin_to_vector(s), d.vector)
    assert np.allclose(vector_to_pseudospin(d.vector), s)
    assert np.allclose(vector_to_matrix(d.vector), m)


def test_density_vector_invariants_enforced():
    with pytest.raises(ValueError):
        DensityVector(0.5, 0.0, 0.4)  # rho21 != conj(rho12)
    with pytest.raises(ValueError):
        DensityVector(0.5, 0.5, 0.5)  # |s| > 1
    with pytest.raises(ValueError):
        DensityVector.from_matrix(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        DensityVector.from_matrix([[0.5, 0.1], [0.2, 0.5]])  # not Hermitian


def test_pure_states():
    up = DensityVector.pure(1, 0)
    assert up.r0 == 1 and up.r1 == 0
    plus = DensityVector.pure(1, 1)
    assert plus.rm1 == pytest.approx(0.5)
    assert np.linalg.norm(plus.pseudospin) == pytest.approx(1.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(0.0, 3.0), pseudospins())
def test_liouville_matches_pseudospin_precession(u, v, d0, t, s):
    # ds/dt = s x B in pseudospin form equals dr/dt = A r
    b = np.array([u, v, d0])
    gen = np.array([[0, b[2], -b[1]], [-b[2], 0, b[0]], [b[1], -b[0], 0]])  # s x B = gen @ s
    s_t = sl.expm(gen * t) @ s
    r_t = sl.expm(liouville_matrix(complex(u, v), d0) * t) @ pseudospin_to_vector(s)
    assert np.allclose(pseudospin_to_vector(s_t), r_t, atol=1e-9)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_liouville_is_spin1_generator_in_scaled_basis(u, v, d0):
    s = np.diag(SPIN1_SCALE)
    a = liouville_matrix(complex(u, v), d0)
    assert np.allclose(s @ a @ np.linalg.inv(s), spin1_generator(complex(u, v), d0), atol=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi), st.floats(0.0, 2.0))
def test_green_phase_covariance(u, v, delta, t):
    # rotating the field by delta conjugates G by diag(e^{-i delta}, 1, e^{i delta})
    oc = complex(u, v)
    g0 = sl.expm(liouville_matrix(oc) * t)
    g1 = sl.expm(liouville_matrix(oc * np.exp(1j * delta)) * t)
    m = np.arange(3)[:, None] - np.arange(3)[None, :]
    assert np.allclose(g1, g0 * np.exp(1j * m * delta), atol=1e-10)


def test_rotation_to_green_identity():
    assert np.allclose(rotation_to_green(np.eye(3)), np.eye(3))


@given(angle)
def test_pointer_transform_unitary(phi):
    s = pointer_transform(phi)
    assert np.allclose(s.conj().T @ s, np.eye(2), atol=1e-12)


@given(angle)
def test_pointer_states_diagonalise_initial_coupling(phi):
    basis = PointerBasis(phi)
    plus, minus = basis.states()
    # interaction Hamiltonian with field phase phi: proportional to [[0, e^{-i phi}], [e^{i phi}, 0]]
    h = np.array([[0, np.exp(-1j * phi)], [np.exp(1j * phi), 0]])
    assert np.allclose(h @ plus, plus)
    assert np.allclose(h @ minus, -minus)


@given(angle)
def test_psi_plus_is_diag_one_zero(phi):
    plus, _ = PointerBasis(phi).states()
    rho = np.outer(plus, plus.conj())
    assert np.allclose(PointerBasis(phi).to_pointer(rho), np.diag([1, 0]), atol=1e-12)
