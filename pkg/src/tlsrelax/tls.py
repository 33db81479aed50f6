"""Two-level-system state algebra: density vector, pseudospin, bases."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

#: diagonal of the map r -> psi onto the spin-1 cyclic basis
SPIN1_SCALE = np.array([-SQRT2, 1.0, SQRT2])

# spin-1 matrices in the basis m = 1, 0, -1
SX = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
SY = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / SQRT2
SZ = np.diag([1.0, 0.0, -1.0]).astype(complex)

# r = T s with r = (rho12, n, rho21) and s the pseudospin
_T = np.array([[0.5, -0.5j, 0], [0, 0, 1], [0.5, 0.5j, 0]], dtype=complex)
_T_INV = np.linalg.inv(_T)


@dataclass(frozen=True)
class DensityVector:
    """TLS state as r = (rho12, n, rho21) with n = rho11 - rho22."""

    r1: complex
    r0: float
    rm1: complex

    def __post_init__(self):
        if abs(self.rm1 - np.conj(self.r1)) > 1e-12:
            raise ValueError("rho21 must be the complex conjugate of rho12")
        if np.linalg.norm(self.pseudospin) > 1 + 1e-12:
            raise ValueError("state is not normalised: |s| > 1")

    @classmethod
    def from_matrix(cls, rho) -> "DensityVector":
        rho = np.asarray(rho, dtype=complex)
        if abs(np.trace(rho) - 1) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        if np.abs(rho - rho.conj().T).max() > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        return cls(complex(rho[0, 1]), float((rho[0, 0] - rho[1, 1]).real), complex(rho[1, 0]))

    @classmethod
    def from_pseudospin(cls, s) -> "DensityVector":
        sx, sy, sz = (float(c) for c in s)
        rho21 = complex(sx, sy) / 2
        return cls(rho21.conjugate(), sz, rho21)

    @classmethod
    def pure(cls, c1: complex, c2: complex) -> "DensityVector":
        """State c1|1> + c2|2> (normalised here)."""
        psi = np.array([c1, c2], dtype=complex)
        psi /= np.linalg.norm(psi)
        return cls.from_matrix(np.outer(psi, psi.conj()))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.r1, self.r0, self.rm1], dtype=complex)

    @property
    def pseudospin(self) -> np.ndarray:
        return np.array([2 * self.rm1.real, 2 * self.rm1.imag, self.r0])

    def matrix(self) -> np.ndarray:
        return np.array([[(1 + self.r0) / 2, self.r1], [self.rm1, (1 - self.r0) / 2]], dtype=complex)


def vector_to_matrix(r) -> np.ndarray:
    """Batch version: (..., 3) complex r -> (..., 2, 2) density matrices."""
    r = np.asarray(r)
    out = np.empty(r.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = (1 + r[..., 1]) / 2
    out[..., 1, 1] = (1 - r[..., 1]) / 2
    out[..., 0, 1] = r[..., 0]
    out[..., 1, 0] = r[..., 2]
    return out


def pseudospin_to_vector(s) -> np.ndarray:
    """(..., 3) pseudospin -> (..., 3) density vector r."""
    return np.asarray(s) @ _T.T


def vector_to_pseudospin(r) -> np.ndarray:
    return (np.asarray(r) @ _T_INV.T).real


def rotation_to_green(rot) -> np.ndarray:
    """Green function on r from a (..., 3, 3) pseudospin rotation."""
    return _T @ rot @ _T_INV


def liouville_matrix(omega_c: complex, delta0: float = 0.0) -> np.ndarray:
    """Generator A of dr/dt = A r for a fixed coupling omega_c."""
    oc = complex(omega_c)
    return 1j * np.array([
        [delta0, -oc.conjugate() / 2, 0],
        [-oc, 0, oc.conjugate()],
        [0, oc / 2, -delta0],
    ], dtype=complex)


def spin1_generator(omega_c: complex, delta0: float = 0.0) -> np.ndarray:
    """i B.S for the effective field B = (Re omega_c, Im omega_c, delta0)."""
    oc = complex(omega_c)
    return 1j * (oc.real * SX + oc.imag * SY + delta0 * SZ)


def pointer_transform(phi_prime: float) -> np.ndarray:
    """Unitary whose columns are (|1> +- e^{i phi'}|2>)/sqrt(2)."""
    e = np.exp(1j * phi_prime)
    return np.array([[1, 1], [e, -e]], dtype=complex) / SQRT2


@dataclass(frozen=True)
class PointerBasis:
    phi_prime: float

    @property
    def transform(self) -> np.ndarray:
        return pointer_transform(self.phi_prime)

    def to_pointer(self, rho) -> np.ndarray:
        """rho' = S^dagger rho S; works on stacks of matrices."""
        s = self.transform
        return s.conj().T @ np.asarray(rho) @ s

    def states(self):
        s = self.transform
        return s[:, 0], s[:, 1]
