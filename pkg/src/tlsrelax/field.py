"""Complex Gaussian-Markovian (Ornstein-Uhlenbeck) coupling field.

The field Omega_c(t) = u(t) + i v(t) has independent OU components with
stationary variance omega0**2 / 2 each, so that
<Omega_c(t) Omega_c*(0)> = omega0**2 exp(-nu t).  Sampling is exact in dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

# refuse trajectory requests larger than this many states
MAX_TRAJECTORY_STATES = 50_000_000


@dataclass(frozen=True)
class FieldParams:
    omega0: float = 1.0
    nu: float = 0.0
    delta0: float = 0.0

    def __post_init__(self):
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive and finite, got {self.omega0}")
        if not (self.nu >= 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be nonnegative and finite, got {self.nu}")
        if not math.isfinite(self.delta0):
            raise ValueError(f"delta0 must be finite, got {self.delta0}")

    @property
    def D(self) -> float:
        """Diffusion coefficient omega0**2 * nu / 2 of the field."""
        return 0.5 * self.omega0**2 * self.nu

    @property
    def alpha(self) -> float:
        """Rate (omega0**2 nu)**(1/3) of irreversible relaxation."""
        return (self.omega0**2 * self.nu) ** (1.0 / 3.0)

    def stationary_density(self, omega):
        """f(Omega) = exp(-Omega^2/omega0^2) / (pi omega0^2)."""
        omega = np.asarray(omega, dtype=float)
        return np.exp(-(omega / self.omega0) ** 2) / (math.pi * self.omega0**2)


@dataclass(frozen=True)
class FieldState:
    u: float
    v: float

    @classmethod
    def from_polar(cls, omega: float, phi: float) -> "FieldState":
        return cls(omega * math.cos(phi), omega * math.sin(phi))

    @property
    def omega(self) -> float:
        return math.hypot(self.u, self.v)

    @property
    def phi(self) -> float:
        """Phase in [0, 2 pi)."""
        return wrap_phase(math.atan2(self.v, self.u))

    @property
    def complex(self) -> complex:
        return complex(self.u, self.v)


def wrap_phase(phi):
    """Map angles onto [0, 2 pi)."""
    out = np.mod(phi, 2 * np.pi)
    # mod can return exactly 2 pi for tiny negative input
    out = np.where(out >= 2 * np.pi, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent random stream labelled by ``key`` derived from ``seed``.

    ``stream(seed, i)`` is the stream of trajectory (or chunk) ``i``; longer
    keys give further independent families.
    """
    if not key:
        raise ValueError("stream needs at least one index")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key)))


def ou_coefficients(params: FieldParams, dt: float) -> tuple[float, float]:
    """Decay factor and per-component noise amplitude of one exact OU step."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    decay = math.exp(-params.nu * dt)
    # (omega0^2/2)(1 - e^{-2 nu dt}), written with expm1 to keep small nu*dt accurate
    var = 0.5 * params.omega0**2 * -math.expm1(-2.0 * params.nu * dt)
    return decay, math.sqrt(var)


def sample_stationary(params: FieldParams, rng: np.random.Generator, size=None):
    """Draw the field from its stationary Gaussian law.

    With ``size=None`` a single :class:`FieldState` is returned, otherwise a
    pair of arrays ``(u, v)``.
    """
    sigma = params.omega0 / math.sqrt(2.0)
    if size is None:
        u, v = rng.normal(0.0, sigma, 2)
        return FieldState(float(u), float(v))
    return rng.normal(0.0, sigma, size), rng.normal(0.0, sigma, size)


def sample_fixed_phase(params: FieldParams, phi: float, rng: np.random.Generator, size):
    """Stationary amplitude, fixed phase: radial density 2 pi Omega f(Omega)."""
    # Omega^2 / omega0^2 is exponentially distributed
    omega = params.omega0 * np.sqrt(rng.exponential(1.0, size))
    return omega * math.cos(phi), omega * math.sin(phi)


def step(params: FieldParams, state: FieldState, dt: float, rng: np.random.Generator) -> FieldState:
    """Advance the field by ``dt`` with the exact OU transition law."""
    decay, amp = ou_coefficients(params, dt)
    xi = rng.standard_normal(2)
    return FieldState(state.u * decay + amp * float(xi[0]), state.v * decay + amp * float(xi[1]))


def step_arrays(u, v, decay, amp, rng):
    """Vectorised exact OU step on arrays of field components."""
    return (u * decay + amp * rng.standard_normal(np.shape(u)),
            v * decay + amp * rng.standard_normal(np.shape(v)))


def trajectory(params: FieldParams, dt: float, n_steps: int, rng: np.random.Generator,
               initial: Optional[FieldState] = None) -> np.ndarray:
    """Sampled field path as a complex array of length ``n_steps + 1``.

    Element 0 is ``initial`` (or a stationary draw when it is omitted).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if n_steps + 1 > MAX_TRAJECTORY_STATES:
        raise MemoryError(f"trajectory of {n_steps + 1} states exceeds the limit "
                          f"of {MAX_TRAJECTORY_STATES}")
    if initial is None:
        initial = sample_stationary(params, rng)
    out = np.empty(n_steps + 1, dtype=complex)
    out[0] = initial.complex
    if n_steps == 0:
        return out
    decay, amp = ou_coefficients(params, dt)
    noise = rng.standard_normal((2, n_steps)) * amp
    # x_n = decay * x_{n-1} + noise_n as a first-order recursive filter
    u = lfilter([1.0], [1.0, -decay], noise[0], zi=[decay * initial.u])[0]
    v = lfilter([1.0], [1.0, -decay], noise[1], zi=[decay * initial.v])[0]
    out[1:] = u + 1j * v
    return out


def lag_correlation(path: np.ndarray, lag: int) -> tuple[complex, float]:
    """Time-averaged <Omega_c(t + lag) Omega_c*(t)> of one long path.

    Returns the estimate and a standard error from batch means, which
    accounts for the serial correlation of the products.
    """
    prod = path[lag:] * np.conj(path[: len(path) - lag])
    n_batch = 50
    usable = len(prod) // n_batch * n_batch
    batches = prod[:usable].reshape(n_batch, -1).mean(axis=1)
    err = float(np.std(batches.real, ddof=1) / math.sqrt(n_batch))
    return complex(prod.mean()), err
