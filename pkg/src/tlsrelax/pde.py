"""Radial partial-average equations.

The phase-averaged partial averages obey, at exact resonance,

    dN/dt = -i Omega E + L0 N,          dE/dt = -i Omega N + L1 E,
    dP/dt = -(i/2) Omega Q + L2 P,      dQ/dt = i Omega (R - P) + L1 Q,
    dR/dt = (i/2) Omega Q + L0 R,

with L_k = L0 - k^2 D / Omega^2 and L0 the radial Fokker-Planck operator of
the two-dimensional OU field.  E and Q are purely imaginary, so the solver
works with the real variables E' = iE and Q' = iQ.

Space: finite volumes on cell centres Omega_i = (i + 1/2) h, zero flux
through Omega = 0, zero ghost value past omega_max.  Time: Strang
splitting of the pointwise rotation (solved exactly) and the diffusion
(TR-BDF2, L-stable and second order, one tridiagonal factorisation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from .curves import RelaxationCurve
from .field import FieldParams

# row order of the stacked state
ROWS = ("N", "Ep", "P", "Qp", "R")
_ROW_K = (0, 1, 2, 1, 0)

_GAMMA = 2.0 - math.sqrt(2.0)
_TRBDF2_C = 1.0 - 1.0 / math.sqrt(2.0)  # = gamma/2 = (1-gamma)/(2-gamma)

# growth of the discrete norm beyond this factor means the run blew up
_NORM_GROWTH_LIMIT = 10.0


class InstabilityError(RuntimeError):
    def __init__(self, t, growth, dt):
        self.t = t
        self.growth = growth
        self.suggested_dt = dt / 4
        super().__init__(f"solution norm grew by {growth:.3g} at t={t:.4g}; "
                         f"try dt <= {self.suggested_dt:.3g}")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centred grid on (0, omega_max)."""

    omega_max: float = 6.0
    n_points: int = 2048

    def __post_init__(self):
        if self.n_points < 8:
            raise ValueError("n_points must be at least 8")
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")

    @property
    def h(self) -> float:
        return self.omega_max / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_points) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        """Interior and outer faces (i + 1) h, i = 0..n-1."""
        return (np.arange(self.n_points) + 1.0) * self.h

    def integrate(self, values) -> np.ndarray:
        """2 pi int F(Omega) Omega dOmega along the last axis (midpoint rule)."""
        w = 2.0 * math.pi * self.nodes * self.h
        return np.asarray(values) @ w

    def check_resolution(self, omega0: float) -> None:
        if self.omega_max < 5.0 * omega0:
            raise ValueError(f"omega_max={self.omega_max} must be at least 5 omega0")
        if self.h > 0.05 * omega0:
            raise ValueError(f"grid spacing h={self.h:.3g} is too coarse for the "
                             f"1/Omega^2 terms near the origin (need h <= 0.05 omega0)")

    def equilibrium(self, omega0: float = 1.0) -> np.ndarray:
        """Discrete stationary density: zero flux of L0 through every face,
        normalised to unit radial integral."""
        self.check_resolution(omega0)
        w = omega0**2 / self.h
        ratios = (w - self.faces[:-1]) / (w + self.faces[:-1])
        logf = np.concatenate([[0.0], np.cumsum(np.log(ratios))])
        f = np.exp(logf - logf.max())
        return f / self.integrate(f)


@dataclass(frozen=True)
class Tridiagonal:
    """Tridiagonal matrix in band form; ``lower[0]`` and ``upper[-1]`` are 0."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __matmul__(self, x):
        x = np.asarray(x)
        y = self.diag * x
        y[..., 1:] += self.lower[1:] * x[..., :-1]
        y[..., :-1] += self.upper[:-1] * x[..., 1:]
        return y

    def __sub__(self, other):
        return Tridiagonal(self.lower - other.lower, self.diag - other.diag, self.upper - other.upper)

    def toarray(self) -> np.ndarray:
        n = len(self.diag)
        a = np.diag(self.diag)
        a[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        a[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return a


def build_lk(grid: RadialGrid, k: int, params: FieldParams) -> Tridiagonal:
    """Finite-volume form of L_k = L0 - k^2 D / Omega^2.

    L0 F = (1/Omega) d/dOmega [Omega (D F' + nu Omega F)], which expands to
    D F'' + (nu Omega + D / Omega) F' + 2 nu F with D = omega0^2 nu / 2.
    """
    if k not in (0, 1, 2):
        raise ValueError(f"k must be 0, 1 or 2, got {k}")
    grid.check_resolution(params.omega0)
    h = grid.h
    om = grid.nodes
    D, nu = params.D, params.nu
    # flux through face at (i+1)h: a_i F_{i+1} + b_i F_i
    fc = grid.faces
    a = fc * (D / h + 0.5 * nu * fc)
    b = fc * (-D / h + 0.5 * nu * fc)
    vol = om * h
    upper = np.zeros_like(om)
    lower = np.zeros_like(om)
    diag = b / vol
    upper[:-1] = a[:-1] / vol[:-1]
    diag[1:] -= a[:-1] / vol[1:]
    lower[1:] = -b[:-1] / vol[1:]
    if k:
        diag = diag - k * k * D / om**2
    return Tridiagonal(lower, diag, upper)


@dataclass
class RadialProfiles:
    """N, E' = iE, P, Q' = iQ and R on the grid at one time."""

    t: float
    N: np.ndarray
    Ep: np.ndarray
    P: np.ndarray
    Qp: np.ndarray
    R: np.ndarray

    @property
    def E(self) -> np.ndarray:
        return -1j * self.Ep

    @property
    def Q(self) -> np.ndarray:
        return -1j * self.Qp

    @property
    def K0(self) -> np.ndarray:
        return self.P + self.R

    @property
    def K1(self) -> np.ndarray:
        # chi'_1 / chi^(0)_1 = -P + Q + R
        return (self.R - self.P) - 1j * self.Qp


@dataclass
class ScalarOutputs:
    """Radially integrated relaxation functions.

    ``E_im`` and ``Q_im`` are the imaginary parts of the purely imaginary
    E(t) and Q(t).  ``source`` records where the numbers came from.
    """

    times: np.ndarray
    N: np.ndarray
    E_im: np.ndarray
    P: np.ndarray
    Q_im: np.ndarray
    R: np.ndarray
    source: str = "pde"
    params: Optional[FieldParams] = None

    @property
    def E(self) -> np.ndarray:
        return 1j * self.E_im

    @property
    def Q(self) -> np.ndarray:
        return 1j * self.Q_im

    @property
    def K0(self) -> np.ndarray:
        return self.P + self.R

    @property
    def K1(self) -> np.ndarray:
        return (self.R - self.P) + 1j * self.Q_im

    def curve(self, name: str) -> RelaxationCurve:
        values = {"N": self.N, "R": self.R, "P": self.P, "K0": self.K0,
                  "E_im": self.E_im, "Q_im": self.Q_im}[name]
        return RelaxationCurve(self.times, values, label=name, meta={"source": self.source})


@dataclass
class Solution:
    scalars: ScalarOutputs
    profiles: list = field(default_factory=list)
    grid: Optional[RadialGrid] = None

    def profile_at(self, t: float) -> RadialProfiles:
        return min(self.profiles, key=lambda p: abs(p.t - t))


class _SymmetricStack:
    """I - c dt L for the five stacked rows, in symmetrised variables.

    Every L_k satisfies detailed balance with respect to the discrete
    equilibrium, so y = S x with S = diag(sqrt(vol / f_eq)) turns it into a
    symmetric negative semidefinite matrix and I - c dt L into a positive
    definite one, solved by LDL^T without pivoting.
    """

    def __init__(self, grid: RadialGrid, ops: Sequence[Tridiagonal], omega0: float, scale: float):
        n = grid.n_points
        feq = grid.equilibrium(omega0)
        self.s = np.sqrt(grid.nodes * grid.h / feq)
        sym_diag, sym_off = [], []
        for op in ops:
            off = np.sqrt(op.upper[:-1] * op.lower[1:])
            sym_diag.append(op.diag)
            sym_off.append(np.append(off, 0.0))
        self.diag = np.concatenate(sym_diag)
        self.off = np.concatenate(sym_off)[:-1]
        self.n = n
        d, e, info = lapack.dpttrf(1.0 - scale * self.diag, -scale * self.off)
        if info != 0:
            raise np.linalg.LinAlgError(f"diffusion matrix is not positive definite (info={info})")
        self._lu = (d, e)

    def apply(self, y):
        out = self.diag * y
        out[1:] += self.off * y[:-1]
        out[:-1] += self.off * y[1:]
        return out

    def solve(self, rhs):
        x, info = lapack.dpttrs(*self._lu, rhs)
        if info != 0:
            raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
        return x


class RadialSolver:
    """Time integrator for both equation systems at once.

    The two systems are independent; stacking them lets every diffusion
    stage run as a single banded solve.  Internally the state is kept in
    the symmetrised variables y = S x (S diagonal, so it commutes with the
    pointwise rotation).
    """

    def __init__(self, params: FieldParams, grid: Optional[RadialGrid] = None, dt: float = 0.005):
        if params.delta0 != 0.0:
            raise ValueError("the radial equations hold only at exact resonance (delta0 = 0)")
        self.params = params
        self.grid = grid or RadialGrid(omega_max=6.0 * params.omega0)
        self.grid.check_resolution(params.omega0)
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = dt
        self.ops = [build_lk(self.grid, k, params) for k in _ROW_K]
        self.omega = self.grid.nodes
        if params.nu > 0:
            self._stack = _SymmetricStack(self.grid, self.ops, params.omega0, _TRBDF2_C * dt)
            self._s = self._stack.s
        else:
            self._stack = None
            self._s = np.ones(self.grid.n_points)
        self._trig = {tau: (np.cos(self.omega * tau), np.sin(self.omega * tau))
                      for tau in (0.5 * dt, dt)}

    def initial_state(self) -> np.ndarray:
        f = self.grid.equilibrium(self.params.omega0)
        x = np.zeros((5, self.grid.n_points))
        x[0] = f  # N(Omega, 0) = f
        x[4] = f  # R(Omega, 0) = f
        return x

    def _rotate(self, x, tau):
        c, s = self._trig[tau]
        n, ep = x[0].copy(), x[1].copy()
        x[0] = n * c - ep * s
        x[1] = n * s + ep * c
        d = x[4] - x[2]
        ssum = x[4] + x[2]
        qp = x[3].copy()
        d_new = d * c + qp * s
        x[3] = qp * c - d * s
        x[2] = 0.5 * (ssum - d_new)
        x[4] = 0.5 * (ssum + d_new)

    def _diffuse(self, y):
        if self._stack is None:
            return y
        st = self._stack
        flat = y.reshape(-1)
        half = 0.5 * _GAMMA * self.dt
        z = st.solve(flat + half * st.apply(flat))
        g2 = _GAMMA * (2.0 - _GAMMA)
        out = st.solve((z - (1.0 - _GAMMA) ** 2 * flat) / g2)
        return out.reshape(y.shape)

    def run(self, times, profile_times=()) -> Solution:
        """Integrate to max(times), recording scalars at ``times``.

        Requested times are snapped to the step grid; the step is shrunk
        slightly so the final time is hit exactly.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise ValueError("times must be nonnegative")
        t_max = float(times.max())
        n_steps = max(1, int(math.ceil(t_max / self.dt - 1e-9)))
        if t_max > 0 and abs(n_steps * self.dt - t_max) > 1e-12 * t_max:
            # re-factorise with a step that divides t_max
            solver = RadialSolver(self.params, self.grid, t_max / n_steps)
            return solver.run(times, profile_times)
        dt = self.dt
        want = set(np.rint(times / dt).astype(int).tolist())
        pidx = {int(round(t / dt)) for t in np.atleast_1d(profile_times)}
        grid = self.grid
        s = self._s
        y = self.initial_state() * s
        norm0 = np.abs(y).max()

        rec_t, rec = [], []
        profiles = []

        def record(j):
            x = y / s
            if j in want:
                rec_t.append(j * dt)
                rec.append(grid.integrate(x))
            if j in pidx:
                profiles.append(RadialProfiles(j * dt, *x))

        record(0)
        pending = False
        last = n_steps if t_max > 0 else 0
        for j in range(1, last + 1):
            self._rotate(y, dt if pending else 0.5 * dt)
            y = self._diffuse(y)
            pending = True
            if j in want or j in pidx or j == last:
                self._rotate(y, 0.5 * dt)
                pending = False
                growth = np.abs(y).max() / norm0
                if not np.isfinite(growth) or growth > _NORM_GROWTH_LIMIT:
                    raise InstabilityError(j * dt, growth, dt)
                record(j)
        vals = np.array(rec).T
        scalars = ScalarOutputs(
            times=np.array(rec_t), N=vals[0], E_im=-vals[1], P=vals[2], Q_im=-vals[3], R=vals[4],
            source="pde", params=self.params)
        return Solution(scalars, profiles, grid)


def solve_population(params: FieldParams, times, grid: Optional[RadialGrid] = None,
                     dt: float = 0.005, profile_times=()) -> Solution:
    """N(Omega, t), E(Omega, t) from N(Omega, 0) = f(Omega) and their
    radial integrals N(t), E(t)."""
    return RadialSolver(params, grid, dt).run(times, profile_times)


def solve_coherence(params: FieldParams, times, grid: Optional[RadialGrid] = None,
                    dt: float = 0.005, profile_times=()) -> Solution:
    """P, Q, R from R(Omega, 0) = f(Omega); the scalars carry R(t), P(t),
    Q(t) and the derived K0(t) = P + R, K1(t) = R - P + Q."""
    return RadialSolver(params, grid, dt).run(times, profile_times)


def extract_j(params: FieldParams, n_curve: RelaxationCurve, min_abs_static: float = 0.02):
    """J(alpha t) = N(t) / N_st(t) on the points where |N_st| is not small.

    Returns the J curve (times rescaled to alpha t) and the list of dropped
    times.
    """
    from .theory import n_static

    if params.nu / params.omega0 > 0.05:
        raise ValueError("J extraction needs strong coupling, nu/omega0 <= 0.05")
    t = np.asarray(n_curve.times)
    nst = n_static(t, params.omega0)
    keep = np.abs(nst) >= min_abs_static
    j = np.asarray(n_curve.values)[keep] / nst[keep]
    curve = RelaxationCurve(params.alpha * t[keep], j, label="J",
                            meta={"nu_over_omega0": params.nu / params.omega0, "x": "alpha*t"})
    return curve, t[~keep].tolist()
