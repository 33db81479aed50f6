"""Closed-form and asymptotic relaxation results.

Each formula holds only in a particular regime.  The ``*_curve`` builders
return :class:`TheoryCurve` objects whose ``valid`` mask marks the points
inside that regime; points outside are kept, never clipped.  Windows use a
factor-of-3 margin for every "much less than" condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import special
from .field import FieldParams
from .pde import RadialGrid, ScalarOutputs
from .special import C0, C1, C2, C3, K
from .tls import pointer_transform

MARGIN = 3.0


@dataclass
class TheoryCurve:
    regime: str
    times: np.ndarray
    values: np.ndarray
    valid: np.ndarray
    window: tuple = (0.0, math.inf)
    meta: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        """True when some points lie outside the validity window."""
        return not bool(np.all(self.valid))


def _window_mask(t, lo, hi):
    t = np.asarray(t, dtype=float)
    return (t >= lo) & (t <= hi)


_dawson_vec = np.vectorize(special.dawson, otypes=[float])


# --------------------------------------------------------------------------
# static limit and weak coupling


def n_static(t, omega0: float = 1.0):
    """Population relaxation for a frozen field: 1 - omega0 t F(omega0 t / 2)."""
    x = omega0 * np.asarray(t, dtype=float)
    out = 1.0 - x * _dawson_vec(0.5 * x)
    return float(out) if out.ndim == 0 else out


def r_static(t, omega0: float = 1.0):
    return 0.5 * (n_static(t, omega0) + 1.0)


def static_curve(times, params: FieldParams, which: str = "N") -> TheoryCurve:
    fn = n_static if which == "N" else r_static
    times = np.asarray(times, dtype=float)
    # static limit: the field must not move over the times considered
    hi = 1.0 / (MARGIN * params.alpha) if params.nu > 0 else math.inf
    return TheoryCurve("static", times, fn(times, params.omega0),
                       _window_mask(times, 0.0, hi), (0.0, hi))


def weak_coupling(t, params: FieldParams):
    """(N, R) = (exp(-t/T1), exp(-t/T2)), T1 = nu/omega0^2, T2 = 2 T1."""
    if params.nu == 0:
        raise ValueError("weak coupling needs nu > 0")
    t1 = params.nu / params.omega0**2
    t = np.asarray(t, dtype=float)
    return np.exp(-t / t1), np.exp(-t / (2 * t1))


def weak_curve(times, params: FieldParams, which: str = "N") -> TheoryCurve:
    n, r = weak_coupling(times, params)
    ok = params.nu >= MARGIN * params.omega0
    times = np.asarray(times, dtype=float)
    return TheoryCurve("weak", times, n if which == "N" else r,
                       np.full(times.shape, ok), meta={"T1": params.nu / params.omega0**2})


# --------------------------------------------------------------------------
# short times


def j_short_time(t, params: FieldParams):
    """J(alpha t) ~ 1 - D t^3 / 3 = 1 - (alpha t)^3 / 6."""
    t = np.asarray(t, dtype=float)
    return 1.0 - params.D * t**3 / 3.0


def short_time_window(params: FieldParams) -> tuple:
    if params.nu == 0:
        return (0.0, math.inf)
    return (0.0, (1.0 / (MARGIN * params.D)) ** (1.0 / 3.0))


def short_time_profiles(omega, t, params: FieldParams):
    """Perturbative partial-average profiles for D t^3 << 1.

    Returns (N, E, P, Q, R); E and Q are purely imaginary.
    """
    om = np.asarray(omega, dtype=float)
    t = float(t)
    D = params.D
    f = params.stationary_density(om)
    c, s = np.cos(om * t), np.sin(om * t)
    a = 1.0 - D * t**3 / 3.0 - D * t / (2 * om**2)
    b = 1.0 - D * t**3 / 3.0 - 3 * D * t / (2 * om**2)
    N = f * (a * c + D * (1 - om**2 * t**2) / (2 * om**3) * s)
    E = -2j * f * (0.5 * a * s + D * t**2 / (4 * om) * c)
    P = f * (0.5 - 0.5 * b * c + D * (1 + om**2 * t**2) / (4 * om**3) * s - D * t / om**2)
    Q = 1j * f * (b * s + D * (om**2 * t**2 - 4) / (2 * om**3) * c + 2 * D / om**3)
    R = 0.5 * N + f * (0.5 - D * t / (2 * om**2) * (2 + c) + 3 * D / (2 * om**3) * s)
    return N, E, P, Q, R


def r_intermediate(t, params: FieldParams):
    """R(t) ~ 1/2 - 1/(omega0 t)^2 + nu t (C0 - ln omega0 t)."""
    x = params.omega0 * np.asarray(t, dtype=float)
    return 0.5 - 1.0 / x**2 + params.nu * np.asarray(t) * (C0 - np.log(x))


def r_intermediate_window(params: FieldParams) -> tuple:
    lo = MARGIN / params.omega0
    hi = params.D ** (-1.0 / 3.0) / MARGIN if params.nu > 0 else math.inf
    return (lo, hi)


def j_curve(times, params: FieldParams) -> TheoryCurve:
    """Short-time J law against omega0 t (not alpha t)."""
    lo, hi = short_time_window(params)
    times = np.asarray(times, dtype=float)
    return TheoryCurve("short-time", times, j_short_time(times, params),
                       _window_mask(times, lo, hi), (lo, hi))


def r_intermediate_curve(times, params: FieldParams) -> TheoryCurve:
    lo, hi = r_intermediate_window(params)
    times = np.asarray(times, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = r_intermediate(times, params)
    return TheoryCurve("short-time", times, values, _window_mask(times, lo, hi), (lo, hi))


# --------------------------------------------------------------------------
# strong coupling coherence


def k0_of_t(t, params: FieldParams):
    """K0(t) = C1 exp(-2 k nu t) 2F1(k, k; 1 + 2k; exp(-2 nu t))."""
    t_arr = np.asarray(t, dtype=float)
    x = np.exp(-2.0 * params.nu * t_arr)
    f = np.vectorize(lambda xx: special.gauss_2f1(K, K, 1.0 + 2.0 * K, xx), otypes=[float])(x)
    out = C1 * np.exp(-2.0 * K * params.nu * t_arr) * f
    return float(out) if out.ndim == 0 else out


def k0_plateau(t, params: FieldParams):
    """2 R(t) on the plateau alpha^-1 << t << nu^-1: 1 + nu t (ln nu t - C3)."""
    nt = params.nu * np.asarray(t, dtype=float)
    return 1.0 + nt * (np.log(nt) - C3)


def k0_tail(t, params: FieldParams):
    """K0(t) ~ C1 exp(-sqrt(2) nu t) once exp(2 nu t) >> 1."""
    return C1 * np.exp(-2.0 * K * params.nu * np.asarray(t, dtype=float))


def strong_coupling_window(params: FieldParams) -> tuple:
    """alpha^-1 << t (upper end open)."""
    return (MARGIN / params.alpha, math.inf) if params.nu > 0 else (math.inf, math.inf)


def pointer_window(params: FieldParams) -> tuple:
    """alpha^-1 << t << nu^-1."""
    return (MARGIN / params.alpha, 1.0 / (MARGIN * params.nu))


def k0_curve(times, params: FieldParams) -> TheoryCurve:
    lo, hi = strong_coupling_window(params)
    times = np.asarray(times, dtype=float)
    return TheoryCurve("strong-coupling", times, k0_of_t(times, params),
                       _window_mask(times, lo, hi), (lo, hi))


_kummer_vec = np.vectorize(special.kummer_m, otypes=[float])


def k0_profile(omega, t, params: FieldParams):
    """K0(Omega, t) = C2 f(Omega) zeta^k M(k, 2k+1, -zeta),
    zeta = Omega^2 / (omega0^2 (exp(2 nu t) - 1))."""
    if not t > 0:
        raise ValueError("k0_profile needs t > 0")
    om = np.asarray(omega, dtype=float)
    zeta = om**2 / (params.omega0**2 * math.expm1(2.0 * params.nu * t))
    g = C2 * zeta**K * _kummer_vec(K, 2 * K + 1, -zeta)
    return params.stationary_density(om) * g


def k1_profile(omega, t, params: FieldParams):
    """K1(Omega, t) ~ f(Omega) exp(i Omega t - D t^3 / 3) for Omega >> alpha."""
    om = np.asarray(omega, dtype=float)
    return params.stationary_density(om) * np.exp(1j * om * t - params.D * t**3 / 3.0)


def k1_of_t(t, params: FieldParams, grid: Optional[RadialGrid] = None):
    """Radial integral of :func:`k1_profile` on the solver grid."""
    grid = grid or RadialGrid(omega_max=6.0 * params.omega0)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    om = grid.nodes
    prof = k1_profile(om[None, :], t_arr[:, None], params)
    out = grid.integrate(prof)
    return out[0] if np.ndim(t) == 0 else out


def r_interpolated(t, params: FieldParams, variant: str = "product"):
    """All-time coherence estimate: R_st K0 ("product") or (N_st + K0)/2 ("mean")."""
    k0 = k0_of_t(t, params)
    if variant == "product":
        return r_static(t, params.omega0) * k0
    if variant == "mean":
        return 0.5 * (n_static(t, params.omega0) + k0)
    raise ValueError(f"unknown variant {variant!r}")


def r_interpolated_curve(times, params: FieldParams, variant: str = "product") -> TheoryCurve:
    times = np.asarray(times, dtype=float)
    ok = params.nu <= params.omega0 / MARGIN
    return TheoryCurve("interpolation", times, r_interpolated(times, params, variant),
                       np.full(times.shape, ok), meta={"variant": variant})


# --------------------------------------------------------------------------
# pointer states


def strong_coupling_scalars(times, params: FieldParams, grid: Optional[RadialGrid] = None) -> ScalarOutputs:
    """Asymptotic relaxation scalars for alpha^-1 << t.

    K0 from the hypergeometric formula, K1 from its dephasing profile; N and
    E have decayed to zero in that regime.  P, Q and R follow from K0, K1.
    """
    times = np.asarray(times, dtype=float)
    k0 = k0_of_t(times, params)
    k1 = np.atleast_1d(k1_of_t(times, params, grid))
    zero = np.zeros_like(times)
    return ScalarOutputs(times=times, N=zero, E_im=zero.copy(), P=0.5 * (k0 - k1.real),
                         Q_im=k1.imag, R=0.5 * (k0 + k1.real), source="theory", params=params)


def _scalar_at(scalars: ScalarOutputs, t):
    i = int(np.argmin(np.abs(scalars.times - t)))
    if abs(scalars.times[i] - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"no scalar output at t={t}")
    return {"N": scalars.N[i], "E": 1j * scalars.E_im[i], "P": scalars.P[i],
            "Q": 1j * scalars.Q_im[i], "R": scalars.R[i]}


def _resolve_sources(scalars, k_scalars):
    if k_scalars is not None and k_scalars.source != scalars.source:
        raise ValueError(f"inconsistent source mix: {scalars.source!r} vs {k_scalars.source!r}")


def conditional_matrix(t, phi_prime: float, rho0, scalars: ScalarOutputs) -> np.ndarray:
    """Lab-basis density matrix averaged at fixed initial field phase.

    Built from the backward Green function
        [[R, -e^{-i phi} Q/2, e^{-2i phi} P],
         [e^{i phi} E, N, -e^{-i phi} E],
         [e^{2i phi} P, e^{i phi} Q/2, R]]
    acting on r(0) = (rho12, n, rho21).
    """
    g = _scalar_at(scalars, t)
    e = np.exp(1j * phi_prime)
    gt = np.array([
        [g["R"], -g["Q"] / (2 * e), g["P"] / e**2],
        [e * g["E"], g["N"], -g["E"] / e],
        [e**2 * g["P"], e * g["Q"] / 2, g["R"]],
    ])
    rho0 = np.asarray(rho0, dtype=complex)
    r0 = np.array([rho0[0, 1], (rho0[0, 0] - rho0[1, 1]).real, rho0[1, 0]])
    r = gt @ r0
    return np.array([[(1 + r[1]) / 2, r[0]], [r[2], (1 - r[1]) / 2]])


def pointer_prediction(t, phi_prime: float, rho0, scalars: ScalarOutputs,
                       k_scalars: Optional[ScalarOutputs] = None) -> np.ndarray:
    """Conditional density matrix in the basis (|1> +- e^{i phi'}|2>)/sqrt(2).

    ``k_scalars`` optionally supplies K0 and K1 (that is, P, Q, R) from a
    second run; it must come from the same source as ``scalars``.
    """
    _resolve_sources(scalars, k_scalars)
    if k_scalars is not None:
        i = int(np.argmin(np.abs(k_scalars.times - t)))
        j = int(np.argmin(np.abs(scalars.times - t)))
        merged = ScalarOutputs(
            times=scalars.times[j:j + 1], N=scalars.N[j:j + 1], E_im=scalars.E_im[j:j + 1],
            P=k_scalars.P[i:i + 1], Q_im=k_scalars.Q_im[i:i + 1], R=k_scalars.R[i:i + 1],
            source=scalars.source)
        scalars = merged
        t = scalars.times[0]
    rho = conditional_matrix(t, phi_prime, rho0, scalars)
    s = pointer_transform(phi_prime)
    return s.conj().T @ rho @ s


def pointer_closed_form(t, phi_prime: float, rho0, scalars: ScalarOutputs) -> np.ndarray:
    """Pointer-basis components written out explicitly.

    diag: 1/2 +- K0 Re c, off-diagonal: (N + Q) n(0)/2 + i (R - P) Im c + e Im c,
    with c = rho21(0) e^{-i phi'} and E = i e.
    """
    g = _scalar_at(scalars, t)
    rho0 = np.asarray(rho0, dtype=complex)
    n0 = (rho0[0, 0] - rho0[1, 1]).real
    c = rho0[1, 0] * np.exp(-1j * phi_prime)
    k0 = g["P"] + g["R"]
    pp = 0.5 + k0 * c.real
    mm = 0.5 - k0 * c.real
    pm = (g["N"] + g["Q"]) * n0 / 2 + 1j * (g["R"] - g["P"]) * c.imag + g["E"].imag * c.imag
    return np.array([[pp, pm], [np.conj(pm), mm]])
