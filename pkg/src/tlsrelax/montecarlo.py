"""Stochastic-trajectory Monte Carlo for the TLS in a fluctuating field.

Each trajectory rotates the pseudospin s = (2 Re rho21, 2 Im rho21, n)
about the effective field B = (u, v, delta0), ds/dt = s x B.  The field is
sampled exactly (OU transition law); within a step it is held at the mean
of the two end values, which makes the propagator second order in dt.

Trajectories are processed in fixed-size chunks; chunk ``c`` of a run with
seed ``s`` draws from ``stream(s, tag, c)``.  Results therefore depend only
on (seed, n_traj, chunk), not on how chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curves import RelaxationCurve
from .field import FieldParams, ou_coefficients, sample_fixed_phase, sample_stationary, stream
from .tls import SPIN1_SCALE, DensityVector, PointerBasis, rotation_to_green, vector_to_matrix

__all__ = [
    "ConditionalAverage", "DensityVector", "PointerBasis", "ForwardBackwardReport",
    "AccuracyReport", "default_dt", "propagate", "ensemble_average", "conditional_average",
    "pointer_project", "forward_backward_check", "propagator_accuracy",
]

DEFAULT_CHUNK = 2000

# stream families, so different estimators never share random numbers
_TAG_ENSEMBLE = 1
_TAG_CONDITIONAL = 2
_TAG_FORWARD = 3
_TAG_BACKWARD = 4
_TAG_ACCURACY = 5


def default_dt(params: FieldParams) -> float:
    """min(0.02 / omega0, 0.02 / nu): resolves Rabi rotation and field decorrelation."""
    dt = 0.02 / params.omega0
    if params.nu > 0:
        dt = min(dt, 0.02 / params.nu)
    return dt


def _step_grid(t_max: float, dt: Optional[float], params: FieldParams, n_out: int):
    """Step size and record stride so that t_max is hit exactly."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if n_out < 1:
        raise ValueError("n_out must be at least 1")
    dt = default_dt(params) if dt is None else dt
    if not dt > 0:
        raise ValueError("dt must be positive")
    stride = max(1, int(math.ceil(t_max / (n_out * dt) - 1e-9)))
    n_steps = n_out * stride
    return t_max / n_steps, n_steps, stride


# --------------------------------------------------------------------------
# propagator


def rotate(spins, bx, by, bz, dt):
    """Exact rotation of pseudospins under ds/dt = s x B over ``dt``.

    ``spins`` has shape (..., 3, n); the field components have shape (n,)
    (or broadcast to it).  Rodrigues' formula with angle -|B| dt.
    """
    b = np.sqrt(bx * bx + by * by + bz * bz)
    inv = np.divide(1.0, b, out=np.zeros_like(b), where=b > 0)
    kx, ky, kz = bx * inv, by * inv, bz * inv
    theta = b * dt
    c = np.cos(theta)
    sn = np.sin(theta)
    omc = 1.0 - c
    sx, sy, sz = spins[..., 0, :], spins[..., 1, :], spins[..., 2, :]
    dot = (kx * sx + ky * sy + kz * sz) * omc
    out = np.empty_like(spins)
    out[..., 0, :] = sx * c - (ky * sz - kz * sy) * sn + kx * dot
    out[..., 1, :] = sy * c - (kz * sx - kx * sz) * sn + ky * dot
    out[..., 2, :] = sz * c - (kx * sy - ky * sx) * sn + kz * dot
    return out


def propagate(r0_state: DensityVector, path, dt: float, delta0: float = 0.0) -> list:
    """Density vectors along one sampled field path.

    ``path`` is a complex array of field values at the step boundaries; the
    field over step j is held at (path[j] + path[j+1]) / 2.
    """
    if not isinstance(r0_state, DensityVector):
        r0_state = DensityVector(*r0_state)
    s = r0_state.pseudospin
    if abs(np.linalg.norm(s) - 1.0) > 1e-12 and np.linalg.norm(s) > 1.0:
        raise ValueError("input state is not normalised")
    path = np.asarray(path, dtype=complex)
    mid = 0.5 * (path[1:] + path[:-1])
    spins = np.empty((len(path), 3))
    spins[0] = s
    cur = s.reshape(3, 1)
    for j, b in enumerate(mid):
        cur = rotate(cur, np.array([b.real]), np.array([b.imag]), np.array([delta0]), dt)
        spins[j + 1] = cur[:, 0]
    return [DensityVector.from_pseudospin(_clip_unit(x)) for x in spins]


def _clip_unit(s):
    # rounding can push |s| a few ulp past 1
    n = np.linalg.norm(s)
    return s / n if n > 1.0 else s


def _run_chunk(params: FieldParams, init_field: Callable, spins0, dt, n_steps, stride,
               observe: Callable, rng, n):
    """Propagate ``n`` trajectories and sum ``observe`` at record steps.

    ``spins0`` has shape (m, 3); returns a list of per-record sums, each a
    dict of summed arrays.
    """
    decay, amp = ou_coefficients(params, dt) if params.nu > 0 else (1.0, 0.0)
    u, v = init_field(rng, n)
    spins = np.repeat(np.asarray(spins0, dtype=float)[:, :, None], n, axis=2)
    bz = params.delta0
    records = [observe(spins, u, v)]
    for j in range(1, n_steps + 1):
        if amp > 0:
            xi = rng.standard_normal((2, n))
            un = u * decay + amp * xi[0]
            vn = v * decay + amp * xi[1]
        else:
            un, vn = u, v
        spins = rotate(spins, 0.5 * (u + un), 0.5 * (v + vn), bz, dt)
        u, v = un, vn
        if j % stride == 0:
            records.append(observe(spins, u, v))
    return records


def _chunk_sums(args):
    params, init_field, spins0, dt, n_steps, stride, observe, seed, tag, c, n = args
    rng = stream(seed, tag, c)
    recs = _run_chunk(params, init_field, spins0, dt, n_steps, stride, observe, rng, n)
    # first and second moments per record, summed over the chunk
    return [{k: (v.sum(axis=-1), (v.real**2).sum(axis=-1), (v.imag**2).sum(axis=-1))
             for k, v in r.items()} for r in recs]


def _moments(params, init_field, spins0, dt, n_steps, stride, observe, seed, tag,
             n_traj, chunk, workers):
    """Means and standard errors of the observed quantities over n_traj paths."""
    if n_traj < 2:
        raise ValueError("n_traj must be at least 2")
    sizes = [chunk] * (n_traj // chunk)
    if n_traj % chunk:
        sizes.append(n_traj % chunk)
    jobs = [(params, init_field, spins0, dt, n_steps, stride, observe, seed, tag, c, n)
            for c, n in enumerate(sizes)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_chunk_sums, jobs))
    else:
        parts = [_chunk_sums(j) for j in jobs]
    # reduce in chunk order regardless of completion order
    out = []
    for rec in range(len(parts[0])):
        stats = {}
        for key in parts[0][rec]:
            s1 = sum(p[rec][key][0] for p in parts)
            s2r = sum(p[rec][key][1] for p in parts)
            s2i = sum(p[rec][key][2] for p in parts)
            mean = s1 / n_traj
            var_re = np.maximum(s2r / n_traj - np.real(mean) ** 2, 0.0) * n_traj / (n_traj - 1)
            var_im = np.maximum(s2i / n_traj - np.imag(mean) ** 2, 0.0) * n_traj / (n_traj - 1)
            stats[key] = (mean, np.sqrt(var_re / n_traj), np.sqrt(var_im / n_traj))
        out.append(stats)
    return out


# the observers and field initialisers must be picklable for worker processes


@dataclass(frozen=True)
class _Stationary:
    params: FieldParams

    def __call__(self, rng, n):
        return sample_stationary(self.params, rng, n)


@dataclass(frozen=True)
class _FixedPhase:
    params: FieldParams
    phi: float

    def __call__(self, rng, n):
        return sample_fixed_phase(self.params, self.phi, rng, n)


def _observe_channels(spins, u, v):
    # spin 0 started at n = 1, spin 1 at rho21 = 1/2
    return {"N": spins[0, 2], "R": spins[1, 0] + 1j * spins[1, 1]}


def _observe_state(spins, u, v):
    return {"s": spins[0]}


# --------------------------------------------------------------------------
# ensemble and conditional averages


def ensemble_average(params: FieldParams, n_traj: int, t_max: float, dt: Optional[float] = None,
                     r0_state: Optional[DensityVector] = None, seed: int = 0, n_out: int = 100,
                     chunk: int = DEFAULT_CHUNK, workers: int = 0):
    """Monte Carlo N(t) and R(t) with standard errors.

    By default the population channel starts from n = 1 and the coherence
    channel from rho12 = rho21 = 1/2, both on the same field paths.  With
    ``r0_state`` given, N = <n(t)>/n(0) and R = <rho21(t)>/rho21(0) are
    taken from that single state (either may then be None).

    R is returned complex; its ``meta["stderr_imag"]`` holds the error of
    the imaginary part, which should be consistent with zero.
    """
    dt, n_steps, stride = _step_grid(t_max, dt, params, n_out)
    if r0_state is None:
        spins0 = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        scale_n, scale_r = 1.0, 1.0
    else:
        s0 = r0_state.pseudospin
        spins0 = np.array([s0, s0])
        scale_n = s0[2] if abs(s0[2]) > 0 else None
        c0 = complex(s0[0], s0[1])
        scale_r = c0 if abs(c0) > 0 else None
    stats = _moments(params, _Stationary(params), spins0, dt, n_steps, stride, _observe_channels,
                     seed, _TAG_ENSEMBLE, n_traj, chunk, workers)
    times = np.arange(len(stats)) * stride * dt
    meta = {"source": "montecarlo", "n_traj": n_traj, "dt": dt, "seed": seed,
            "nu": params.nu, "omega0": params.omega0}
    n_curve = r_curve = None
    if scale_n is not None:
        n = np.array([s["N"][0] for s in stats]).real / scale_n
        n_err = np.array([s["N"][1] for s in stats]) / abs(scale_n)
        n_curve = RelaxationCurve(times, n, n_err, label="N", meta=dict(meta))
    if scale_r is not None:
        r = np.array([s["R"][0] for s in stats]) / scale_r
        re_err = np.array([s["R"][1] for s in stats])
        im_err = np.array([s["R"][2] for s in stats])
        # rotate the errors with the normalisation; exact for real scale
        err = np.hypot(re_err, im_err) / abs(scale_r) if np.imag(scale_r) else re_err / abs(scale_r)
        err_im = im_err / abs(scale_r) if not np.imag(scale_r) else err
        r_curve = RelaxationCurve(times, r, err, label="R", meta=dict(meta, stderr_imag=err_im))
    return n_curve, r_curve


@dataclass
class ConditionalAverage:
    """Density matrix averaged over paths with a fixed initial field phase."""

    phi_prime: float
    times: np.ndarray
    rho_series: np.ndarray
    n_samples: int
    stderr_series: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        rho = np.asarray(self.rho_series)
        if rho.shape[-2:] != (2, 2) or len(rho) != len(self.times):
            raise ValueError("rho_series must have shape (len(times), 2, 2)")
        if np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))).max() > 1e-12:
            raise ValueError("conditional density matrices must be Hermitian")
        if np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1).max() > 1e-12:
            raise ValueError("conditional density matrices must have unit trace")


def conditional_average(params: FieldParams, r0_state: DensityVector, phi_prime: float,
                        n_traj: int, t_max: float, dt: Optional[float] = None, seed: int = 0,
                        n_out: int = 100, chunk: int = DEFAULT_CHUNK, workers: int = 0
                        ) -> ConditionalAverage:
    """Average density matrix for paths whose initial field phase is phi'.

    The initial amplitude is drawn from its stationary radial law, so the
    radial integral is done by sampling.
    """
    if not isinstance(r0_state, DensityVector):
        r0_state = DensityVector.from_matrix(r0_state)
    dt, n_steps, stride = _step_grid(t_max, dt, params, n_out)
    spins0 = r0_state.pseudospin[None, :]
    stats = _moments(params, _FixedPhase(params, float(phi_prime)), spins0, dt, n_steps, stride,
                     _observe_state, seed, _TAG_CONDITIONAL, n_traj, chunk, workers)
    times = np.arange(len(stats)) * stride * dt
    s_mean = np.array([s["s"][0].real for s in stats])
    s_err = np.array([s["s"][1] for s in stats])
    r = np.stack([0.5 * (s_mean[:, 0] - 1j * s_mean[:, 1]), s_mean[:, 2],
                  0.5 * (s_mean[:, 0] + 1j * s_mean[:, 1])], axis=-1)
    rho = vector_to_matrix(r)
    # error of each lab-basis entry: diagonals carry n/2, off-diagonals (sx, sy)/2
    err = np.empty(rho.shape, dtype=complex)
    err[:, 0, 0] = err[:, 1, 1] = 0.5 * s_err[:, 2]
    err[:, 0, 1] = err[:, 1, 0] = 0.5 * (s_err[:, 0] + 1j * s_err[:, 1])
    return ConditionalAverage(float(phi_prime), times, rho, n_traj, err,
                              meta={"dt": dt, "seed": seed, "nu": params.nu,
                                    "rho0": r0_state.matrix()})


def pointer_project(cond: ConditionalAverage):
    """Conditional matrices in the pointer basis, with propagated errors.

    Returns (rho', stderr') where the errors of the real and imaginary parts
    are carried in the real and imaginary parts of ``stderr'``.
    """
    basis = PointerBasis(cond.phi_prime)
    rho_p = basis.to_pointer(cond.rho_series)
    # errors: propagate the pseudospin-component errors linearly
    s = basis.transform
    err = cond.stderr_series
    var_re = np.zeros(rho_p.shape)
    var_im = np.zeros(rho_p.shape)
    # rho = 1/2 + (n/2) Z + (sx/2) X + (sy/2) Y ; each Pauli term maps separately
    paulis = [(np.array([[1, 0], [0, -1]]), err[:, 0, 0].real),
              (np.array([[0, 1], [1, 0]]), err[:, 0, 1].real),
              (np.array([[0, -1j], [1j, 0]]), err[:, 0, 1].imag)]
    for p, e in paulis:
        m = s.conj().T @ p @ s
        var_re += (e[:, None, None] * np.abs(m.real)) ** 2
        var_im += (e[:, None, None] * np.abs(m.imag)) ** 2
    return rho_p, np.sqrt(var_re) + 1j * np.sqrt(var_im)


# --------------------------------------------------------------------------
# forward / backward partial averages


def _observe_green_phase(spins, u, v):
    # spins[i] is the image of the i-th pseudospin basis vector: rotation columns
    rot = np.transpose(spins, (2, 1, 0))
    g = rotation_to_green(rot)
    return {"G": np.transpose(g, (1, 2, 0)), "phi": np.arctan2(v, u)}


def _demodulate(g, phi):
    """Strip the phase dependence G_ij(phi) = exp(i (i - j) phi) g_ij."""
    idx = np.arange(3)
    m = (idx[:, None] - idx[None, :])[..., None]
    return g * np.exp(-1j * m * phi)


@dataclass
class ForwardBackwardReport:
    t: float
    n_bins: int
    forward: np.ndarray
    forward_err: np.ndarray
    backward: np.ndarray
    backward_err: np.ndarray
    counts: np.ndarray
    z: np.ndarray
    n_spread_chi2: float
    n_spread_dof: int

    @property
    def max_z(self) -> float:
        return float(np.max(self.z))

    @property
    def passed(self) -> bool:
        return self.max_z <= 3.0


class InsufficientOccupancyError(RuntimeError):
    def __init__(self, counts, minimum):
        self.counts = list(map(int, counts))
        super().__init__(f"phase bins need at least {minimum} samples, got {self.counts}")


def _binned_green(params, init_field, t, dt, n_traj, seed, tag, chunk, n_bins, by_final):
    """Demodulated per-path Green functions accumulated per phase bin."""
    if n_traj < 2:
        raise ValueError("n_traj must be at least 2")
    n_steps = max(1, int(math.ceil(t / dt - 1e-9))) if t > 0 else 0
    dt = t / n_steps if n_steps else dt
    s1 = np.zeros((n_bins, 3, 3), dtype=complex)
    s2r = np.zeros((n_bins, 3, 3))
    s2i = np.zeros((n_bins, 3, 3))
    counts = np.zeros(n_bins, dtype=int)
    sizes = [chunk] * (n_traj // chunk) + ([n_traj % chunk] if n_traj % chunk else [])
    for c, n in enumerate(sizes):
        rng = stream(seed, tag, c)
        if by_final:
            # forward: stationary start, bin by the final phase
            recs = _run_chunk(params, init_field, np.eye(3), dt, n_steps, max(n_steps, 1),
                              _observe_green_phase, rng, n)
            g, phi = recs[-1]["G"], recs[-1]["phi"]
            b = (np.mod(phi, 2 * np.pi) / (2 * np.pi) * n_bins).astype(int) % n_bins
            gd = _demodulate(g, phi)
            for k in range(n_bins):
                mask = b == k
                s1[k] += gd[..., mask].sum(axis=-1)
                s2r[k] += (gd[..., mask].real ** 2).sum(axis=-1)
                s2i[k] += (gd[..., mask].imag ** 2).sum(axis=-1)
                counts[k] += int(mask.sum())
        else:
            # backward: each bin is its own run at the bin-centre phase
            per = np.full(n_bins, n // n_bins)
            per[: n % n_bins] += 1
            for k in range(n_bins):
                phi_k = (k + 0.5) * 2 * np.pi / n_bins
                krng = stream(seed, tag, c, k)
                recs = _run_chunk(params, _FixedPhase(params, phi_k), np.eye(3), dt, n_steps,
                                  max(n_steps, 1), _observe_green_phase, krng, int(per[k]))
                gd = _demodulate(recs[-1]["G"], phi_k)
                s1[k] += gd.sum(axis=-1)
                s2r[k] += (gd.real ** 2).sum(axis=-1)
                s2i[k] += (gd.imag ** 2).sum(axis=-1)
                counts[k] += int(per[k])
    return s1, s2r, s2i, counts


def _bin_stats(s1, s2r, s2i, counts):
    n = np.maximum(counts, 1)[:, None, None]
    mean = s1 / n
    denom = np.maximum(counts - 1, 1)[:, None, None]
    var_re = np.maximum(s2r - n * mean.real**2, 0.0) / denom / n
    var_im = np.maximum(s2i - n * mean.imag**2, 0.0) / denom / n
    return mean, np.sqrt(var_re), np.sqrt(var_im)


def forward_backward_check(params: FieldParams, n_traj: int, t: float, dt: Optional[float] = None,
                           seed: int = 0, n_bins: int = 8, chunk: int = DEFAULT_CHUNK,
                           min_count: int = 100) -> ForwardBackwardReport:
    """Compare forward and backward phase-resolved partial averages.

    Forward: stationary start, paths binned by final field phase.  Backward:
    paths started at the bin-centre phase.  Both are demodulated so each bin
    estimates the phase-free matrix; the relation to check is
    g~_ij = s_i^-2 g_ji s_j^2 with s = diag(-sqrt2, 1, sqrt2), which is the
    phase-resolved identity G~(phi') = S^-2 G^T(-phi') S^2 once the phase
    factors are removed.  Bin k of the backward run is matched with the
    forward bin containing -phi'_k.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    dt = default_dt(params) if dt is None else dt
    fwd = _binned_green(params, _Stationary(params), t, dt, n_traj, seed, _TAG_FORWARD, chunk,
                        n_bins, True)
    if np.any(fwd[3] < min_count):
        raise InsufficientOccupancyError(fwd[3], min_count)
    bwd = _binned_green(params, None, t, dt, n_traj, seed, _TAG_BACKWARD, chunk, n_bins, False)
    f_mean, f_re, f_im = _bin_stats(*fwd)
    b_mean, b_re, b_im = _bin_stats(*bwd)
    s2 = SPIN1_SCALE**2
    w = (1.0 / s2)[:, None] * s2[None, :]
    mirror = (n_bins - 1 - np.arange(n_bins))
    pred = np.swapaxes(f_mean[mirror], 1, 2) * w
    pred_re = np.swapaxes(f_re[mirror], 1, 2) * w
    pred_im = np.swapaxes(f_im[mirror], 1, 2) * w
    diff = b_mean - pred
    sigma = np.sqrt(b_re**2 + b_im**2 + pred_re**2 + pred_im**2)
    z = np.where(sigma > 0, np.abs(diff) / np.where(sigma > 0, sigma, 1.0),
                 np.where(np.abs(diff) > 1e-12, np.inf, 0.0))
    # spread of the forward N entry across bins
    nmean = f_mean[:, 1, 1].real
    nerr = f_re[:, 1, 1]
    wts = np.divide(1.0, nerr**2, out=np.zeros_like(nerr), where=nerr > 0)
    if wts.sum() > 0:
        pooled = float((wts * nmean).sum() / wts.sum())
        chi2 = float((wts * (nmean - pooled) ** 2).sum())
    else:
        chi2 = 0.0
    return ForwardBackwardReport(t, n_bins, f_mean, np.hypot(f_re, f_im), b_mean,
                                 np.hypot(b_re, b_im), fwd[3], z, chi2, n_bins - 1)


# --------------------------------------------------------------------------
# time-step accuracy


@dataclass
class AccuracyReport:
    """Step-halving comparison of a run at ``dt`` with one at ``dt / 2``.

    ``bias`` is the paired mean difference of n(t) (the error that reaches
    ensemble averages, second order in dt); ``strong`` is the largest rms
    per-path distance between the two pseudospins (first order in dt,
    because the field noise is resolved only at the step ends).
    """

    dt: float
    times: np.ndarray
    bias: np.ndarray
    stderr: np.ndarray
    strong: float
    tolerance: float
    strong_tolerance: float

    @property
    def max_bias(self) -> float:
        return float(np.max(np.abs(self.bias)))

    @property
    def passed(self) -> bool:
        weak_ok = np.all(np.abs(self.bias) <= self.tolerance + 3 * self.stderr)
        return bool(weak_ok and self.strong <= self.strong_tolerance)


def propagator_accuracy(params: FieldParams, dt: float, t_max: float, n_traj: int = 4000,
                        seed: int = 0, tolerance: float = 1e-3, strong_tolerance: float = 0.02,
                        n_out: int = 20) -> AccuracyReport:
    """Time-step error estimate by step halving with common random numbers.

    The coarse path is every other point of the fine one, so both runs see
    the same field and the difference isolates discretisation error.
    """
    n_steps = max(1, int(round(t_max / dt)))
    dt = t_max / n_steps
    stride = max(1, n_steps // n_out)
    rng = stream(seed, _TAG_ACCURACY, 0)
    fine_dt = 0.5 * dt
    decay, amp = ou_coefficients(params, fine_dt) if params.nu > 0 else (1.0, 0.0)
    u, v = sample_stationary(params, rng, n_traj)
    start = np.repeat(np.array([[0.0], [0.0], [1.0]])[None], n_traj, axis=2)
    fine, coarse = start.copy(), start.copy()
    bz = params.delta0
    times, bias, err = [], [], []
    strong = 0.0
    for j in range(1, n_steps + 1):
        if amp > 0:
            xi = rng.standard_normal((4, n_traj))
            um = u * decay + amp * xi[0]
            vm = v * decay + amp * xi[1]
            un = um * decay + amp * xi[2]
            vn = vm * decay + amp * xi[3]
        else:
            um, vm, un, vn = u, v, u, v
        fine = rotate(fine, 0.5 * (u + um), 0.5 * (v + vm), bz, fine_dt)
        fine = rotate(fine, 0.5 * (um + un), 0.5 * (vm + vn), bz, fine_dt)
        coarse = rotate(coarse, 0.5 * (u + un), 0.5 * (v + vn), bz, dt)
        u, v = un, vn
        if j % stride == 0 or j == n_steps:
            d = coarse[0, 2] - fine[0, 2]
            times.append(j * dt)
            bias.append(d.mean())
            err.append(d.std(ddof=1) / math.sqrt(n_traj))
            strong = max(strong, float(np.sqrt(((coarse - fine) ** 2).sum(axis=1).mean())))
    return AccuracyReport(dt, np.array(times), np.array(bias), np.array(err), strong,
                          tolerance, strong_tolerance)
