"""Special functions used by the closed-form relaxation theory.

Everything here is scalar, pure and thread-safe.  The routines are written
for the argument ranges the theory actually visits (real arguments, moderate
parameters) and refuse the rest instead of returning something doubtful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 2.220446049250313e-16
SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 100_000

EULER_GAMMA = 0.5772156649015329

#: Exponent of the coherence tail, k = 1/sqrt(2).
K = 1.0 / math.sqrt(2.0)

# Kummer M(a, b, -z) switches to its large-|z| expansion above this.
_KUMMER_ASYMPTOTIC_Z = 40.0
# Dawson: Taylor series below, continued fraction above.
_DAWSON_SWITCH = 4.0


class SeriesConvergenceError(ArithmeticError):
    """A series or continued fraction did not settle within the term cap."""

    def __init__(self, name, args, n_terms, last_term, partial_sum):
        self.name = name
        self.args_ = args
        self.n_terms = n_terms
        self.last_term = last_term
        self.partial_sum = partial_sum
        super().__init__(
            f"{name}{args}: no convergence after {n_terms} terms "
            f"(last term {last_term:.3e}, partial sum {partial_sum:.6e})"
        )


@dataclass(frozen=True)
class EvalResult:
    value: float
    est_error: float

    def __float__(self):
        return float(self.value)


def _check_finite(name, *xs):
    for x in xs:
        if not math.isfinite(x):
            raise ValueError(f"{name}: non-finite argument {x!r}")


# --------------------------------------------------------------------------
# Dawson's integral


def dawson_eval(z: float) -> EvalResult:
    """Dawson's integral F(z) = exp(-z^2) * int_0^z exp(y^2) dy."""
    z = float(z)
    _check_finite("dawson", z)
    if z < 0:
        r = dawson_eval(-z)
        return EvalResult(-r.value, r.est_error)
    if z == 0.0:
        return EvalResult(0.0, 0.0)
    if z > 1e8:
        # 1/(2z) * (1 + 1/(2z^2)) is exact to double precision here
        v = 0.5 / z
        return EvalResult(v, v * EPS)
    if z <= _DAWSON_SWITCH:
        return _dawson_series(z)
    return _dawson_cf(z)


def dawson(z: float) -> float:
    return dawson_eval(z).value


def _dawson_series(z):
    # exp(-z^2) * sum z^(2n+1) / (n! (2n+1)); every term is positive
    z2 = z * z
    power = z  # z^(2n+1)/n!
    total = z
    n = 0
    while True:
        n += 1
        power *= z2 / n
        term = power / (2 * n + 1)
        total += term
        if term <= SERIES_RTOL * total:
            break
        if n > SERIES_MAX_TERMS:
            raise SeriesConvergenceError("dawson", (z,), n, term, total)
    v = math.exp(-z2) * total
    return EvalResult(v, abs(v) * (n + 2) * EPS)


def _dawson_cf(z):
    # F(z) = z / (1 + 2z^2 - 4z^2 / (3 + 2z^2 - 8z^2 / (5 + 2z^2 - ...)))
    # evaluated with the modified Lentz algorithm
    tiny = 1e-300
    z2 = z * z
    f = 1.0 + 2.0 * z2
    c = f
    d = 0.0
    n = 0
    while True:
        n += 1
        a = -4.0 * n * z2
        b = (2 * n + 1) + 2.0 * z2
        d = b + a * d
        d = tiny if d == 0.0 else d
        c = b + a / c
        c = tiny if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < SERIES_RTOL:
            break
        if n > SERIES_MAX_TERMS:
            raise SeriesConvergenceError("dawson", (z,), n, delta - 1.0, z / f)
    v = z / f
    return EvalResult(v, abs(v) * (n + 2) * EPS)


# --------------------------------------------------------------------------
# Gamma and digamma


def gamma_fn(x: float) -> float:
    """Euler's Gamma function for x > 0."""
    x = float(x)
    _check_finite("gamma_fn", x)
    if x <= 0:
        raise ValueError(f"gamma_fn: x must be positive, got {x}")
    return math.gamma(x)


def digamma(x: float) -> float:
    """psi(x) = d ln Gamma(x) / dx for x > 0.

    Upward recurrence to x >= 10, then the Stirling-type asymptotic series.
    """
    x = float(x)
    _check_finite("digamma", x)
    if x <= 0:
        raise ValueError(f"digamma: x must be positive, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    x2 = 1.0 / (x * x)
    # Bernoulli terms B_2n / (2n x^2n), n = 1..7
    tail = x2 * (1 / 12 - x2 * (1 / 120 - x2 * (1 / 252 - x2 * (
        1 / 240 - x2 * (1 / 132 - x2 * (691 / 32760 - x2 / 12))))))
    return acc + math.log(x) - 0.5 / x - tail


def _pochhammer(a, n):
    p = 1.0
    for i in range(n):
        p *= a + i
    return p


# --------------------------------------------------------------------------
# Confluent hypergeometric (Kummer) function


def kummer_m_eval(a: float, b: float, z: float) -> EvalResult:
    """Kummer's function M(a, b, z) for real arguments.

    For z < 0 with b > 0 the value is computed from the Kummer
    transformation e^z M(b-a, b, -z), whose terms do not cancel (for
    b - a > 0 they are all positive), or from the large-|z| expansion once
    |z| > 40 and b - a > 0.
    """
    a, b, z = float(a), float(b), float(z)
    _check_finite("kummer_m", a, b, z)
    if b <= 0 and b == math.floor(b):
        raise ValueError(f"kummer_m: b must not be a nonpositive integer, got {b}")
    if z == 0.0 or a == 0.0:
        return EvalResult(1.0, 0.0)
    if z < 0 and b > 0:
        # e^z M(b-a, b, -z): no cancellation between large terms
        if -z > _KUMMER_ASYMPTOTIC_Z and b - a > 0:
            return _kummer_asymptotic_negative(a, b, -z)
        s = _kummer_series(b - a, b, -z)
        scale = math.exp(z)
        return EvalResult(scale * s.value, scale * s.est_error)
    return _kummer_series(a, b, z)


def kummer_m(a: float, b: float, z: float) -> float:
    return kummer_m_eval(a, b, z).value


def _kummer_series(a, b, z):
    term = 1.0
    total = 1.0
    abs_total = 1.0
    n = 0
    while True:
        term *= (a + n) / (b + n) * z / (n + 1)
        n += 1
        total += term
        abs_total += abs(term)
        if term == 0.0 or (abs(term) < SERIES_RTOL * abs(total) and n > abs(z)):
            break
        if n >= SERIES_MAX_TERMS:
            raise SeriesConvergenceError("kummer_m", (a, b, z), n, term, total)
    return EvalResult(total, abs(term) + (n + 2) * EPS * abs_total)


def _kummer_asymptotic_negative(a, b, zeta):
    # M(a, b, -zeta) ~ Gamma(b)/Gamma(b-a) zeta^-a sum (a)_s (a-b+1)_s / (s! zeta^s)
    # plus an exponentially small e^-zeta piece that is bounded below.
    term = 1.0
    total = 1.0
    s = 0
    smallest = 1.0
    while True:
        nxt = term * (a + s) * (a - b + 1 + s) / ((s + 1) * zeta)
        if abs(nxt) >= abs(term) and s > 0:
            break  # series started to diverge; stop at the smallest term
        term = nxt
        s += 1
        total += term
        smallest = abs(term)
        if smallest < SERIES_RTOL * abs(total) or term == 0.0:
            break
        if s >= SERIES_MAX_TERMS:
            raise SeriesConvergenceError("kummer_m", (a, b, -zeta), s, term, total)
    lead = math.exp(math.lgamma(b) - math.lgamma(b - a) - a * math.log(zeta))
    lead *= math.copysign(1.0, math.gamma(b)) * math.copysign(1.0, math.gamma(b - a))
    exp_piece = math.exp(math.lgamma(b) - math.lgamma(abs(a)) - zeta + (a - b) * math.log(zeta))
    v = lead * total
    return EvalResult(v, abs(lead) * smallest + exp_piece + abs(v) * (s + 2) * EPS)


# --------------------------------------------------------------------------
# Gauss hypergeometric function


def _gauss_series(a, b, c, x):
    term = 1.0
    total = 1.0
    abs_total = 1.0
    n = 0
    while True:
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        n += 1
        total += term
        abs_total += abs(term)
        if term == 0.0 or abs(term) < SERIES_RTOL * abs(total):
            break
        if n >= SERIES_MAX_TERMS:
            raise SeriesConvergenceError("gauss_2f1", (a, b, c, x), n, term, total)
    return EvalResult(total, abs(term) + (n + 2) * EPS * abs_total)


def _is_nonpos_int(v):
    return v <= 0 and abs(v - round(v)) < 1e-12


def _gauss_near_one(a, b, c, x):
    """Evaluate 2F1 through the linear transformation x -> 1 - x."""
    w = 1.0 - x
    m_real = c - a - b
    m = round(m_real)
    if abs(m_real - m) < 1e-9:
        if m < 0:
            raise ValueError("gauss_2f1: c - a - b must be nonnegative near x = 1")
        if _is_nonpos_int(a) or _is_nonpos_int(b):
            raise ValueError("gauss_2f1: polynomial cases are not supported near x = 1")
        return _gauss_log_case(a, b, int(m), w)
    if m_real < 0 and w == 0.0:
        raise ValueError("gauss_2f1: divergent at x = 1 for c - a - b < 0")
    for g in (c - a, c - b, a, b):
        if _is_nonpos_int(g):
            raise ValueError("gauss_2f1: parameter combination hits a Gamma pole")
    g = math.gamma
    t1 = g(c) * g(m_real) / (g(c - a) * g(c - b))
    s1 = _gauss_series(a, b, a + b - c + 1, w)
    if w == 0.0:
        return EvalResult(t1, abs(t1) * 8 * EPS)
    t2 = w ** m_real * g(c) * g(-m_real) / (g(a) * g(b))
    s2 = _gauss_series(c - a, c - b, m_real + 1, w)
    v = t1 * s1.value + t2 * s2.value
    err = abs(t1) * s1.est_error + abs(t2) * s2.est_error + 8 * EPS * (abs(t1 * s1.value) + abs(t2 * s2.value))
    return EvalResult(v, err)


def _gauss_log_case(a, b, m, w):
    # c = a + b + m with integer m >= 0: logarithmic form of the transformation
    c = a + b + m
    lg = math.lgamma
    psi = digamma
    if m == 0:
        if w == 0.0:
            raise ValueError("gauss_2f1: divergent at x = 1 for c - a - b = 0")
        pref = math.gamma(c) / (math.gamma(a) * math.gamma(b))
        lw = math.log(w)
        p1, pa, pb = psi(1.0), psi(a), psi(b)
        coef = 1.0
        total = 0.0
        abs_total = 0.0
        n = 0
        while True:
            term = coef * (2 * p1 - pa - pb - lw)
            total += term
            abs_total += abs(term)
            coef *= (a + n) * (b + n) / ((n + 1) ** 2) * w
            p1 += 1.0 / (n + 1)
            pa += 1.0 / (a + n)
            pb += 1.0 / (b + n)
            n += 1
            if abs(term) < SERIES_RTOL * abs(total) and n > 2:
                break
            if n >= SERIES_MAX_TERMS:
                raise SeriesConvergenceError("gauss_2f1", (a, b, c, 1 - w), n, term, total)
        v = pref * total
        return EvalResult(v, abs(pref) * (abs(term) + (n + 2) * EPS * abs_total))

    # finite part: Gamma(m) Gamma(c) / (Gamma(a+m) Gamma(b+m)) sum_{n<m} (a)_n (b)_n / (n! (1-m)_n) w^n
    pref1 = math.exp(lg(m) + lg(c) - lg(a + m) - lg(b + m))
    finite = 0.0
    for n in range(m):
        finite += _pochhammer(a, n) * _pochhammer(b, n) / (math.factorial(n) * _pochhammer(1 - m, n)) * w ** n
    finite *= pref1
    if w == 0.0:
        return EvalResult(finite, abs(finite) * 8 * EPS)

    # log part: -(-w)^m Gamma(c)/(Gamma(a)Gamma(b)) sum (a+m)_n (b+m)_n / (n! (n+m)!) w^n
    #           * [ln w - psi(n+1) - psi(n+m+1) + psi(a+n+m) + psi(b+n+m)]
    pref2 = -((-w) ** m) * math.gamma(c) / (math.gamma(a) * math.gamma(b))
    lw = math.log(w)
    p1, pm1, pa, pb = psi(1.0), psi(m + 1.0), psi(a + m), psi(b + m)
    coef = 1.0 / math.factorial(m)
    total = 0.0
    abs_total = 0.0
    n = 0
    while True:
        term = coef * (lw - p1 - pm1 + pa + pb)
        total += term
        abs_total += abs(term)
        coef *= (a + m + n) * (b + m + n) / ((n + 1) * (n + m + 1)) * w
        p1 += 1.0 / (n + 1)
        pm1 += 1.0 / (n + m + 1)
        pa += 1.0 / (a + n + m)
        pb += 1.0 / (b + n + m)
        n += 1
        if abs(term) < SERIES_RTOL * abs(total) and n > 2:
            break
        if n >= SERIES_MAX_TERMS:
            raise SeriesConvergenceError("gauss_2f1", (a, b, c, 1 - w), n, term, total)
    v = finite + pref2 * total
    err = abs(pref2) * (abs(term) + (n + 2) * EPS * abs_total) + 8 * EPS * abs(finite)
    return EvalResult(v, err)


def gauss_2f1_eval(a: float, b: float, c: float, x: float) -> EvalResult:
    """Gauss hypergeometric function 2F1(a, b; c; x) for 0 <= x <= 1.

    Direct series for x <= 1/2; above that the x -> 1 - x linear
    transformation, including its logarithmic form when c - a - b is a
    nonnegative integer.
    """
    a, b, c, x = float(a), float(b), float(c), float(x)
    _check_finite("gauss_2f1", a, b, c, x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"gauss_2f1: x must lie in [0, 1], got {x}")
    if _is_nonpos_int(c):
        raise ValueError(f"gauss_2f1: c must not be a nonpositive integer, got {c}")
    if x == 0.0:
        return EvalResult(1.0, 0.0)
    if x <= 0.5:
        return _gauss_series(a, b, c, x)
    return _gauss_near_one(a, b, c, x)


def gauss_2f1(a: float, b: float, c: float, x: float) -> float:
    return gauss_2f1_eval(a, b, c, x).value


# --------------------------------------------------------------------------
# Constants of the strong-coupling coherence formulas

#: C0 = 5/3 - gamma/2, intermediate-time coherence constant.
C0 = 5.0 / 3.0 - EULER_GAMMA / 2.0
#: C2 = Gamma(1+k) / Gamma(1+2k), normalisation of the K0 profile.
C2 = math.gamma(1.0 + K) / math.gamma(1.0 + 2.0 * K)
#: C1 = Gamma(1+k)^2 / Gamma(1+2k), amplitude of the long-time coherence tail.
C1 = C2 * math.gamma(1.0 + K)
#: C3 = 1 + 2k - 2 psi(1+k) - 2 gamma - ln 2.
C3 = 1.0 + 2.0 * K - 2.0 * digamma(1.0 + K) - 2.0 * EULER_GAMMA - math.log(2.0)
