"""Regenerate tests/oracle_values.py from arbitrary-precision evaluations.

The values are computed with mpmath at 40 significant digits, by routes
that do not share code with the package (quadrature, direct hypergeometric
series, root finding), then written out as float literals.
"""

import os

import mpmath as mp

mp.mp.dps = 40
K = 1 / mp.sqrt(2)


def dawson_quad(z):
    z = mp.mpf(z)
    return mp.exp(-z * z) * mp.quad(lambda y: mp.exp(y * y), [0, z])


def n_static(x):
    x = mp.mpf(x)
    return 1 - x * dawson_quad(x / 2)


def main():
    out = {}
    out["DAWSON"] = {z: dawson_quad(z) for z in (0.001, 0.1, 0.5, 1.0, 2.0, 3.9, 4.1, 6.0, 10.0, 30.0)}
    zmax = mp.findroot(lambda z: mp.diff(dawson_quad, z), 0.92)
    out["DAWSON_MAX"] = (zmax, dawson_quad(zmax))
    out["KUMMER"] = {z: mp.hyp1f1(K, 2 * K + 1, z) for z in (-0.1, -1.0, -5.0, -20.0, -45.0, -100.0)}
    out["GAUSS"] = {x: mp.hyp2f1(K, K, 1 + 2 * K, x) for x in (0.1, float(mp.exp(-2)), 0.45, 0.5, 0.55, 0.8, 0.95, 0.999, 1.0)}
    out["GAMMA"] = {x: mp.gamma(x) for x in (0.1, 0.5, 1.0 + float(K), 1.0 + 2 * float(K), 3.7, 12.5)}
    out["DIGAMMA"] = {x: mp.digamma(x) for x in (0.1, 0.5, 1.0 + float(K), 3.7, 12.5)}
    g = mp.euler
    out["CONSTANTS"] = {
        "C0": mp.mpf(5) / 3 - g / 2,
        "C1": mp.gamma(1 + K) ** 2 / mp.gamma(1 + 2 * K),
        "C2": mp.gamma(1 + K) / mp.gamma(1 + 2 * K),
        "C3": 1 + 2 * K - 2 * mp.digamma(1 + K) - 2 * g - mp.log(2),
    }
    x0 = mp.findroot(n_static, 1.85)
    xmin = mp.findroot(lambda x: mp.diff(n_static, x), 3.0)
    out["NSTATIC"] = {"zero": x0, "argmin": xmin, "min": n_static(xmin),
                      "at": {x: n_static(x) for x in (0.5, 1.0, 2.0, 5.0, 8.0, 20.0)}}
    c1 = out["CONSTANTS"]["C1"]
    out["K0"] = {nt: c1 * mp.exp(-2 * K * nt) * mp.hyp2f1(K, K, 1 + 2 * K, mp.exp(-2 * nt))
                 for nt in (0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0)}

    def fmt(v):
        if isinstance(v, dict):
            return "{" + ", ".join(f"{fmt(k)}: {fmt(x)}" for k, x in v.items()) + "}"
        if isinstance(v, tuple):
            return "(" + ", ".join(fmt(x) for x in v) + ")"
        if isinstance(v, str):
            return repr(v)
        return repr(float(v))

    path = os.path.join(os.path.dirname(__file__), "..", "tests", "oracle_values.py")
    with open(path, "w") as fh:
        fh.write('"""Frozen reference values; regenerate with scripts/make_oracles.py."""\n\n')
        for k, v in out.items():
            fh.write(f"{k} = {fmt(v)}\n\n")


if __name__ == "__main__":
    main()
