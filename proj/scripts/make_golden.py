#!/usr/bin/env python3
"""One-time generator for data/golden_constants.csv.

High-precision quadrature oracle for the critical-constant families
(amplitude, gamma, c_boundary, h, c_origin). The CSV is committed; the C++
library must reproduce these values within its declared tolerances and must
never regenerate them.

Endpoint care: tanh-sinh nodes approach endpoints far closer than the working
precision, so every integrand is rewritten in a variable where the singular
endpoint sits at 0 and differences like t^p - 1 are evaluated via expm1/log1p
(no cancellation).

The script validates itself before writing anything:
  * closed-form identities (pi * amplitude(1,1) = 1, a*gamma(a,a/2) = 1,
    gamma symmetry p <-> a-1-p, gamma zeros at p in {0, a-1})
  * an independent Gamma-function closed form of the gamma integral,
    gamma(a,p) = G(-a) * [G(p+1)/G(p+1-a) + G(a-p)/G(-p) - 1/G(1-a)]  (a != 1)
  * a stability re-computation at lower precision for the nested c_origin rows

Usage: python3 scripts/make_golden.py [out.csv]
"""
import sys
from mpmath import mp, mpf, gamma as G, pi, sqrt, sin, cos, quad, inf, fabs, expm1, atanh

DPS_MAIN = 50      # amplitude / gamma / c_boundary / h rows
DPS_NESTED = 30    # c_origin rows (H(s) quadrature nested inside the s-integral)


def log1p(x):
    return 2 * atanh(x / (2 + x))


def powm1(base_minus_one, expo):
    """(1+base_minus_one)**expo - 1, stable for tiny base_minus_one."""
    return expm1(expo * log1p(base_minus_one))


def amplitude(d, a):
    return a * 2 ** (a - 1) * pi ** (-mpf(d) / 2) * G((d + a) / 2) / G(1 - a / 2)


def taming_order(sigma):
    """Power m such that t = v^m turns an integrable t^sigma endpoint
    singularity into at least v^2 (keeps tanh-sinh noise-free)."""
    from mpmath import ceil
    return int(ceil(3 / (1 + sigma))) if sigma < 1 else 1


def quad_tamed(f, b, sigma, **kw):
    """integral of f over [0, b] where f ~ t^sigma (sigma > -1) at 0."""
    m = taming_order(sigma)
    if m == 1:
        return quad(f, [0, b], **kw)
    return quad(lambda v: f(v ** m) * m * v ** (m - 1), [0, b ** (mpf(1) / m)], **kw)


def gamma_boundary(a, p):
    # left half in t (singularity only at t=0), right half in e = 1-t;
    # both with algebraic endpoint behavior substituted away
    def f_left(t):
        return (t ** p - 1) * (1 - t ** (a - p - 1)) / (1 - t) ** (1 + a)

    def f_right(e):
        return powm1(-e, p) * (-powm1(-e, a - p - 1)) * e ** (-1 - a)

    half = mpf("0.5")
    sig_left = min(p, a - p - 1, a - 1, mpf(0))
    left = quad_tamed(f_left, half, sig_left, maxdegree=10)
    right = quad_tamed(f_right, half, 1 - a, maxdegree=10)
    return left + right


def gamma_closed_form(a, p):
    # analytic continuation of the Beta integral; valid for a != 1
    return G(-a) * (G(p + 1) / G(p + 1 - a) + G(a - p) / G(-p) - 1 / G(1 - a))


def omega(k):
    # surface measure of the unit sphere S^{k-1} in R^k
    return 2 * pi ** (mpf(k) / 2) / G(mpf(k) / 2)


def c_boundary(d, a, p):
    if d == 1:
        # remark constant for the one-dimensional half-line case
        return amplitude(1, a) * gamma_boundary(a, p)
    from mpmath import beta
    surf = omega(d - 1) / 2
    return amplitude(d, a) * surf * beta((a + 1) / 2, mpf(d - 1) / 2) * gamma_boundary(a, p)


def h_profile(d, a, s):
    # integral over theta in [0, pi], split at pi/2 and written in u = |pi/2 - theta|
    # so that s^2 - sin^2(theta) = (s^2 - 1) + sin^2(u) is exact near the split
    s = mpf(s)
    pref = 2 * pi * pi ** (mpf(d - 3) / 2) / G(mpf(d - 1) / 2)
    s2m1 = (s - 1) * (s + 1)

    def f(u, sign):
        root = sqrt(s2m1 + sin(u) ** 2)
        return cos(u) ** (d - 2) * (root + sign * sin(u)) ** (1 + a) / root

    lo = quad(lambda u: f(u, 1), [0, pi / 2], maxdegree=10)   # theta in [0, pi/2]
    hi = quad(lambda u: f(u, -1), [0, pi / 2], maxdegree=10)  # theta in [pi/2, pi]
    return pref * (lo + hi)


def c_origin(d, a, p):
    # near edge in e = s-1 (stable products, e^{1-a} behavior tamed),
    # far part directly on [2, inf)
    def f_near(e):
        s = 1 + e
        return (powm1(e, p) * (-powm1(e, a - p - d)) * s
                * (e * (2 + e)) ** (-1 - a) * h_profile(d, a, s))

    def f_far(s):
        return ((s ** p - 1) * (1 - s ** (a - p - d)) * s
                * (s * s - 1) ** (-1 - a) * h_profile(d, a, s))

    near = quad_tamed(f_near, mpf(1), 1 - a, maxdegree=6)
    far = quad(f_far, [2, inf], maxdegree=6)
    return amplitude(d, a) * (near + far)


def check(label, err, tol):
    err = fabs(err)
    status = "ok" if err < tol else "FAIL"
    print(f"  [{status}] {label}: err = {mp.nstr(err, 3)} (tol {tol})")
    if err >= tol:
        sys.exit(f"oracle self-check failed: {label}")


def self_validate():
    print("self-checks (dps = %d):" % mp.dps)
    check("pi * amplitude(1,1) = 1", pi * amplitude(1, mpf(1)) - 1, mpf("1e-45"))
    for a in ["0.5", "1.0", "1.5", "1.9"]:
        a = mpf(a)
        check(f"a*gamma(a,a/2)=1, a={a}", a * gamma_boundary(a, a / 2) - 1, mpf("1e-40"))
    check("gamma(1.5, 0) = 0", gamma_boundary(mpf("1.5"), mpf(0)), mpf("1e-40"))
    check("gamma(1.5, 0.5) = 0 (p=a-1)", gamma_boundary(mpf("1.5"), mpf("0.5")), mpf("1e-40"))
    check("gamma symmetry p<->a-1-p",
          gamma_boundary(mpf("1.5"), mpf("0.9")) - gamma_boundary(mpf("1.5"), mpf("-0.4")),
          mpf("1e-40"))
    for a_s, p_s in [("1.5", "0.9"), ("0.5", "0.25"), ("1.9", "1.4"), ("1.2", "-0.5")]:
        a, p = mpf(a_s), mpf(p_s)
        check(f"gamma({a_s},{p_s}) closed form",
              gamma_boundary(a, p) - gamma_closed_form(a, p), mpf("1e-40"))


ROWS = [
    # (family, d, alpha, p_or_s)
    ("amplitude", 1, "1.0", "0"),
    ("amplitude", 1, "0.5", "0"),
    ("amplitude", 2, "1.2", "0"),
    ("amplitude", 2, "1.5", "0"),
    ("amplitude", 3, "0.8", "0"),
    ("gamma", 0, "1.5", "0.9"),
    ("gamma", 0, "1.5", "0.75"),
    ("gamma", 0, "0.5", "0.25"),
    ("gamma", 0, "1.0", "0.3"),
    ("gamma", 0, "1.2", "0.6"),
    ("gamma", 0, "1.2", "-0.5"),
    ("gamma", 0, "1.8", "1.2"),
    ("gamma", 0, "1.9", "1.4"),
    ("c_boundary", 2, "1.0", "0.5"),
    ("c_boundary", 2, "1.5", "0.9"),
    ("c_boundary", 3, "0.8", "0.4"),
    ("c_boundary", 2, "1.2", "0.6"),
    ("c_boundary", 3, "1.5", "1.0"),
    ("c_boundary", 2, "1.8", "1.2"),
    ("c_boundary", 3, "1.2", "0.9"),
    ("c_boundary", 1, "1.5", "0.75"),
    ("h", 2, "1.0", "2.0"),
    ("h", 2, "1.5", "1.0"),
    ("h", 2, "1.5", "1.1"),
    ("h", 2, "1.5", "5.0"),
    ("h", 3, "0.8", "2.0"),
    ("h", 3, "1.7", "1.5"),
    ("c_origin", 2, "1.2", "0.6"),
    ("c_origin", 2, "1.2", "0.3"),
    ("c_origin", 2, "1.2", "0.9"),
    ("c_origin", 3, "1.7", "0.3"),
    ("c_origin", 3, "1.7", "0.9"),
    ("c_origin", 3, "1.5", "1.0"),
    ("c_origin", 2, "1.5", "0.75"),
]


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/golden_constants.csv"
    mp.dps = DPS_MAIN
    self_validate()

    lines = ["family,d,alpha,p,value,abs_err_bound"]
    for family, d, a_s, p_s in ROWS:
        a, p = mpf(a_s), mpf(p_s)
        if family == "amplitude":
            mp.dps = DPS_MAIN
            v, err = amplitude(d, a), mpf("1e-45")
        elif family == "gamma":
            mp.dps = DPS_MAIN
            v, err = gamma_boundary(a, p), mpf("1e-38")
        elif family == "c_boundary":
            mp.dps = DPS_MAIN
            v, err = c_boundary(d, a, p), mpf("1e-38")
        elif family == "h":
            mp.dps = DPS_MAIN
            v, err = h_profile(d, a, p), mpf("1e-40")
        elif family == "c_origin":
            mp.dps = DPS_NESTED
            v, err = c_origin(d, a, p), mpf("1e-18")
        else:
            raise ValueError(family)
        lines.append(f"{family},{d},{a_s},{p_s},{mp.nstr(v, 32)},{mp.nstr(err, 2)}")
        print(f"  {family}(d={d}, a={a_s}, p={p_s}) = {mp.nstr(v, 20)}")

    # stability check for the nested family: recompute one row coarser
    mp.dps = 20
    v20 = c_origin(2, mpf("1.2"), mpf("0.6"))
    mp.dps = DPS_NESTED
    v30 = c_origin(2, mpf("1.2"), mpf("0.6"))
    check("c_origin(2,1.2,0.6) dps-stability", (v20 - v30) / v30, mpf("1e-14"))

    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(lines) - 1} rows)")


if __name__ == "__main__":
    main()
