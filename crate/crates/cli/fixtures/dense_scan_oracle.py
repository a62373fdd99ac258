"""Independent root-count oracle for the battery fixtures.

Norms come from mpmath quadrature / maximization of the base solution (no
closed forms). Each fixture's reduced equation g(s) = target is sampled on
10^6 log-spaced points over the solver's default scan range. The count is
sign changes plus sampled local minima of |g - target| that a 40-digit
golden-section refinement drives below 1e-9 * max(1, target) (tangencies).

Usage: python3 dense_scan_oracle.py > oracle_counts.toml
"""

import math
import pathlib

import mpmath as mp
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

mp.mp.dps = 40
POINTS = 1_000_000


def sphere_area(n):
    return 2 * mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2)


def radial_norm(f, p, n, lo, hi, peaks):
    if p == "inf":
        best = max(abs(f(mp.mpf(r))) for r in peaks)
        return best
    p = mp.mpf(p)
    pts = [lo] + [r for r in peaks if lo < r < hi] + [hi]
    integral = mp.quad(lambda r: abs(f(r)) ** p * r ** (n - 1), pts)
    return (sphere_area(n) * integral) ** (1 / p)


def maximize(f, lo, hi):
    xs = np.geomspace(float(lo), float(hi), 20001)
    vals = [abs(f(mp.mpf(x))) for x in xs]
    i = int(np.argmax(vals))
    a, b = mp.mpf(xs[max(i - 1, 0)]), mp.mpf(xs[min(i + 1, len(xs) - 1)])
    g = (mp.sqrt(5) - 1) / 2
    for _ in range(200):
        c, d = b - g * (b - a), a + g * (b - a)
        if abs(f(c)) > abs(f(d)):
            b = d
        else:
            a = c
    x = (a + b) / 2
    return [x, mp.mpf(xs[0]), mp.mpf(xs[-1])]


def base_norms(cfg):
    geom = cfg["geometry"]
    n = geom["N"]
    if geom["type"] == "ball":
        R = mp.mpf(geom.get("R", 1.0))
        u = lambda r: (r * r - R * R) / 2
        du = lambda r: r
        lo, hi = mp.mpf(0), R
        peaks_u = [mp.mpf(0)]
        peaks_g = [R]
    else:
        u = lambda r: (r ** (-n) - r ** (2 - n)) / 2
        du = lambda r: (-n * r ** (-n - 1) + (n - 2) * r ** (1 - n)) / 2
        lo, hi = mp.mpf(1), mp.inf
        if n == 2:
            peaks_u = [mp.mpf(10) ** 40]
        else:
            peaks_u = maximize(u, 1, 1e6)
        peaks_g = maximize(du, 1, 1e6)
        kink = mp.sqrt(mp.mpf(n) / (n - 2)) if n > 2 else None
        if kink is not None:
            peaks_g = peaks_g + [kink]
    nu = radial_norm(u, cfg["p"], n, lo, hi, peaks_u)
    ng = radial_norm(du, cfg["q"], n, lo, hi, peaks_g)
    return nu, ng


def kernel_fn(text, lib):
    src = text.replace("^", "**")
    env = {"exp": lib.exp, "log": lib.log, "sqrt": lib.sqrt, "abs": abs, "min": min, "max": max}
    return lambda s, t: eval(src, {"__builtins__": {}}, dict(env, s=s, t=t))


def count(cfg):
    n, k, lam = cfg["geometry"]["N"], cfg["k"], cfg["lambda"]
    nu, ng = base_norms(cfg)
    rho = ng / nu
    C = math.comb(n, k)
    target = lam * float(nu) ** k
    scan = cfg.get("scan", {})
    s_min = scan.get("s_min", 1e-8)
    s_max = scan.get("s_max", max(10 * (target / C) ** (1 / k), 1e3))
    s = np.geomspace(s_min, s_max, POINTS)
    M = kernel_fn(cfg["kernel"], np)
    h = C * s ** k * M(s, float(rho) * s) - target
    if np.ndim(h) == 0 or np.shape(h) != s.shape:
        h = np.full_like(s, float(h))

    sign = np.sign(h)
    crossings = int(np.sum(sign[:-1] * sign[1:] < 0)) + int(np.sum(h == 0))

    Mp = kernel_fn(cfg["kernel"], mp)
    tgt = mp.mpf(lam) * nu ** k
    hp = lambda x: C * x ** k * Mp(x, rho * x) - tgt
    a = np.abs(h)
    cand = np.where((a[1:-1] < a[:-2]) & (a[1:-1] <= a[2:]) & (sign[:-2] == sign[1:-1]) & (sign[1:-1] == sign[2:]))[0] + 1
    thresh = 1e-9 * max(1.0, target)
    tangent = 0
    g = (mp.sqrt(5) - 1) / 2
    for i in cand:
        lo_, hi_ = mp.mpf(s[i - 1]), mp.mpf(s[i + 1])
        for _ in range(150):
            c, d = hi_ - g * (hi_ - lo_), lo_ + g * (hi_ - lo_)
            if abs(hp(c)) < abs(hp(d)):
                hi_ = d
            else:
                lo_ = c
        if abs(hp((lo_ + hi_) / 2)) <= thresh:
            tangent += 1
    return crossings, tangent, float(nu), float(ng)


def main():
    here = pathlib.Path(__file__).parent
    print("# Root counts from dense_scan_oracle.py (10^6-point scan). Regenerate with")
    print("#   python3 dense_scan_oracle.py > oracle_counts.toml")
    for path in sorted(here.glob("*.toml")):
        if path.name == "oracle_counts.toml":
            continue
        cfg = tomllib.loads(path.read_text())
        crossings, tangent, nu, ng = count(cfg)
        print(f"\n[{path.stem}]")
        print(f"count = {crossings + tangent}")
        print(f"transversal = {crossings}")
        print(f"tangential = {tangent}")
        print(f"norm_u = {nu!r}")
        print(f"norm_grad = {ng!r}")


if __name__ == "__main__":
    main()
