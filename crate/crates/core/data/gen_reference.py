#!/usr/bin/env python3
"""Arbitrary-precision reference values for the Mittag-Leffler kernel.

Regenerate with `python3 gen_reference.py > reference.csv`. The output is
frozen into the repository and consumed by the Rust test suites and by
`mlnoise validate`; nothing in this script shares code with the Rust
evaluator.

Routes:
  * direct power series  sum (-x)^k / Gamma(lam*k + 1)  at a working
    precision sized to the largest term (+60 guard digits);
  * for x^(1/lam) > 300, where the series would need thousands of digits,
    the optimally truncated algebraic expansion
    -sum_k (-x)^-k / Gamma(1 - lam*k)  (+ the two pole residues when lam > 1),
    whose truncation error is below exp(-300). The two routes are
    cross-checked on an overlap band before any row is emitted.

Rows: kind,lam,param,x,value
  ml      E_lam(-x)
  erfc    exp(x^2) erfc(x)                     (closed form of E_1/2(-x))
  gamma   Gamma(x)
  msd     2 c0 t^2 E_{lam,3}(-(t/tau)^lam)     (param = tau, x = t, C = 1)
"""
import sys
import mpmath as mp

GUARD = 60
SWITCH = 300


def series(lam, x, beta=1):
    lam = mp.mpf(lam)
    x = mp.mpf(x)
    if x == 0:
        return mp.rgamma(beta)
    t = float(x) ** (1.0 / float(lam))
    digits = int(t / 2.302585) + GUARD
    with mp.workdps(digits):
        s = mp.mpf(0)
        k = 0
        tiny = mp.mpf(10) ** (-(GUARD + 20))
        while True:
            term = (-x) ** k * mp.rgamma(lam * k + beta)
            s += term
            if k * float(lam) > t + 20 and abs(term) < tiny * abs(s):
                break
            k += 1
        return +s


def asymptotic(lam, x):
    lam = mp.mpf(lam)
    x = mp.mpf(x)
    t = x ** (1 / lam)
    s = mp.mpf(0)
    k = 1
    prev = mp.inf
    while True:
        term = (-x) ** (-k) * mp.rgamma(1 - lam * k)
        # |1/Gamma(1 - lam k)| <= Gamma(lam k) / pi, so this bounds every term size
        mag = mp.gamma(lam * k) * x ** (-k)
        if mag > prev or (k > 1 and mag < mp.mpf(10) ** -45 * abs(s)):
            break
        prev = mag
        s -= term
        k += 1
        if k > 100000:
            raise RuntimeError("asymptotic series did not reach its smallest term")
    if lam > 1:
        s += 2 / lam * mp.exp(t * mp.cos(mp.pi / lam)) * mp.cos(t * mp.sin(mp.pi / lam))
    return s


def ml(lam, x):
    if x == 0:
        return mp.mpf(1)
    if lam == 1:
        return mp.exp(-mp.mpf(x))
    t = float(x) ** (1.0 / lam)
    if t <= SWITCH:
        return series(lam, x)
    return asymptotic(lam, x)


def cross_check():
    for lam in (0.3, 0.6, 0.9, 1.2, 1.5, 1.8):
        for t in (150.0, 220.0, 300.0):
            x = mp.mpf(t) ** lam
            a = series(lam, x)
            b = asymptotic(lam, x)
            rel = abs(a - b) / abs(a)
            if rel > mp.mpf(10) ** -40:
                raise RuntimeError(f"series/asymptotic mismatch lam={lam} t={t} rel={rel}")


def main():
    mp.mp.dps = 50
    cross_check()
    out = sys.stdout
    out.write("kind,lam,param,x,value\n")
    lams = (0.3, 0.6, 0.9, 1.0, 1.2, 1.5, 1.8)
    xs = [mp.mpf(10) ** (-3 + mp.mpf(7) * i / 39) for i in range(40)]
    for lam in lams:
        for x in xs:
            v = ml(lam, x)
            out.write(f"ml,{lam},0,{mp.nstr(x, 30)},{mp.nstr(v, 30)}\n")
    # spot values used by unit tests
    for lam, x in ((0.5, 1), (0.6, 1), (0.6, 1000), (1.8, 10), (1.8, 50)):
        out.write(f"ml,{lam},0,{x},{mp.nstr(ml(lam, x), 30)}\n")
    for x in ("0.001", "0.1", "0.5", "0.75", "1.5", "2.5", "3.3", "7.77", "10.5", "33.3", "99.9", "150.25", "170.5"):
        out.write(f"gamma,0,0,{x},{mp.nstr(mp.gamma(mp.mpf(x)), 30)}\n")
    for i in range(25):
        x = mp.mpf(10) ** (-3 + mp.mpf(5) * i / 24)
        v = mp.exp(x * x) * mp.erfc(x)
        out.write(f"erfc,0.5,0,{mp.nstr(x, 30)},{mp.nstr(v, 30)}\n")
    for lam in (0.3, 0.6, 1.0, 1.2, 1.8):
        for tau in (5, 20):
            c0 = mp.mpf(tau) ** (-mp.mpf(lam))
            for t in (1, 3, 10, 20, 50, 100):
                x = (mp.mpf(t) / tau) ** mp.mpf(lam)
                v = 2 * c0 * mp.mpf(t) ** 2 * series(lam, x, beta=3)
                out.write(f"msd,{lam},{tau},{t},{mp.nstr(v, 30)}\n")
    # memory times below one step
    for lam in (0.3, 1.2, 1.8):
        c0 = mp.mpf("0.5") ** (-mp.mpf(lam))
        for t in (1, 2, 10, 100):
            x = (mp.mpf(t) / mp.mpf("0.5")) ** mp.mpf(lam)
            v = 2 * c0 * mp.mpf(t) ** 2 * series(lam, x, beta=3)
            out.write(f"msd,{lam},0.5,{t},{mp.nstr(v, 30)}\n")
    # long-time tail over [10 tau, 50 tau] at tau = 20
    for lam in (0.6, 1.2, 1.8):
        c0 = mp.mpf(20) ** (-mp.mpf(lam))
        for t in range(200, 1001, 100):
            x = (mp.mpf(t) / 20) ** mp.mpf(lam)
            v = 2 * c0 * mp.mpf(t) ** 2 * series(lam, x, beta=3)
            out.write(f"msd,{lam},20,{t},{mp.nstr(v, 30)}\n")


if __name__ == "__main__":
    main()
