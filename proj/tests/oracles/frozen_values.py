"""Independent oracles for the frozen expected values used in the C++ unit tests.

Run with: python3 tests/oracles/frozen_values.py
Uses mpmath at 50 digits; nothing here imports the C++ library.
"""
import itertools
import mpmath as mp

mp.mp.dps = 50


def standardize(col):
    n = len(col)
    mean = mp.fsum(col) / n
    var = mp.fsum((x - mean) ** 2 for x in col) / n
    sd = mp.sqrt(var)
    return [(x - mean) / sd for x in col]


def corr(a, b):
    ga, gb = standardize(a), standardize(b)
    return mp.fsum(x * y for x, y in zip(ga, gb)) / len(a)


def mp_density(lam, q, sigma2=1):
    lo = sigma2 * (1 + 1 / q - 2 * mp.sqrt(1 / q))
    hi = sigma2 * (1 + 1 / q + 2 * mp.sqrt(1 / q))
    if lam <= lo or lam >= hi:
        return mp.mpf(0)
    return q / (2 * mp.pi * sigma2) * mp.sqrt((hi - lam) * (lam - lo)) / lam


def mp_cdf(lam, q, sigma2=1):
    lo = sigma2 * (1 + 1 / q - 2 * mp.sqrt(1 / q))
    return mp.quad(lambda x: mp_density(x, q, sigma2), [lo, lam])


if __name__ == "__main__":
    print("corr((1,2,3,4),(1,2,4,3)) =", mp.nstr(corr([1, 2, 3, 4], [1, 2, 4, 3]), 20))
    col = [mp.mpf(v) for v in ("0.3", "-1.2", "2.5", "0.7", "-0.1")]
    print("standardized 5-point column =", [mp.nstr(v, 20) for v in standardize(col)])
    q = mp.mpf("74.3")
    print("mp_density(1; Q=74.3) =", mp.nstr(mp_density(1, q), 20))
    q2 = mp.mpf(5272) / 71
    print("mp bounds Q=5272/71:",
          mp.nstr(1 + 1 / q2 - 2 * mp.sqrt(1 / q2), 12), mp.nstr(1 + 1 / q2 + 2 * mp.sqrt(1 / q2), 12))
    print("mp_cdf(1; Q=74.3) =", mp.nstr(mp_cdf(1, q), 20))
    print("mp_cdf(1.1; Q=4, s2=2) =", mp.nstr(mp_cdf(mp.mpf("1.1"), 4, 2), 20))
    rs = [mp.mpf(v) for v in ("0.01", "-0.02", "0.015", "0.0", "-0.005")]
    base = mp.mpf("19.4704")
    vals = [base]
    for r in rs:
        vals.append(vals[-1] * mp.e ** r)
    print("index values =", [mp.nstr(v, 20) for v in vals])
    # 3x3 seriation: C12=0.9, C13=0.1, C23=0.2
    C = [[1, 0.9, 0.1], [0.9, 1, 0.2], [0.1, 0.2, 1]]
    for p in itertools.permutations(range(3)):
        cost = sum(C[p[i]][p[j]] * abs(i - j) for i in range(3) for j in range(3))
        print("perm", p, "cost", cost)
    # planted 2-block (3,3) intra 0.9 inter 0.1: mean over 15 upper pairs
    labels = [0, 0, 0, 1, 1, 1]
    s = [0.9 if labels[i] == labels[j] else 0.1 for i in range(6) for j in range(i + 1, 6)]
    print("mean offdiag 2-block =", mp.nstr(mp.fsum(s) / len(s), 20))
