"""Independent high-precision references shared by several test modules."""

import math

import mpmath as mp


def ml_oracle(l1, l2, l3, z):
    """High-precision reference: exact-argument series, or mpmath Talbot inversion when the series cancels too hard."""
    r = abs(z)
    peak, n, log_rising = 0.0, 0, 0.0
    while True:
        lt = log_rising + (n * math.log(r) if r else 0.0) - math.lgamma(l1 * n + l2) - math.lgamma(n + 1)
        log_rising += math.log(abs(l3 + n)) if l3 + n != 0 else -math.inf
        peak = max(peak, lt)
        if n > 20 and lt < -80:  # absolute: the sum may cancel down to O(1e-2)
            break
        if peak > 250:
            assert complex(z).imag == 0, "mpmath Talbot inversion handles real arguments only"
            with mp.workdps(40):
                zz = mp.mpc(z)
                lt_fun = lambda s: s ** (-l2) * (1 - zz * s ** (-l1)) ** (-l3)  # noqa: E731
                return complex(mp.invertlaplace(lt_fun, 1, method="talbot"))
        n += 1
    with mp.workdps(int(peak / 2.3) + 40):
        zz, a1, a2, a3 = mp.mpc(z), mp.mpf(l1), mp.mpf(l2), mp.mpf(l3)
        terms = (mp.rf(a3, k) * zz**k / (mp.gamma(a1 * k + a2) * mp.factorial(k)) for k in range(n + 20))
        return complex(mp.fsum(terms))
