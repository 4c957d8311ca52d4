"""Pure-Python event kernels (fallback for ``_ckernels``).

All loops here are written to perform exactly the same floating-point
operations, in the same order, as the Cython versions, so both backends give
bit-identical results for a given seed. Change one, change the other.

Models: 1 = truncated service, 2 = bounded waiting. Distribution codes are
the ones produced by ``ServiceDistribution.kernel_spec``.
"""
from math import inf, log1p

from ._stream import GOLDEN, MASK64, TWO_M53, stream_key

POINT, EXPONENTIAL, UNIFORM, MIXTURE, EMPIRICAL = range(5)


def service_draw(code, params, u):
    """Inverse-transform a uniform ``u`` in [0, 1) into a service requirement."""
    if code == POINT:
        return params[0]
    if code == EXPONENTIAL:
        return -log1p(-u) / params[0]
    if code == UNIFORM:
        return params[0] + (params[1] - params[0]) * u
    if code == MIXTURE:
        k = int(params[0])
        for i in range(k):
            if u < params[1 + i]:
                return params[1 + k + i]
        return params[2 * k]
    if code == EMPIRICAL:
        n = len(params)
        i = int(u * n)
        if i >= n:
            i = n - 1
        return params[i]
    raise ValueError(f"unknown distribution code {code}")


def _uniform_source(seed, replica):
    key = stream_key(seed, replica)

    def u(counter):
        z = (key + (counter + 1) * GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return ((z ^ (z >> 31)) >> 11) * TWO_M53

    return u


def workload_one(model, x, t, lam, code, params, seed, replica):
    u = _uniform_source(seed, replica)
    w = x
    clock = 0.0
    c = 0
    while True:
        tn = clock + (-log1p(-u(c)) / lam)
        if tn > t:
            w = w - (t - clock)
            return w if w > 0.0 else 0.0
        w = w - (tn - clock)
        if w < 0.0:
            w = 0.0
        s = service_draw(code, params, u(c + 1))
        if model == 1:
            w = w + s
            if w > 1.0:
                w = 1.0
        elif w < 1.0:
            w = w + s
        clock = tn
        c += 2


def workload_batch(model, x, t, lam, code, params, seed, start, n):
    params = list(params)
    return [workload_one(model, x, t, lam, code, params, seed, start + i) for i in range(n)]


def coupled_one(model, x, y, lam, code, params, seed, replica, t_max):
    """Return ``(coupling_time, u0_top, u1_bottom)``; ``inf`` marks censoring."""
    u = _uniform_source(seed, replica)
    a = x if x < y else y
    b = y if x < y else x
    tc = 0.0 if a == b else inf
    u0 = 0.0 if b == 0.0 else inf
    u1 = 0.0 if (model == 1 and a == 1.0) else inf
    clock = 0.0
    c = 0
    while clock <= t_max and (tc == inf or u0 == inf or (model == 1 and u1 == inf)):
        tn = clock + (-log1p(-u(c)) / lam)
        dt = tn - clock
        if u0 == inf and b <= dt:
            u0 = clock + b
        if tc == inf:
            m = a if a > b else b
            if m <= dt:
                tc = clock + m
        a = a - dt
        if a < 0.0:
            a = 0.0
        b = b - dt
        if b < 0.0:
            b = 0.0
        s = service_draw(code, params, u(c + 1))
        if model == 1:
            a = a + s
            if a > 1.0:
                a = 1.0
            b = b + s
            if b > 1.0:
                b = 1.0
            if u1 == inf and a == 1.0:
                u1 = tn
        else:
            if a < 1.0:
                a = a + s
            if b < 1.0:
                b = b + s
        if tc == inf and a == b:
            tc = tn
        clock = tn
        c += 2
    if tc > t_max:
        tc = inf
    if u0 > t_max:
        u0 = inf
    if u1 > t_max:
        u1 = inf
    return tc, u0, u1


def coupled_batch(model, x, y, lam, code, params, seed, start, n, t_max):
    params = list(params)
    tc, u0, u1 = [], [], []
    for i in range(n):
        r = coupled_one(model, x, y, lam, code, params, seed, start + i, t_max)
        tc.append(r[0])
        u0.append(r[1])
        u1.append(r[2])
    return tc, u0, u1


def regenerative(model, lam, code, params, seed, n_cycles, x_max, n_bins):
    """Occupation times over ``n_cycles`` regeneration cycles started at state 1.

    Returns ``(bin_times, time_at_zero, time_above_x_max, total_time)``.
    """
    params = list(params)
    u = _uniform_source(seed, 0)
    width = x_max / n_bins
    bins = [0.0] * n_bins
    t_zero = 0.0
    t_over = 0.0
    total = 0.0

    def occupy(lo, hi):
        nonlocal t_over
        if hi > x_max:
            t_over += hi - (lo if lo > x_max else x_max)
            hi = x_max
        a = lo
        if hi <= a:
            return
        k = int(a / width)
        if k > n_bins - 1:
            k = n_bins - 1
        while a < hi:
            edge = (k + 1) * width if k < n_bins - 1 else hi
            e = edge if edge < hi else hi
            if e > a:
                bins[k] += e - a
                a = e
            k += 1
            if k >= n_bins:
                break

    w = 1.0
    clock = 0.0
    c = 0
    cycles = 0
    while cycles < n_cycles:
        tn = clock + (-log1p(-u(c)) / lam)
        dt = tn - clock
        lo = w - dt
        if model == 2 and w > 1.0 and lo <= 1.0:
            cycles += 1
            if cycles == n_cycles:
                occupy(1.0, w)
                total += w - 1.0
                break
        if lo < 0.0:
            t_zero += dt - w
            lo = 0.0
        occupy(lo, w)
        total += dt
        s = service_draw(code, params, u(c + 1))
        pre = lo
        if model == 1:
            w = pre + s
            if w >= 1.0:
                w = 1.0
                if pre < 1.0:
                    cycles += 1
        elif pre < 1.0:
            w = pre + s
            if w == 1.0:
                cycles += 1
        else:
            w = pre
        clock = tn
        c += 2
    return bins, t_zero, t_over, total
