# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event kernels.

Mirror of ``_core.py``: same stream layout, same floating-point operation
order. Loops run without the GIL so replica chunks can execute on threads.
"""
from libc.math cimport log1p, INFINITY
from libc.stdint cimport uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t REPLICA_MULT = 0xD1B54A32D192ED03ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t stream_key(uint64_t seed, uint64_t replica) noexcept nogil:
    cdef uint64_t k = mix64(seed + GOLDEN)
    return mix64(k ^ ((replica + 1) * REPLICA_MULT))


cdef inline double uniform(uint64_t key, uint64_t counter) noexcept nogil:
    return <double>(mix64(key + (counter + 1) * GOLDEN) >> 11) * TWO_M53


cdef inline double service_draw(int code, const double* p, Py_ssize_t np_, double u) noexcept nogil:
    cdef Py_ssize_t i, k
    if code == 0:
        return p[0]
    if code == 1:
        return -log1p(-u) / p[0]
    if code == 2:
        return p[0] + (p[1] - p[0]) * u
    if code == 3:
        k = <Py_ssize_t>p[0]
        for i in range(k):
            if u < p[1 + i]:
                return p[1 + k + i]
        return p[2 * k]
    i = <Py_ssize_t>(u * np_)
    if i >= np_:
        i = np_ - 1
    return p[i]


cdef double workload_one(int model, double x, double t, double lam, int code,
                         const double* p, Py_ssize_t np_, uint64_t key) noexcept nogil:
    cdef double w = x, clock = 0.0, tn, s
    cdef uint64_t c = 0
    while True:
        tn = clock + (-log1p(-uniform(key, c)) / lam)
        if tn > t:
            w = w - (t - clock)
            return w if w > 0.0 else 0.0
        w = w - (tn - clock)
        if w < 0.0:
            w = 0.0
        s = service_draw(code, p, np_, uniform(key, c + 1))
        if model == 1:
            w = w + s
            if w > 1.0:
                w = 1.0
        elif w < 1.0:
            w = w + s
        clock = tn
        c += 2


def workload_batch(int model, double x, double t, double lam, int code,
                   const double[::1] params, uint64_t seed, Py_ssize_t start,
                   double[::1] out):
    cdef Py_ssize_t i, n = out.shape[0], np_ = params.shape[0]
    cdef const double* p = &params[0]
    with nogil:
        for i in range(n):
            out[i] = workload_one(model, x, t, lam, code, p, np_,
                                  stream_key(seed, <uint64_t>(start + i)))


cdef void coupled_one(int model, double x, double y, double lam, int code,
                      const double* p, Py_ssize_t np_, uint64_t key, double t_max,
                      double* r) noexcept nogil:
    cdef double a = x if x < y else y
    cdef double b = y if x < y else x
    cdef double tc = 0.0 if a == b else INFINITY
    cdef double u0 = 0.0 if b == 0.0 else INFINITY
    cdef double u1 = 0.0 if (model == 1 and a == 1.0) else INFINITY
    cdef double clock = 0.0, tn, dt, m, s
    cdef uint64_t c = 0
    while clock <= t_max and (tc == INFINITY or u0 == INFINITY or (model == 1 and u1 == INFINITY)):
        tn = clock + (-log1p(-uniform(key, c)) / lam)
        dt = tn - clock
        if u0 == INFINITY and b <= dt:
            u0 = clock + b
        if tc == INFINITY:
            m = a if a > b else b
            if m <= dt:
                tc = clock + m
        a = a - dt
        if a < 0.0:
            a = 0.0
        b = b - dt
        if b < 0.0:
            b = 0.0
        s = service_draw(code, p, np_, uniform(key, c + 1))
        if model == 1:
            a = a + s
            if a > 1.0:
                a = 1.0
            b = b + s
            if b > 1.0:
                b = 1.0
            if u1 == INFINITY and a == 1.0:
                u1 = tn
        else:
            if a < 1.0:
                a = a + s
            if b < 1.0:
                b = b + s
        if tc == INFINITY and a == b:
            tc = tn
        clock = tn
        c += 2
    if tc > t_max:
        tc = INFINITY
    if u0 > t_max:
        u0 = INFINITY
    if u1 > t_max:
        u1 = INFINITY
    r[0] = tc
    r[1] = u0
    r[2] = u1


def coupled_batch(int model, double x, double y, double lam, int code,
                  const double[::1] params, uint64_t seed, Py_ssize_t start,
                  double t_max, double[::1] tc, double[::1] u0, double[::1] u1):
    cdef Py_ssize_t i, n = tc.shape[0], np_ = params.shape[0]
    cdef const double* p = &params[0]
    cdef double r[3]
    with nogil:
        for i in range(n):
            coupled_one(model, x, y, lam, code, p, np_,
                        stream_key(seed, <uint64_t>(start + i)), t_max, r)
            tc[i] = r[0]
            u0[i] = r[1]
            u1[i] = r[2]


cdef inline void occupy(double lo, double hi, double x_max, double width,
                        Py_ssize_t n_bins, double* bins, double* t_over) noexcept nogil:
    cdef double a, edge, e
    cdef Py_ssize_t k
    if hi > x_max:
        t_over[0] += hi - (lo if lo > x_max else x_max)
        hi = x_max
    a = lo
    if hi <= a:
        return
    k = <Py_ssize_t>(a / width)
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


def regenerative(int model, double lam, int code, const double[::1] params,
                 uint64_t seed, long n_cycles, double x_max, Py_ssize_t n_bins,
                 double[::1] bins):
    """Fill ``bins`` with occupation times; return ``(t_zero, t_over, total)``."""
    cdef Py_ssize_t np_ = params.shape[0]
    cdef const double* p = &params[0]
    cdef double* bp = &bins[0]
    cdef double width = x_max / n_bins
    cdef double t_zero = 0.0, t_over = 0.0, total = 0.0
    cdef double w = 1.0, clock = 0.0, tn, dt, lo, s, pre
    cdef uint64_t c = 0
    cdef uint64_t key = stream_key(seed, 0)
    cdef long cycles = 0
    with nogil:
        while cycles < n_cycles:
            tn = clock + (-log1p(-uniform(key, c)) / lam)
            dt = tn - clock
            lo = w - dt
            if model == 2 and w > 1.0 and lo <= 1.0:
                cycles += 1
                if cycles == n_cycles:
                    occupy(1.0, w, x_max, width, n_bins, bp, &t_over)
                    total += w - 1.0
                    break
            if lo < 0.0:
                t_zero += dt - w
                lo = 0.0
            occupy(lo, w, x_max, width, n_bins, bp, &t_over)
            total += dt
            s = service_draw(code, p, np_, uniform(key, c + 1))
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
    return t_zero, t_over, total


def uniform_at(uint64_t seed, uint64_t replica, uint64_t counter):
    return uniform(stream_key(seed, replica), counter)
