"""Counter-based uniform stream shared by the compiled and pure-Python kernels.

Every replica owns a 64-bit key derived from ``(seed, replica)``; the k-th
uniform of that replica is a SplitMix64 finalizer applied to ``key + (k+1)*GOLDEN``.
Event ``n`` (0-based) of a replica consumes counter ``2n`` for the interarrival
time and ``2n + 1`` for the service requirement, so any event can be
recomputed without replaying the ones before it.

The same arithmetic lives in ``_ckernels.pyx``; the two must stay in lockstep.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
REPLICA_MULT = 0xD1B54A32D192ED03
TWO_M53 = 2.0 ** -53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, replica: int) -> int:
    k = mix64((seed + GOLDEN) & MASK64)
    return mix64(k ^ (((replica + 1) * REPLICA_MULT) & MASK64))


def uniform(key: int, counter: int) -> float:
    """Uniform on [0, 1) with 53 random bits."""
    return (mix64(key + (counter + 1) * GOLDEN) >> 11) * TWO_M53
