"""Pure-numpy Ryser permanent, the fallback when the compiled kernel is absent.

Subsets are processed in vectorized blocks: for each block of subset indices
we build the 0/1 membership matrix, get all row sums with one matmul and
reduce with a product along the rows. Same O(2^N * N) arithmetic as the
compiled kernel, traded against numpy temporaries.
"""

import numpy as np

_BLOCK = 1 << 16


def permanent_ryser(a):
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    cols = np.arange(n, dtype=np.uint64)
    for start in range(1, 1 << n, _BLOCK):
        stop = min(start + _BLOCK, 1 << n)
        k = np.arange(start, stop, dtype=np.uint64)
        gray = k ^ (k >> np.uint64(1))
        bits = ((gray[:, None] >> cols[None, :]) & np.uint64(1)).astype(np.float64)
        sums = bits @ a.T  # (block, n): row sums over the subset columns
        prods = np.prod(sums, axis=1)
        parity = bits.sum(axis=1).astype(np.int64) & 1
        signs = 1.0 - 2.0 * parity
        total += np.dot(signs, prods)
    if n % 2 == 1:
        total = -total
    return complex(total)
