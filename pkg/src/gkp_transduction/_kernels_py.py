"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable, and as the reference the
extension is tested against.
"""

import math

import numpy as np

# rescale the recursion before it can overflow; the carried log-scale
# restores the true magnitude when a row is written out
_BIG = 1e150
_LOG_BIG = math.log(_BIG)
_LOG_PI_QUARTER = 0.25 * math.log(math.pi)


def hermite_table(n_max, x):
    """Oscillator eigenfunctions ``psi_n(x)`` for ``n < n_max``.

    Returns an array of shape ``(n_max, len(x))``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty((n_max, x.size))
    if n_max == 0:
        return out
    log_scale = -0.5 * x * x - _LOG_PI_QUARTER
    scale = np.exp(log_scale)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = scale
    for n in range(1, n_max):
        nxt = math.sqrt(2.0 / n) * x * cur - math.sqrt((n - 1) / n) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if big.any():
            cur[big] /= _BIG
            prev[big] /= _BIG
            log_scale[big] += _LOG_BIG
            scale[big] = np.exp(log_scale[big])
        out[n] = cur * scale
    return out
