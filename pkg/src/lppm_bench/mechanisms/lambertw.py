"""Lower branch W_{-1} of the Lambert W function on [-1/e, 0)."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError

_TOL = 1e-12
_MAX_ITER = 32
# below this distance from the branch point the series alone is exact to ~1e-15
_SERIES_ONLY = 1e-5
_SERIES = (-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0, 769.0 / 17280.0)


def _branch_series(q: np.ndarray) -> np.ndarray:
    s = -np.sqrt(2.0 * q)
    w = np.zeros_like(s)
    for c in reversed(_SERIES):
        w = w * s + c
    return w


def wm1_near_branch(z, q) -> np.ndarray:
    """W_{-1}(z) given ``q = 1 + e*z`` computed by the caller.

    Passing ``q`` separately avoids the cancellation in ``1 + e*z`` when the
    caller knows it exactly (e.g. ``z = (p - 1)/e`` gives ``q = p``).
    """
    z = np.asarray(z, dtype=float)
    q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
    z, q = np.broadcast_arrays(z, q)
    w = np.empty(z.shape)

    near = q < _SERIES_ONLY
    w[near] = _branch_series(q[near])

    far = ~near
    if np.any(far):
        zf = z[far]
        qf = q[far]
        guess = np.where(qf < 0.3, _branch_series(qf), 0.0)
        mid = qf >= 0.3
        if np.any(mid):
            l1 = np.log(-zf[mid])
            l2 = np.log(-l1)
            guess[mid] = l1 - l2 + l2 / l1
        wf = guess
        for _ in range(_MAX_ITER):
            ew = np.exp(wf)
            f = wf * ew - zf
            wp1 = wf + 1.0
            step = f / (ew * wp1 - (wf + 2.0) * f / (2.0 * wp1))
            wf = wf - step
            if np.max(np.abs(step), initial=0.0) <= _TOL:
                break
        w[far] = wf
    return w


def lambertw_m1(z):
    """W_{-1}(z) for z in [-1/e, 0); returns a float for scalar input."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z_arr)) or np.any(z_arr >= 0.0) or np.any(z_arr < -1.0 / np.e - 1e-15):
        raise DomainError("W_{-1} is only defined on [-1/e, 0)")
    w = wm1_near_branch(z_arr, 1.0 + np.e * z_arr)
    return float(w) if np.ndim(z) == 0 else w
