"""Low-level integrators for batches of linear 2x2 systems.

``dormand_prince`` is the adaptive embedded 8(5,3) Runge-Kutta scheme that steps a
whole batch with one shared step size (error measured as the worst member) and
lands exactly on every requested sample time. ``midpoint_exponential`` is the
fixed-step product ``U <- exp(-i h H(t + h/2)) U`` used as an independent oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop853

_N_STAGES = _dop853.N_STAGES
_A = _dop853.A[:_N_STAGES, :_N_STAGES]
_B = _dop853.B
_C = _dop853.C[:_N_STAGES]
_E3 = _dop853.E3
_E5 = _dop853.E5
_ERROR_EXPONENT = -1.0 / 8.0

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


class IntegrationError(RuntimeError):
    """Integration could not proceed (e.g. step size underflow)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


def _member_error(K, h, y, y_new, rtol, atol):
    """DOP853 error norm per batch member (max over that member's components)."""
    B = y.shape[0]
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    e5 = np.abs(np.tensordot(_E5, K, axes=(0, 0)) / scale).reshape(B, -1).max(axis=1)
    e3 = np.abs(np.tensordot(_E3, K, axes=(0, 0)) / scale).reshape(B, -1).max(axis=1)
    denom = np.sqrt(e5 * e5 + 0.01 * e3 * e3)
    return np.where(denom > 0, abs(h) * e5 * e5 / np.where(denom > 0, denom, 1.0), 0.0)


def dormand_prince(rhs, y0, s_samples, rtol=1e-10, atol=1e-12, max_step=np.inf, time_scale=None):
    """Integrate ``dy/ds = rhs(s, y)`` for a batch ``y`` of shape ``(B, ...)``.

    Dormand-Prince 8(5,3) with a step size shared by the batch; a step is
    accepted only when every member meets its tolerance. Steps are clipped to
    land exactly on each sample point.

    Parameters
    ----------
    rhs : callable
        ``rhs(s, y)`` returning an array shaped like ``y``.
    y0 : ndarray
        Initial batch state.
    s_samples : array_like
        Increasing sample points; the first is the initial point.
    time_scale : ndarray, optional
        Per-member factor converting ``s`` into physical time, used only to report
        the failure time.

    Returns
    -------
    ys : ndarray, shape (len(s_samples), B, ...)
    err : ndarray, shape (B,)
        Accumulated local error estimates (absolute, max over components).
    n_steps : int
    """
    s_samples = np.asarray(s_samples, dtype=float)
    y = np.array(y0, dtype=complex)
    B = y.shape[0]
    ys = np.empty((len(s_samples),) + y.shape, dtype=complex)
    ys[0] = y
    acc = np.zeros(B)
    s = s_samples[0]
    span = s_samples[-1] - s
    if span <= 0:
        return ys, acc, 0

    def fail(where):
        t_fail = where if time_scale is None else where * np.asarray(time_scale)
        raise IntegrationError(f"step size underflow at t={np.max(t_fail):.17g}", time=t_fail)

    f = rhs(s, y)
    d0 = np.max(np.abs(y))
    d1 = np.max(np.abs(f))
    h = 1e-6 * span if d1 < 1e-300 else 0.01 * d0 / d1
    h = min(h, max_step, span)
    n_steps = 0
    K = np.empty((_N_STAGES + 1,) + y.shape, dtype=complex)
    for j in range(1, len(s_samples)):
        target = s_samples[j]
        while s < target:
            h_try = min(h, max_step)
            last = False
            if s + h_try >= target - 1e-13 * max(1.0, abs(target)):
                h_try = target - s
                last = True
            while True:
                K[0] = f
                for i in range(1, _N_STAGES):
                    dy = np.tensordot(_A[i, :i], K[:i], axes=(0, 0))
                    K[i] = rhs(s + _C[i] * h_try, y + h_try * dy)
                y_new = y + h_try * np.tensordot(_B, K[:_N_STAGES], axes=(0, 0))
                K[-1] = rhs(s + h_try, y_new)
                en = _member_error(K, h_try, y, y_new, rtol, atol)
                enmax = float(np.max(en))
                if not np.isfinite(enmax):
                    raise IntegrationError(f"non-finite state near s={s:.17g}", time=s)
                if enmax <= 1.0:
                    break
                h_try *= max(_MIN_FACTOR, _SAFETY * enmax ** _ERROR_EXPONENT)
                last = False
                if h_try <= 1e-14 * max(1.0, abs(s)):
                    fail(s)
            err_abs = abs(h_try) * np.abs(np.tensordot(_E5, K, axes=(0, 0)))
            acc += err_abs.reshape(B, -1).max(axis=1)
            n_steps += 1
            s = target if last else s + h_try
            y = y_new
            f = K[-1]
            factor = _MAX_FACTOR if enmax == 0 else min(_MAX_FACTOR, _SAFETY * enmax ** _ERROR_EXPONENT)
            h_new = h_try * max(_MIN_FACTOR, factor)
            # a step clipped to land on a sample should not shrink the next one
            h = max(h_new, h) if last else h_new
        ys[j] = y
    return ys, acc, n_steps


def expm_traceless(X):
    """``exp(X)`` for a stack of traceless 2x2 matrices, in closed form.

    Uses ``X @ X = -det(X) * 1``.
    """
    X = np.asarray(X, dtype=complex)
    w2 = -(X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0])
    w = np.sqrt(w2)
    small = np.abs(w) < 1e-4
    ws = np.where(small, 1.0, w)
    cosh = np.where(small, 1 + w2 / 2 + w2 * w2 / 24, np.cosh(ws))
    sinhc = np.where(small, 1 + w2 / 6 + w2 * w2 / 120, np.sinh(ws) / ws)
    out = sinhc[..., None, None] * X
    out[..., 0, 0] += cosh
    out[..., 1, 1] += cosh
    return out


def ordered_product(M):
    """``M[n-1] @ ... @ M[1] @ M[0]`` by pairwise (tree) reduction."""
    M = np.asarray(M)
    if len(M) == 0:
        return np.eye(M.shape[-1], dtype=complex)
    while len(M) > 1:
        if len(M) % 2:
            M = np.concatenate([M, np.eye(M.shape[-1], dtype=M.dtype)[None]])
        M = M[1::2] @ M[0::2]
    return M[0]


def midpoint_exponential(hamiltonian_mid, t_samples, n_steps, chunk=1 << 16):
    """Fixed-step exponential midpoint propagator for a traceless 2x2 ``H(t)``.

    Parameters
    ----------
    hamiltonian_mid : callable
        Vectorized ``H(t)`` returning shape ``(n, 2, 2)`` for ``n`` times.
    t_samples : array_like
        Increasing sample times starting at the initial time.
    n_steps : int
        Total number of equal steps across the whole interval, rounded up so every
        sample interval holds a whole number of steps.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    n_int = len(t_samples) - 1
    per = max(1, int(np.ceil(n_steps / max(n_int, 1))))
    Us = np.empty((len(t_samples), 2, 2), dtype=complex)
    U = np.eye(2, dtype=complex)
    Us[0] = U
    for j in range(n_int):
        t0, t1 = t_samples[j], t_samples[j + 1]
        h = (t1 - t0) / per
        P = np.eye(2, dtype=complex)
        for start in range(0, per, chunk):
            k = np.arange(start, min(per, start + chunk))
            tm = t0 + (k + 0.5) * h
            E = expm_traceless(-1j * h * hamiltonian_mid(tm))
            P = ordered_product(E) @ P
        U = P @ U
        Us[j + 1] = U
    return Us
