"""JIT-compiled stepping kernels with a pure-numpy fallback.

The sequential recurrences (one state update per input sample) dominate
runtime for long signals.  Each kernel below exists twice: a numba
``@njit`` build and a plain numpy twin.  Set ``WALRUS_NO_NUMBA=1`` in the
environment before import to force the numpy path (useful on platforms
where numba is unavailable, and for the benchmark in
``benchmarks/bench_stepping.py``).
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("WALRUS_NO_NUMBA", "0") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        """No-op decorator stand-in when numba is disabled."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# dense stepping
# ---------------------------------------------------------------------------

def _step_dense_scaled_py(A, B, u, alpha, emit_idx):
    N = A.shape[0]
    I = np.eye(N)
    c = np.zeros(N)
    out = np.empty((emit_idx.size, N))
    j = 0
    for k in range(u.size):
        lhs = I + (alpha / (k + 2)) * A
        rhs = (I - ((1.0 - alpha) / (k + 1)) * A) @ c + B * (u[k] / (k + 1))
        c = np.linalg.solve(lhs, rhs)
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


@njit(cache=True)
def _step_dense_scaled_nb(A, B, u, alpha, emit_idx):  # pragma: no cover - jit
    N = A.shape[0]
    I = np.eye(N)
    c = np.zeros(N)
    out = np.empty((emit_idx.size, N))
    j = 0
    for k in range(u.size):
        lhs = I + (alpha / (k + 2)) * A
        rhs = (I - ((1.0 - alpha) / (k + 1)) * A) @ c + B * (u[k] / (k + 1))
        c = np.linalg.solve(lhs, rhs)
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


def _step_dense_const_py(M, v, u, emit_idx):
    N = v.size
    c = np.zeros(N)
    out = np.empty((emit_idx.size, N))
    j = 0
    for k in range(u.size):
        c = M @ c + v * u[k]
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


@njit(cache=True)
def _step_dense_const_nb(M, v, u, emit_idx):  # pragma: no cover - jit
    N = v.size
    c = np.zeros(N)
    out = np.empty((emit_idx.size, N))
    j = 0
    for k in range(u.size):
        c = M @ c + v * u[k]
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


def _step_dense_cached_py(Ms, vs, u, emit_idx):
    N = vs.shape[1]
    c = np.zeros(N)
    out = np.empty((emit_idx.size, N))
    j = 0
    for k in range(u.size):
        c = Ms[k] @ c + vs[k] * u[k]
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


@njit(cache=True)
def _step_dense_cached_nb(Ms, vs, u, emit_idx):  # pragma: no cover - jit
    N = vs.shape[1]
    c = np.zeros(N)
    out = np.empty((emit_idx.size, N))
    j = 0
    for k in range(u.size):
        c = Ms[k] @ c + vs[k] * u[k]
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


# ---------------------------------------------------------------------------
# diagonal stepping
# ---------------------------------------------------------------------------

def _step_diag_scaled_py(lam, btil, u, alpha, emit_idx):
    c = np.zeros(lam.size, dtype=np.complex128)
    out = np.empty((emit_idx.size, lam.size), dtype=np.complex128)
    j = 0
    for k in range(u.size):
        num = 1.0 - ((1.0 - alpha) / (k + 1)) * lam
        den = 1.0 + (alpha / (k + 2)) * lam
        c = (num / den) * c + (btil / den) * (u[k] / (k + 1))
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


@njit(cache=True)
def _step_diag_scaled_nb(lam, btil, u, alpha, emit_idx):  # pragma: no cover
    n = lam.size
    c = np.zeros(n, dtype=np.complex128)
    out = np.empty((emit_idx.size, n), dtype=np.complex128)
    j = 0
    for k in range(u.size):
        inv1 = 1.0 / (k + 1.0)
        for i in range(n):
            num = 1.0 - (1.0 - alpha) * inv1 * lam[i]
            den = 1.0 + (alpha / (k + 2.0)) * lam[i]
            c[i] = (num / den) * c[i] + (btil[i] / den) * (u[k] * inv1)
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


def _step_diag_const_py(a, g, u, emit_idx):
    c = np.zeros(a.size, dtype=np.complex128)
    out = np.empty((emit_idx.size, a.size), dtype=np.complex128)
    j = 0
    for k in range(u.size):
        c = a * c + g * u[k]
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


@njit(cache=True)
def _step_diag_const_nb(a, g, u, emit_idx):  # pragma: no cover - jit
    n = a.size
    c = np.zeros(n, dtype=np.complex128)
    out = np.empty((emit_idx.size, n), dtype=np.complex128)
    j = 0
    for k in range(u.size):
        for i in range(n):
            c[i] = a[i] * c[i] + g[i] * u[k]
        if j < emit_idx.size and emit_idx[j] == k:
            out[j] = c
            j += 1
    return out


# ---------------------------------------------------------------------------
# scaled running MSE (per-step window resampling is the hot part)
# ---------------------------------------------------------------------------

def _running_mse_scaled_py(states, times, dual_rows, signal):
    n_steps = times.size
    L_grid = dual_rows.shape[1]
    out = np.empty(n_steps)
    for s in range(n_steps):
        T = times[s]
        pos = (np.arange(T) + 1.0) / T * (L_grid - 1)
        i0 = np.minimum(pos.astype(np.int64), L_grid - 2)
        fr = pos - i0
        rows = dual_rows[:, i0] * (1 - fr) + dual_rows[:, i0 + 1] * fr
        u_hat = states[s] @ rows
        diff = u_hat - signal[:T]
        out[s] = np.mean(diff * diff)
    return out


@njit(cache=True)
def _running_mse_scaled_nb(states, times, dual_rows, signal):  # pragma: no cover
    n_steps = times.size
    N = dual_rows.shape[0]
    L_grid = dual_rows.shape[1]
    out = np.empty(n_steps)
    for s in range(n_steps):
        T = times[s]
        acc = 0.0
        for t in range(T):
            pos = (t + 1.0) / T * (L_grid - 1)
            i0 = int(pos)
            if i0 > L_grid - 2:
                i0 = L_grid - 2
            fr = pos - i0
            val = 0.0
            for i in range(N):
                val += states[s, i] * (dual_rows[i, i0] * (1 - fr) + dual_rows[i, i0 + 1] * fr)
            d = val - signal[t]
            acc += d * d
        out[s] = acc / T
    return out


def step_dense_scaled(A, B, u, alpha, emit_idx):
    fn = _step_dense_scaled_nb if NUMBA_ENABLED else _step_dense_scaled_py
    return fn(np.ascontiguousarray(A), np.ascontiguousarray(B),
              np.ascontiguousarray(u), float(alpha), emit_idx)


def step_dense_const(M, v, u, emit_idx):
    fn = _step_dense_const_nb if NUMBA_ENABLED else _step_dense_const_py
    return fn(np.ascontiguousarray(M), np.ascontiguousarray(v),
              np.ascontiguousarray(u), emit_idx)


def step_dense_cached(Ms, vs, u, emit_idx):
    fn = _step_dense_cached_nb if NUMBA_ENABLED else _step_dense_cached_py
    return fn(np.ascontiguousarray(Ms), np.ascontiguousarray(vs),
              np.ascontiguousarray(u), emit_idx)


def step_diag_scaled(lam, btil, u, alpha, emit_idx):
    fn = _step_diag_scaled_nb if NUMBA_ENABLED else _step_diag_scaled_py
    return fn(np.ascontiguousarray(lam), np.ascontiguousarray(btil),
              np.ascontiguousarray(u), float(alpha), emit_idx)


def step_diag_const(a, g, u, emit_idx):
    fn = _step_diag_const_nb if NUMBA_ENABLED else _step_diag_const_py
    return fn(np.ascontiguousarray(a), np.ascontiguousarray(g),
              np.ascontiguousarray(u), emit_idx)


def running_mse_scaled(states, times, dual_rows, signal):
    fn = _running_mse_scaled_nb if NUMBA_ENABLED else _running_mse_scaled_py
    return fn(np.ascontiguousarray(states), np.ascontiguousarray(times),
              np.ascontiguousarray(dual_rows), np.ascontiguousarray(signal))
