"""Fixed-step classical Runge-Kutta for linear systems ``dy/dt = A(t) y``.

Because the right-hand side is linear, one RK4 step is the matrix
polynomial

    P = I + h/6 (A0 + 2 Ah S1 + 2 Ah S2 + A1 S3)

with S1 = I + h/2 A0, S2 = I + h/2 Ah S1, S3 = I + h Ah S2, where A0, Ah
and A1 are the generator at the start, midpoint and end of the step.
For small systems the step matrices are assembled in vectorized chunks
and then applied in order.  For larger ones (the 25-dimensional density
vector) building P costs more than the four stage products, so the
stages are applied to the vector directly.  Both are the same scheme.
"""

from __future__ import annotations

import numpy as np

CHUNK = 256
# above this dimension the stages act on the vector instead of building P
STEP_MATRIX_MAX_DIM = 8


def rk4_step_matrices(A0, Ah, A1, h):
    """Stack of RK4 step matrices for generators of shape (m, d, d)."""
    eye = np.eye(A0.shape[-1], dtype=complex)
    S1 = eye + 0.5 * h * A0
    S2 = eye + 0.5 * h * (Ah @ S1)
    S3 = eye + h * (Ah @ S2)
    return eye + (h / 6.0) * (A0 + 2.0 * (Ah @ S1) + 2.0 * (Ah @ S2) + A1 @ S3)


def rk4_linear(generator, y0, t0: float, t1: float, n_steps: int, keep: bool = True):
    """Integrate ``dy/dt = generator(t) @ y`` with ``n_steps`` RK4 steps.

    Parameters
    ----------
    generator : callable
        Maps a 1-D array of times to generators of shape (len(t), d, d).
    y0 : array_like
        Initial vector of length d.
    keep : bool
        Return every step (shape (n_steps + 1, d)) or only the final vector.

    Returns
    -------
    times, states
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    y = np.array(y0, dtype=complex)
    h = (t1 - t0) / n_steps
    times = t0 + h * np.arange(n_steps + 1)
    times[-1] = t1
    states = np.empty((n_steps + 1, y.size), dtype=complex) if keep else None
    if keep:
        states[0] = y
    half = 0.5 * h
    for start in range(0, n_steps, CHUNK):
        stop = min(start + CHUNK, n_steps)
        m = stop - start
        A = generator(np.concatenate([times[start:stop + 1], times[start:stop] + half]))
        nodes, mids = A[:m + 1], A[m + 1:]
        if y.size <= STEP_MATRIX_MAX_DIM:
            steps = rk4_step_matrices(nodes[:-1], mids, nodes[1:], h)
            for k in range(m):
                y = steps[k] @ y
                if keep:
                    states[start + k + 1] = y
            continue
        for k in range(m):
            k1 = nodes[k] @ y
            k2 = mids[k] @ (y + half * k1)
            k3 = mids[k] @ (y + half * k2)
            k4 = nodes[k + 1] @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            if keep:
                states[start + k + 1] = y
    return times, (states if keep else y)
