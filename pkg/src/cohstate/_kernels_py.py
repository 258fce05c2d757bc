"""Pure-NumPy stepping kernels, the fallback when the compiled extension is
unavailable. Same signatures and semantics as ``_kernels.pyx``."""

import numpy as np

BACKEND = "python"


def unitary_steps(u, psi0, n_steps):
    """Iterate psi_{k+1} = U psi_k and return the whole (n_steps+1, d) path."""
    d = psi0.shape[0]
    out = np.empty((n_steps + 1, d), dtype=complex)
    out[0] = psi0
    cur = psi0
    for k in range(n_steps):
        cur = u @ cur
        out[k + 1] = cur
    return out


def rk4_linear_steps(a, x0, dt, n_steps):
    """Classic RK4 for the linear flow xdot = A x, fixed step, full path."""
    n = x0.shape[0]
    out = np.empty((n_steps + 1, n), dtype=float)
    out[0] = x0
    cur = np.array(x0, dtype=float)
    for step in range(n_steps):
        k1 = a @ cur
        k2 = a @ (cur + 0.5 * dt * k1)
        k3 = a @ (cur + 0.5 * dt * k2)
        k4 = a @ (cur + dt * k3)
        cur = cur + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[step + 1] = cur
    return out
