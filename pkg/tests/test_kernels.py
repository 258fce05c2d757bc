"""Backend parity between the compiled stepping kernels and the fallback."""

import os
import subprocess
import sys

import numpy as np

from cohstate import kernels
from cohstate._kernels_py import rk4_linear_steps as py_rk4
from cohstate._kernels_py import unitary_steps as py_unitary


def _random_unitary(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_backend_is_named():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


def test_unitary_steps_matches_fallback(rng):
    u = _random_unitary(rng, 4)
    psi0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi0 /= np.linalg.norm(psi0)
    a = kernels.unitary_steps(u, psi0, 200)
    b = py_unitary(u, psi0, 200)
    assert a.shape == (201, 4)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_rk4_steps_match_fallback(rng):
    a_mat = rng.normal(size=(3, 3))
    a_mat = a_mat - a_mat.T  # antisymmetric, keeps the norm bounded
    x0 = rng.normal(size=3)
    a = kernels.rk4_linear_steps(a_mat, x0, 1e-2, 500)
    b = py_rk4(a_mat, x0, 1e-2, 500)
    assert a.shape == (501, 3)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_unitary_steps_preserve_norm(rng):
    u = _random_unitary(rng, 3)
    psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi0 /= np.linalg.norm(psi0)
    path = kernels.unitary_steps(u, psi0, 1000)
    norms = np.linalg.norm(path, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_rk4_matches_exact_rotation():
    # xdot = A x with A antisymmetric is a rotation; RK4 at this step
    # should track the matrix exponential to its fourth-order accuracy.
    a_mat = np.array([[0.0, -1.0, 0.0],
                      [1.0, 0.0, 0.0],
                      [0.0, 0.0, 0.0]])
    x0 = np.array([1.0, 0.0, 0.5])
    dt, n = 1e-3, 2000
    path = kernels.rk4_linear_steps(a_mat, x0, dt, n)
    t = n * dt
    expect = np.array([np.cos(t), np.sin(t), 0.5])
    np.testing.assert_allclose(path[-1], expect, atol=1e-12)


def test_env_variable_forces_python_backend():
    env = dict(os.environ, COHSTATE_KERNELS="python")
    out = subprocess.run(
        [sys.executable, "-c",
         "from cohstate import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
