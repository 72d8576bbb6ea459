"""Inner-loop kernels.

Every kernel has two implementations: an explicit loop compiled with numba
(``*_nb``) and a vectorised numpy version (``*_np``). The public name is bound
to one of them according to :data:`ucmvdr._accel.BACKEND`. Both are always
importable so they can be checked against each other.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

TWO_PI = 2.0 * np.pi


# -- steering / array response ------------------------------------------------

def _steering_matrix_np(n_sensors, spacing, u):
    n = np.arange(n_sensors, dtype=np.float64)[:, None]
    return np.exp(-1j * TWO_PI * spacing * n * u[None, :])


@njit
def _steering_matrix_nb(n_sensors, spacing, u):
    out = np.empty((n_sensors, u.size), dtype=np.complex128)
    for k in range(u.size):
        for n in range(n_sensors):
            out[n, k] = np.exp(-1j * TWO_PI * spacing * n * u[k])
    return out


def _array_response_np(w, spacing, u):
    return w.conj() @ _steering_matrix_np(w.size, spacing, u)


@njit
def _array_response_nb(w, spacing, u):
    out = np.zeros(u.size, dtype=np.complex128)
    for k in range(u.size):
        acc = 0j
        for n in range(w.size):
            acc += np.conj(w[n]) * np.exp(-1j * TWO_PI * spacing * n * u[k])
        out[k] = acc
    return out


# -- covariance ---------------------------------------------------------------

def _sample_covariance_np(x):
    s = (x @ x.conj().T) / x.shape[1]
    return 0.5 * (s + s.conj().T)


@njit
def _sample_covariance_nb(x):
    n, L = x.shape
    s = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        acc = 0.0
        for l in range(L):
            acc += x[i, l].real ** 2 + x[i, l].imag ** 2
        s[i, i] = acc / L
        for k in range(i + 1, n):
            c = 0j
            for l in range(L):
                c += x[i, l] * np.conj(x[k, l])
            c = c / L
            s[i, k] = c
            s[k, i] = np.conj(c)
    return s


# -- polynomials in z^-1 ------------------------------------------------------

def _poly_from_zeros_np(zeros):
    c = np.zeros(zeros.size + 1, dtype=np.complex128)
    c[0] = 1.0
    for k, z in enumerate(zeros):
        c[1:k + 2] = c[1:k + 2] - z * c[:k + 1]
    return c


@njit
def _poly_from_zeros_nb(zeros):
    c = np.zeros(zeros.size + 1, dtype=np.complex128)
    c[0] = 1.0
    for k in range(zeros.size):
        z = zeros[k]
        for i in range(k + 1, 0, -1):
            c[i] = c[i] - z * c[i - 1]
    return c


def _polyval_zinv_np(coeffs, z):
    # Horner in q = 1/z
    q = 1.0 / z
    acc = np.full(z.shape, coeffs[-1], dtype=np.complex128)
    for c in coeffs[-2::-1]:
        acc = acc * q + c
    return acc


@njit
def _polyval_zinv_nb(coeffs, z):
    out = np.empty(z.size, dtype=np.complex128)
    m = coeffs.size
    for k in range(z.size):
        q = 1.0 / z[k]
        acc = coeffs[m - 1]
        for i in range(m - 2, -1, -1):
            acc = acc * q + coeffs[i]
        out[k] = acc
    return out


# -- unit-circle projection with main-lobe guard -------------------------------

def _wrap_np(a):
    # single wrap into (-pi, pi]; inputs lie in (-2pi, 2pi]
    a = np.where(a > np.pi, a - TWO_PI, a)
    return np.where(a <= -np.pi, a + TWO_PI, a)


def _project_angles_np(angles, look_angle, guard):
    rel = _wrap_np(angles - look_angle)
    inside = np.abs(rel) <= guard
    side = np.where(rel >= 0.0, 1.0, -1.0)
    moved = _wrap_np(look_angle + side * guard)
    return np.where(inside, moved, angles)


@njit
def _wrap_nb(a):
    if a > np.pi:
        a -= TWO_PI
    if a <= -np.pi:
        a += TWO_PI
    return a


@njit
def _project_angles_nb(angles, look_angle, guard):
    out = np.empty(angles.size, dtype=np.float64)
    for k in range(angles.size):
        rel = _wrap_nb(angles[k] - look_angle)
        if abs(rel) <= guard:
            side = 1.0 if rel >= 0.0 else -1.0
            out[k] = _wrap_nb(look_angle + side * guard)
        else:
            out[k] = angles[k]
    return out


if USE_NUMBA:
    steering_matrix = _steering_matrix_nb
    array_response = _array_response_nb
    sample_covariance = _sample_covariance_nb
    poly_from_zeros = _poly_from_zeros_nb
    polyval_zinv = _polyval_zinv_nb
    project_angles = _project_angles_nb
else:
    steering_matrix = _steering_matrix_np
    array_response = _array_response_np
    sample_covariance = _sample_covariance_np
    poly_from_zeros = _poly_from_zeros_np
    polyval_zinv = _polyval_zinv_np
    project_angles = _project_angles_np

PAIRS = {
    "steering_matrix": (_steering_matrix_nb, _steering_matrix_np),
    "array_response": (_array_response_nb, _array_response_np),
    "sample_covariance": (_sample_covariance_nb, _sample_covariance_np),
    "poly_from_zeros": (_poly_from_zeros_nb, _poly_from_zeros_np),
    "polyval_zinv": (_polyval_zinv_nb, _polyval_zinv_np),
    "project_angles": (_project_angles_nb, _project_angles_np),
}
