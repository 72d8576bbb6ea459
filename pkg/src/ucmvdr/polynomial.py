"""Array polynomials: weights <-> coefficients <-> zeros, and unit-circle projection.

The array polynomial of a weight vector ``w`` is
``P(z) = sum_n conj(w[n]) z**-n = scale * prod_k (1 - zeros[k] / z)``.
On ``z = exp(j pi u)`` it equals the beampattern, so zeros on the unit circle
are exact nulls at ``u = angle(zero) / pi`` (half-wavelength spacing only).
"""
import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from ._io import open_text
from .errors import DegeneratePolynomialError, DegenerateZeroError, DomainError, NumericalError

LEADING_RTOL = 1e-12
ORIGIN_ATOL = 1e-12


def canonical_order(zeros):
    """Sort by angle in (-pi, pi], then by radius."""
    zeros = np.asarray(zeros, dtype=np.complex128)
    ang = zero_angles(zeros)
    return zeros[np.lexsort((np.abs(zeros), ang))]


def zero_angles(zeros):
    """Angles in (-pi, pi]; the branch cut value -pi maps to +pi."""
    ang = np.angle(np.asarray(zeros, dtype=np.complex128))
    return np.where(ang == -np.pi, np.pi, ang)


@dataclass(frozen=True, eq=False)
class ArrayPolynomial:
    zeros: np.ndarray
    scale: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "zeros", canonical_order(self.zeros))
        object.__setattr__(self, "scale", complex(self.scale))

    @property
    def degree(self):
        return self.zeros.size

    @property
    def coefficients(self):
        """Coefficients of ``z**0 .. z**-degree``."""
        return self.scale * zeros_to_coefficients(self.zeros)

    @property
    def angles(self):
        return zero_angles(self.zeros)

    @property
    def radii(self):
        return np.abs(self.zeros)

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        return kernels.polyval_zinv(self.coefficients, z)

    def weights(self):
        """Weight vector whose array polynomial is this one."""
        return self.coefficients.conj()

    def to_csv(self, path):
        write_zeros_csv(path, self.zeros)


def find_zeros(coefficients):
    """Zeros of ``sum_n c[n] z**-n`` as eigenvalues of the balanced companion matrix."""
    c = np.asarray(coefficients, dtype=np.complex128).ravel()
    if c.size < 2:
        return np.zeros(0, dtype=np.complex128)
    if not np.all(np.isfinite(c)):
        raise NumericalError("polynomial coefficients are not finite")
    if abs(c[0]) < LEADING_RTOL * np.linalg.norm(c):
        raise DegeneratePolynomialError(
            f"leading coefficient |c0| = {abs(c[0]):.3e} is negligible relative to "
            f"||c|| = {np.linalg.norm(c):.3e}"
        )
    m = c.size - 1
    comp = np.zeros((m, m), dtype=np.complex128)
    comp[0, :] = -c[1:] / c[0]
    comp[np.arange(1, m), np.arange(m - 1)] = 1.0
    try:
        zeros = scipy.linalg.eigvals(comp, overwrite_a=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"companion eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(zeros)):
        raise NumericalError("companion eigensolver returned non-finite zeros")
    return zeros


def weights_to_polynomial(w):
    """Array polynomial with coefficients ``conj(w)`` on ``z**-n``."""
    w = np.asarray(getattr(w, "weights", w), dtype=np.complex128).ravel()
    if w.size < 2:
        raise DomainError("need at least two weights")
    c = w.conj()
    return ArrayPolynomial(find_zeros(c), c[0])


def zeros_to_coefficients(zeros):
    """Expand ``prod_k (1 - zeros[k] z**-1)``; the leading coefficient is exactly 1."""
    zeros = np.ascontiguousarray(np.atleast_1d(zeros), dtype=np.complex128)
    if not np.all(np.isfinite(zeros)):
        raise DomainError("zeros must be finite")
    return kernels.poly_from_zeros(zeros)


def project_zeros_to_unit_circle(zeros, n_sensors, look_direction_u=0.0):
    """Move every zero radially onto the unit circle, guarding the main lobe.

    A zero at angle ``w`` is replaced by ``exp(j w)`` unless it lies within
    ``2 pi / n_sensors`` of the look angle ``pi * look_direction_u``; such
    zeros go to the nearer first null of the conventional beamformer,
    ``exp(j (pi u0 +/- 2 pi / N))``, with the ``+`` side taken at exact ties.
    Zeros outside the main lobe keep their angle bit-for-bit.
    """
    zeros = np.atleast_1d(np.asarray(zeros, dtype=np.complex128))
    if zeros.size == 0:
        raise DomainError("no zeros to project")
    tiny = np.flatnonzero(np.abs(zeros) <= ORIGIN_ATOL)
    if tiny.size:
        raise DegenerateZeroError(tiny[0], zeros[tiny[0]])
    guard = 2.0 * np.pi / n_sensors
    angles = kernels.project_angles(
        zero_angles(zeros), float(np.pi * look_direction_u), guard
    )
    return np.exp(1j * angles)


def write_zeros_csv(path, zeros):
    zeros = canonical_order(zeros)
    with open_text(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "angle", "radius", "u"])
        for k, (a, r) in enumerate(zip(zero_angles(zeros), np.abs(zeros))):
            out.writerow([k, f"{a:.17g}", f"{r:.17g}", f"{a / np.pi:.17g}"])
