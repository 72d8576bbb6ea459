"""Beamformer weights: conventional, MVDR (ensemble / SMI / loaded) and unit-circle MVDR."""
import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .covariance import CovarianceKind
from .errors import DomainError, NumericalError, SingularCovarianceError
from .polynomial import (
    ArrayPolynomial,
    project_zeros_to_unit_circle,
    weights_to_polynomial,
    zeros_to_coefficients,
)

DISTORTIONLESS_ATOL = 1e-10
SINGULAR_RTOL = 1e-12


class Method(str, enum.Enum):
    CBF = "CBF"
    MVDR = "MVDR"
    SMI = "SMI"
    DL = "DL"
    UC = "UC"

    def __str__(self):
        return self.value


_METHOD_FOR_KIND = {
    CovarianceKind.ENSEMBLE: Method.MVDR,
    CovarianceKind.SAMPLE: Method.SMI,
    CovarianceKind.LOADED: Method.DL,
}


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Beamformer weights with unit-magnitude gain toward ``look_direction_u``."""

    weights: np.ndarray
    method: Method
    look_direction_u: float = 0.0
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(w)):
            raise NumericalError(f"{self.method} weights are not finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "method", Method(self.method))

    @property
    def n(self):
        return self.weights.size

    def look_gain(self):
        """``w^H v(u0)``."""
        n = np.arange(self.n)
        v0 = np.exp(-2j * np.pi * self.spacing_wavelengths * n * self.look_direction_u)
        return np.vdot(self.weights, v0)

    def is_distortionless(self, atol=DISTORTIONLESS_ATOL):
        return abs(abs(self.look_gain()) - 1.0) <= atol


def _wrap(weights, method, cfg):
    return WeightVector(weights, method, cfg.look_direction_u, cfg.spacing_wavelengths)


def cbf_weights(cfg):
    """Delay-and-sum weights ``v0 / N``."""
    return _wrap(cfg.look_vector / cfg.n_sensors, Method.CBF, cfg)


def mvdr_weights(cov, cfg, allow_pinv=False):
    """``R^-1 v0 / (v0^H R^-1 v0)`` via a Cholesky solve.

    The method tag follows the covariance kind. A covariance whose smallest
    eigenvalue does not exceed ``1e-12 * trace / N`` is refused with
    :class:`SingularCovarianceError` unless ``allow_pinv`` is set, in which case
    the Moore-Penrose pseudo-inverse is used instead.
    """
    r = cov.matrix
    n = cfg.n_sensors
    if r.shape != (n, n):
        raise DomainError(f"covariance is {r.shape}, array has {n} sensors")
    v0 = cfg.look_vector
    threshold = SINGULAR_RTOL * float(np.trace(r).real) / n
    min_eig = scipy.linalg.eigvalsh(r, subset_by_index=(0, 0), check_finite=False)[0]
    if min_eig > threshold:
        try:
            x = scipy.linalg.cho_solve(scipy.linalg.cho_factor(r, lower=True), v0)
        except np.linalg.LinAlgError as exc:
            raise SingularCovarianceError(min_eig, threshold) from exc
    elif allow_pinv:
        x = np.linalg.pinv(r, hermitian=True) @ v0
    else:
        raise SingularCovarianceError(min_eig, threshold)
    denom = np.vdot(v0, x).real
    if not denom > 0:
        raise NumericalError(f"v0^H R^-1 v0 = {denom!r} is not positive")
    return _wrap(x / denom, _METHOD_FOR_KIND[cov.kind], cfg)


class UcMvdrResult(NamedTuple):
    weights: WeightVector
    smi: WeightVector
    smi_polynomial: ArrayPolynomial
    zeros: np.ndarray


def uc_mvdr(scm, cfg, allow_loaded=False):
    """Unit-circle MVDR with its intermediate SMI stage.

    SMI weights are turned into their array polynomial, its zeros are pushed
    radially onto the unit circle (main-lobe zeros go to the first null of the
    conventional beam), the polynomial is re-expanded and the resulting weights
    are scaled to unit magnitude gain at the look direction.
    """
    if cfg.spacing_wavelengths != 0.5:
        raise DomainError("unit-circle projection requires half-wavelength spacing")
    allowed = {CovarianceKind.SAMPLE} | ({CovarianceKind.LOADED} if allow_loaded else set())
    if scm.kind not in allowed:
        raise DomainError(f"unit-circle MVDR needs a sample covariance, got {scm.kind.value}")
    smi = mvdr_weights(scm, cfg)
    poly = weights_to_polynomial(smi)
    zeros = project_zeros_to_unit_circle(poly.zeros, cfg.n_sensors, cfg.look_direction_u)
    c = zeros_to_coefficients(zeros).conj()
    gain = abs(np.vdot(c, cfg.look_vector))
    if not gain > 0:
        raise NumericalError("unit-circle polynomial has a zero at the look direction")
    return UcMvdrResult(_wrap(c / gain, Method.UC, cfg), smi, poly, zeros)


def uc_mvdr_weights(scm, cfg, allow_loaded=False):
    return uc_mvdr(scm, cfg, allow_loaded).weights
