"""Beampattern, notch depth, white noise gain, output power and empirical CDFs."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .array_model import _check_u, steering_vector
from ._io import open_text
from .errors import DomainError

DB_FLOOR = -400.0
UNITY_GAIN_ATOL = 1e-8


def _weights_of(w):
    return np.ascontiguousarray(getattr(w, "weights", w), dtype=np.complex128).ravel()


def power_db(x):
    """``10 log10(x)`` clamped below at -400 dB."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(x)
    return np.maximum(out, DB_FLOOR)


@dataclass(frozen=True, eq=False)
class BeampatternSamples:
    u_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.u_grid.shape != self.values.shape:
            raise DomainError("beampattern grid and values differ in length")
        if self.u_grid.size > 1 and np.any(np.diff(self.u_grid) <= 0):
            raise DomainError("beampattern grid must be strictly increasing")

    @property
    def power_db(self):
        return power_db(np.abs(self.values) ** 2)

    def to_csv(self, path):
        with open_text(path) as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["u", "re", "im", "db"])
            for u, b, db in zip(self.u_grid, self.values, self.power_db):
                out.writerow([f"{u:.17g}", f"{b.real:.17g}", f"{b.imag:.17g}", f"{db:.17g}"])


def beampattern(w, cfg, u_grid):
    """``B(u) = w^H v(u)`` on ``u_grid``."""
    u = np.atleast_1d(np.asarray(u_grid, dtype=np.float64))
    _check_u(u, "u_grid")
    values = kernels.array_response(_weights_of(w), float(cfg.spacing_wavelengths), u)
    return BeampatternSamples(u, values)


def notch_depth(w, cfg, u_interferer):
    """``|B(u1)|^2`` in dB."""
    _check_u(u_interferer, "u_interferer")
    b = np.vdot(_weights_of(w), steering_vector(cfg, u_interferer))
    return float(power_db(abs(b) ** 2))


def white_noise_gain(w, cfg=None):
    """``1 / ||w||^2`` for a distortionless weight vector.

    Raw arrays need ``cfg`` so the unity look-direction gain can be checked.
    """
    arr = _weights_of(w)
    if cfg is not None:
        gain = np.vdot(arr, cfg.look_vector)
    elif hasattr(w, "look_gain"):
        gain = w.look_gain()
    else:
        raise DomainError("white_noise_gain needs a WeightVector or a UlaConfig")
    if abs(abs(gain) - 1.0) > UNITY_GAIN_ATOL:
        raise DomainError(f"weights are not distortionless: |w^H v0| = {abs(gain):.12g}")
    return 1.0 / float(np.vdot(arr, arr).real)


def interferer_output_power(w, scene, cfg, interferer_index=0):
    """Output power due to one source alone: ``p_i |w^H v(u_i)|^2``."""
    if not scene.sources:
        raise DomainError("scene has no sources")
    src = scene.sources[interferer_index]
    b = np.vdot(_weights_of(w), steering_vector(cfg, src.direction_u))
    return src.power * abs(b) ** 2


def total_output_power(w, cov):
    """``w^H R w`` for covariance ``R``."""
    arr = _weights_of(w)
    r = getattr(cov, "matrix", cov)
    return float(np.vdot(arr, r @ arr).real)


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Right-continuous ECDF: probability ``k/n`` at the k-th order statistic."""

    values: np.ndarray
    probs: np.ndarray

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.values.size

    def quantile(self, p):
        """Smallest sample ``x`` with ``F(x) >= p``."""
        if not 0 < p <= 1:
            raise DomainError("p must lie in (0, 1]")
        k = max(math.ceil(p * self.values.size - 1e-12), 1)
        return float(self.values[k - 1])

    @property
    def median(self):
        return self.quantile(0.5)

    def to_csv(self, path):
        with open_text(path) as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["value", "prob"])
            for v, p in zip(self.values, self.probs):
                out.writerow([f"{v:.17g}", f"{p:.17g}"])


def empirical_cdf(samples):
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise DomainError("empirical_cdf needs at least one sample")
    return EmpiricalCdf(x, np.arange(1, x.size + 1) / x.size)


def lower_median(samples):
    return empirical_cdf(samples).median


@dataclass
class MethodMetrics:
    out_power: float = float("nan")
    wng: float = float("nan")
    nd_db: float = float("nan")
    total_out_power: float = float("nan")
    error: str = ""

    @property
    def ok(self):
        return not self.error


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    results: dict = field(default_factory=dict)
