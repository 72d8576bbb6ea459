"""Sample covariance, diagonal loading and loading-factor calibration."""
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CalibrationError, DomainError
from .rng import pilot_base_seed, trial_seed


class CovarianceKind(enum.Enum):
    ENSEMBLE = "ensemble"
    SAMPLE = "sample"
    LOADED = "loaded"


HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    matrix: np.ndarray
    kind: CovarianceKind
    loading_factor: float = 0.0
    snapshots_used: int = 0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"covariance must be square, got shape {m.shape}")
        scale = max(np.linalg.norm(m), np.finfo(float).tiny)
        if np.linalg.norm(m - m.conj().T) > HERMITIAN_RTOL * scale:
            raise DomainError("covariance is not Hermitian")
        tr = float(np.trace(m).real)
        if np.linalg.eigvalsh(m)[0] < -PSD_RTOL * abs(tr):
            raise DomainError("covariance has a negative eigenvalue")
        if self.loading_factor < 0:
            raise DomainError("loading_factor must be >= 0")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return self.matrix.shape[0]


def sample_covariance(snapshots):
    """``(1/L) X X^H`` of an N x L snapshot matrix."""
    x = getattr(snapshots, "data", snapshots)
    x = np.ascontiguousarray(x, dtype=np.complex128)
    if x.ndim != 2 or x.shape[1] < 1:
        raise DomainError(f"need an N x L snapshot matrix with L >= 1, got shape {x.shape}")
    return CovarianceMatrix(
        kernels.sample_covariance(x), CovarianceKind.SAMPLE, snapshots_used=x.shape[1]
    )


def diagonal_load(scm, delta):
    if not np.isfinite(delta) or delta < 0:
        raise DomainError(f"loading factor must be >= 0, got {delta!r}")
    m = scm.matrix.copy()
    m[np.diag_indices(scm.n)] += delta
    return CovarianceMatrix(
        m,
        CovarianceKind.LOADED,
        loading_factor=scm.loading_factor + float(delta),
        snapshots_used=scm.snapshots_used,
    )


def pilot_sample_covariances(cfg, scene, n_snapshots, n_pilot_trials, seed):
    """Stack of pilot SCMs, shape ``(n_pilot_trials, N, N)``.

    Pilot streams are seeded from :func:`ucmvdr.rng.pilot_base_seed` so they
    never coincide with evaluation trials of the same run seed.
    """
    from .array_model import generate_snapshots

    base = pilot_base_seed(seed)
    out = np.empty((n_pilot_trials, cfg.n_sensors, cfg.n_sensors), dtype=np.complex128)
    for i in range(n_pilot_trials):
        snaps = generate_snapshots(cfg, scene, n_snapshots, trial_seed(base, i))
        out[i] = kernels.sample_covariance(snaps.data)
    return out


def mean_dl_wng(scms, cfg, delta):
    """Mean white noise gain of diagonally loaded MVDR over a stack of SCMs."""
    v0 = cfg.look_vector
    n = cfg.n_sensors
    loaded = scms + delta * np.eye(n)
    rhs = np.broadcast_to(v0[:, None], (scms.shape[0], n, 1))
    x = np.linalg.solve(loaded, rhs)[..., 0]
    denom = (x @ v0.conj())[:, None]
    w = x / denom
    return float(np.mean(1.0 / np.sum(np.abs(w) ** 2, axis=1)))


def calibrate_dl_factor(cfg, scene, n_snapshots, n_pilot_trials, target_mean_wng, seed,
                        rtol=0.01, max_iter=200):
    """Loading factor whose pilot mean DL-MVDR WNG matches ``target_mean_wng``.

    Bisects on ``log10(delta)`` over ``[1e-6, 1e6] * noise_power`` and stops
    once the pilot mean is within ``rtol`` (relative) of the target. Mean WNG
    is nondecreasing in ``delta``: zero loading gives SMI, infinite loading the
    conventional beamformer.
    """
    if n_pilot_trials < 100:
        raise DomainError("n_pilot_trials must be >= 100")
    if not 0 < target_mean_wng <= cfg.n_sensors:
        raise DomainError(f"target_mean_wng must lie in (0, {cfg.n_sensors}], got {target_mean_wng!r}")
    scms = pilot_sample_covariances(cfg, scene, n_snapshots, n_pilot_trials, seed)
    return calibrate_on_pilots(scms, cfg, scene.noise_power, target_mean_wng, rtol, max_iter)


def calibrate_on_pilots(scms, cfg, noise_power, target, rtol=0.01, max_iter=200):
    lo = math.log10(noise_power) - 6.0
    hi = math.log10(noise_power) + 6.0
    f_lo = mean_dl_wng(scms, cfg, 10.0 ** lo)
    f_hi = mean_dl_wng(scms, cfg, 10.0 ** hi)
    tol = rtol * target
    if abs(f_lo - target) <= tol:
        return 10.0 ** lo
    if abs(f_hi - target) <= tol:
        return 10.0 ** hi
    if not f_lo < target < f_hi:
        raise CalibrationError(target, (f_lo, f_hi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = mean_dl_wng(scms, cfg, 10.0 ** mid)
        if abs(f_mid - target) <= tol:
            return 10.0 ** mid
        if f_mid < target:
            lo = mid
        else:
            hi = mid
    return 10.0 ** (0.5 * (lo + hi))
