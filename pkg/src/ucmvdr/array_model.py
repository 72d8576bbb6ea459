"""ULA geometry, steering vectors, ensemble covariance and snapshot synthesis."""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError
from .rng import make_rng


@dataclass(frozen=True)
class UlaConfig:
    """Uniform linear array steered to ``look_direction_u``.

    Directions are always expressed as ``u = cos(theta)``.
    ``spacing_wavelengths`` above 0.5 admits grating lobes and must be
    requested with ``allow_grating_lobes=True``.
    """

    n_sensors: int
    spacing_wavelengths: float = 0.5
    look_direction_u: float = 0.0
    allow_grating_lobes: bool = False

    def __post_init__(self):
        if int(self.n_sensors) != self.n_sensors or self.n_sensors < 2:
            raise DomainError(f"n_sensors must be an integer >= 2, got {self.n_sensors!r}")
        d = self.spacing_wavelengths
        if not np.isfinite(d) or d <= 0:
            raise DomainError(f"spacing_wavelengths must be positive, got {d!r}")
        if d > 0.5 and not self.allow_grating_lobes:
            raise DomainError(
                f"spacing_wavelengths={d} > 0.5 admits grating lobes; "
                "pass allow_grating_lobes=True to override"
            )
        _check_u(self.look_direction_u, "look_direction_u")

    @property
    def look_vector(self):
        return steering_vector(self, self.look_direction_u)


@dataclass(frozen=True)
class SourceSpec:
    direction_u: float
    power: float

    def __post_init__(self):
        _check_u(self.direction_u, "direction_u")
        if not np.isfinite(self.power) or self.power < 0:
            raise DomainError(f"source power must be finite and >= 0, got {self.power!r}")


@dataclass(frozen=True)
class Scene:
    """Uncorrelated planewave sources in spatially white noise."""

    sources: tuple = ()
    noise_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        for s in self.sources:
            if not isinstance(s, SourceSpec):
                raise DomainError(f"sources must be SourceSpec instances, got {type(s).__name__}")
        if not np.isfinite(self.noise_power) or self.noise_power <= 0:
            raise DomainError(f"noise_power must be > 0, got {self.noise_power!r}")


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    data: np.ndarray
    seed: int = field(default=0)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[1] < 1:
            raise DomainError(f"snapshot matrix must be N x L with L >= 1, got shape {data.shape}")
        object.__setattr__(self, "data", data)

    @property
    def n_snapshots(self):
        return self.data.shape[1]


def _check_u(u, name="u"):
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)) or np.any(np.abs(u) > 1.0):
        raise DomainError(f"{name} must lie in [-1, 1], got {u!r}")


def steering_vector(cfg, u):
    """Array manifold vector ``v(u)``, element ``n`` = ``exp(-j 2 pi (d/lambda) n u)``."""
    _check_u(u)
    return kernels.steering_matrix(
        cfg.n_sensors, float(cfg.spacing_wavelengths), np.array([float(u)])
    )[:, 0]


def steering_matrix(cfg, u_grid):
    """Columns are steering vectors for each entry of ``u_grid``."""
    u_grid = np.atleast_1d(np.asarray(u_grid, dtype=np.float64))
    _check_u(u_grid, "u_grid")
    return kernels.steering_matrix(cfg.n_sensors, float(cfg.spacing_wavelengths), u_grid)


def ensemble_covariance(cfg, scene):
    """``sum_i p_i v_i v_i^H + noise_power * I``, exactly Hermitian."""
    from .covariance import CovarianceKind, CovarianceMatrix

    n = cfg.n_sensors
    acc = np.zeros((n, n), dtype=np.complex128)
    for src in scene.sources:
        v = steering_vector(cfg, src.direction_u)
        acc += src.power * np.outer(v, v.conj())
    acc = 0.5 * (acc + acc.conj().T)
    acc[np.diag_indices(n)] = acc.diagonal().real + scene.noise_power
    return CovarianceMatrix(acc, CovarianceKind.ENSEMBLE)


def _complex_normal(rng, variance, shape):
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_snapshots(cfg, scene, n_snapshots, seed):
    """Draw ``n_snapshots`` i.i.d. columns ``sum_i a_i v_i + noise``.

    Amplitudes are redrawn every snapshot. Draw order is fixed (sources in
    order, then the noise block) so the result is a pure function of the
    arguments.
    """
    if int(n_snapshots) != n_snapshots or n_snapshots < 1:
        raise DomainError(f"n_snapshots must be an integer >= 1, got {n_snapshots!r}")
    L = int(n_snapshots)
    rng = make_rng(seed)
    x = np.zeros((cfg.n_sensors, L), dtype=np.complex128)
    for src in scene.sources:
        a = _complex_normal(rng, src.power, L)
        x += np.outer(steering_vector(cfg, src.direction_u), a)
    x += _complex_normal(rng, scene.noise_power, (cfg.n_sensors, L))
    return SnapshotMatrix(x, int(seed))
