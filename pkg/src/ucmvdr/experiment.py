"""Monte Carlo harness: configuration, per-trial evaluation, summaries and CSV artifacts."""
import configparser
import csv
import dataclasses
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from importlib import resources
from pathlib import Path

import numpy as np

from . import _accel
from .array_model import Scene, SourceSpec, UlaConfig, ensemble_covariance, generate_snapshots
from .beamformers import Method, cbf_weights, mvdr_weights, uc_mvdr
from .covariance import (
    calibrate_on_pilots,
    diagonal_load,
    mean_dl_wng,
    pilot_sample_covariances,
    sample_covariance,
)
from .errors import ConfigError, UcmvdrError
from .metrics import (
    MethodMetrics,
    TrialRecord,
    beampattern,
    empirical_cdf,
    interferer_output_power,
    notch_depth,
    total_output_power,
    white_noise_gain,
)
from .polynomial import weights_to_polynomial, write_zeros_csv
from .rng import trial_seed

log = logging.getLogger(__name__)

TRIALS_HEADER = ["trial", "seed", "method", "out_power", "wng", "nd_db", "total_out_power", "error"]
ALL_METHODS = tuple(Method)


@dataclass(frozen=True)
class DlPolicy:
    """``kind`` is ``"fixed"`` (use ``delta``) or ``"match_mean_wng"``."""

    kind: str = "match_mean_wng"
    delta: float = 0.0
    pilot_trials: int = 1000

    def __post_init__(self):
        if self.kind not in ("fixed", "match_mean_wng"):
            raise ConfigError(f"unknown diagonal loading policy {self.kind!r}")
        if self.kind == "fixed" and not (math.isfinite(self.delta) and self.delta >= 0):
            raise ConfigError(f"fixed loading factor must be >= 0, got {self.delta!r}")
        if self.kind == "match_mean_wng" and self.pilot_trials < 100:
            raise ConfigError("pilot_trials must be >= 100")


@dataclass(frozen=True)
class ExperimentConfig:
    ula: UlaConfig
    scene: Scene
    n_snapshots: int = 12
    n_trials: int = 5000
    seed: int = 0
    methods: tuple = ALL_METHODS
    dl_policy: DlPolicy = DlPolicy()
    output_dir: str = ""
    interferer_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        if not self.methods:
            raise ConfigError("no methods selected")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate methods")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.n_snapshots < 1:
            raise ConfigError("n_snapshots must be >= 1")
        if not self.scene.sources:
            raise ConfigError("scene needs at least one source (the interferer)")
        if not 0 <= self.interferer_index < len(self.scene.sources):
            raise ConfigError(f"interferer index {self.interferer_index} out of range")
        if Method.UC in self.methods and self.ula.spacing_wavelengths != 0.5:
            raise ConfigError("UC requires spacing_wavelengths = 0.5")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


# -- config files --------------------------------------------------------------

def _number(text, key):
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from exc


def _integer(text, key):
    value = _number(text, key)
    if value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {text!r}")
    return int(value)


def parse_config(text, source="<string>"):
    """Parse the INI-style experiment format (see README for the grammar)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    def get(section, key, default=None):
        if cp.has_option(section, key):
            return cp.get(section, key)
        if default is None:
            raise ConfigError(f"{source}: missing [{section}] {key}")
        return default

    try:
        ula = UlaConfig(
            n_sensors=_integer(get("array", "n_sensors"), "n_sensors"),
            spacing_wavelengths=_number(get("array", "spacing_wavelengths", "1/2"), "spacing_wavelengths"),
            look_direction_u=_number(get("array", "look_direction_u", "0"), "look_direction_u"),
            allow_grating_lobes=cp.getboolean("array", "allow_grating_lobes", fallback=False),
        )
        noise_power = _number(get("noise", "power", "1"), "noise power")
        sources = []
        for name in cp.sections():
            if not (name == "source" or name.startswith("source ")):
                continue
            sec = cp[name]
            u = _number(sec.get("direction_u", ""), f"[{name}] direction_u")
            if "power" in sec and "inr_db" in sec:
                raise ConfigError(f"[{name}]: give either power or inr_db, not both")
            if "inr_db" in sec:
                power = noise_power * 10.0 ** (_number(sec["inr_db"], f"[{name}] inr_db") / 10.0)
            else:
                power = _number(sec.get("power", ""), f"[{name}] power")
            sources.append(SourceSpec(u, power))
        scene = Scene(tuple(sources), noise_power)

        methods = tuple(
            m.strip().upper() for m in get("experiment", "methods", "CBF, MVDR, SMI, DL, UC").split(",") if m.strip()
        )
        try:
            methods = tuple(Method(m) for m in methods)
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from exc

        policy_kind = get("diagonal_loading", "policy", "match_mean_wng").strip().lower()
        dl = DlPolicy(
            kind=policy_kind,
            delta=_number(get("diagonal_loading", "delta", "0"), "delta"),
            pilot_trials=_integer(get("diagonal_loading", "pilot_trials", "1000"), "pilot_trials"),
        )
        return ExperimentConfig(
            ula=ula,
            scene=scene,
            n_snapshots=_integer(get("experiment", "n_snapshots"), "n_snapshots"),
            n_trials=_integer(get("experiment", "n_trials"), "n_trials"),
            seed=_integer(get("experiment", "seed", "0"), "seed"),
            methods=methods,
            dl_policy=dl,
            output_dir=get("experiment", "output_dir", "").strip(),
            interferer_index=_integer(get("experiment", "interferer", "0"), "interferer"),
        )
    except ConfigError:
        raise
    except UcmvdrError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path):
    """Load a config file; bare names fall back to the configs shipped with the package."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text(), str(p))
    bundled = resources.files("ucmvdr") / "data" / p.name
    if bundled.is_file():
        return parse_config(bundled.read_text(), f"ucmvdr/data/{p.name}")
    raise ConfigError(f"config file not found: {path}")


# -- trials --------------------------------------------------------------------

def evaluate_trial(config, trial_index, dl_factor=None):
    """Like :func:`run_trial` but also returns the weight vectors and UC zeros."""
    cfg, scene = config.ula, config.scene
    seed = trial_seed(config.seed, trial_index)
    record = TrialRecord(trial_index, seed)
    weights, zeros = {}, {}
    sigma = ensemble_covariance(cfg, scene)
    u1 = scene.sources[config.interferer_index].direction_u

    scm = None
    if any(m in config.methods for m in (Method.SMI, Method.DL, Method.UC)):
        scm = sample_covariance(generate_snapshots(cfg, scene, config.n_snapshots, seed))

    for method in config.methods:
        try:
            if method is Method.CBF:
                w = cbf_weights(cfg)
            elif method is Method.MVDR:
                w = mvdr_weights(sigma, cfg)
            elif method is Method.SMI:
                w = mvdr_weights(scm, cfg)
            elif method is Method.DL:
                if dl_factor is None:
                    if config.dl_policy.kind != "fixed":
                        raise ConfigError("DL needs a calibrated loading factor")
                    dl_factor = config.dl_policy.delta
                w = mvdr_weights(diagonal_load(scm, dl_factor), cfg)
            else:
                res = uc_mvdr(scm, cfg)
                w = res.weights
                zeros[method] = res.zeros
            record.results[method] = MethodMetrics(
                out_power=interferer_output_power(w, scene, cfg, config.interferer_index),
                wng=white_noise_gain(w),
                nd_db=notch_depth(w, cfg, u1),
                total_out_power=total_output_power(w, sigma),
            )
            weights[method] = w
        except (UcmvdrError, np.linalg.LinAlgError) as exc:
            if isinstance(exc, ConfigError):
                raise
            record.results[method] = MethodMetrics(error=f"{type(exc).__name__}: {exc}")
    return record, weights, zeros


def run_trial(config, trial_index, dl_factor=None):
    """Evaluate every configured method on trial ``trial_index``.

    Deterministic in ``(config.seed, trial_index)``. Numerical failures land in
    the per-method ``error`` field instead of propagating.
    """
    return evaluate_trial(config, trial_index, dl_factor)[0]


def _run_chunk(config, dl_factor, indices):
    return [run_trial(config, i, dl_factor) for i in indices]


def run_trials(config, dl_factor=None, workers=1):
    indices = range(config.n_trials)
    if workers <= 1:
        return [run_trial(config, i, dl_factor) for i in indices]
    n_chunks = max(workers * 4, 1)
    chunks = [list(indices[k::n_chunks]) for k in range(n_chunks)]
    records = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(partial(_run_chunk, config, dl_factor), chunks):
            records.extend(part)
    records.sort(key=lambda r: r.trial_index)
    return records


# -- summaries -----------------------------------------------------------------

@dataclass
class ExperimentSummary:
    n_trials: int
    seed: int
    n_snapshots: int
    methods: list
    per_method: dict = field(default_factory=dict)
    dl_factor: float = None
    dl_target_wng: float = None
    dl_pilot_mean_wng: float = None
    ensemble_out_power: float = None
    ensemble_wng: float = None
    ensemble_nd_db: float = None
    fraction_uc_wng_above_smi: float = None
    backend: str = _accel.BACKEND

    def to_dict(self):
        return dataclasses.asdict(self)


def method_statistics(values_by_field):
    """Summary statistics for one method from its per-trial columns (NaN = failed)."""
    out_power = np.asarray(values_by_field["out_power"], dtype=np.float64)
    wng = np.asarray(values_by_field["wng"], dtype=np.float64)
    nd = np.asarray(values_by_field["nd_db"], dtype=np.float64)
    ok = np.isfinite(out_power) & np.isfinite(wng)
    stats = {"n_valid": int(ok.sum()), "n_failed": int((~ok).sum())}
    if ok.any():
        stats.update(
            median_out_power=empirical_cdf(out_power[ok]).median,
            mean_out_power=float(np.mean(out_power[ok])),
            median_wng=empirical_cdf(wng[ok]).median,
            mean_wng=float(np.mean(wng[ok])),
            mean_nd_db=float(np.mean(nd[ok])),
        )
    return stats


def _columns(records, method):
    cols = {"out_power": [], "wng": [], "nd_db": []}
    for r in records:
        m = r.results[method]
        for k in cols:
            cols[k].append(getattr(m, k))
    return cols


def summarize(config, records):
    summary = ExperimentSummary(
        n_trials=len(records),
        seed=config.seed,
        n_snapshots=config.n_snapshots,
        methods=[m.value for m in config.methods],
    )
    for method in config.methods:
        summary.per_method[method.value] = method_statistics(_columns(records, method))
    if Method.UC in config.methods and Method.SMI in config.methods:
        uc = np.array([r.results[Method.UC].wng for r in records])
        smi = np.array([r.results[Method.SMI].wng for r in records])
        ok = np.isfinite(uc) & np.isfinite(smi)
        if ok.any():
            summary.fraction_uc_wng_above_smi = float(np.mean(uc[ok] > smi[ok]))
    cfg, scene = config.ula, config.scene
    w = mvdr_weights(ensemble_covariance(cfg, scene), cfg)
    summary.ensemble_out_power = interferer_output_power(w, scene, cfg, config.interferer_index)
    summary.ensemble_wng = white_noise_gain(w)
    summary.ensemble_nd_db = notch_depth(w, cfg, scene.sources[config.interferer_index].direction_u)
    return summary


# -- output --------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return x


def format_trials_csv(records, methods):
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(TRIALS_HEADER)
    for r in records:
        for method in methods:
            m = r.results[method]
            out.writerow([
                r.trial_index, r.seed, method.value,
                _fmt(m.out_power), _fmt(m.wng), _fmt(m.nd_db), _fmt(m.total_out_power), m.error,
            ])
    return buf.getvalue()


def read_trials_csv(path):
    """Per-method columns parsed back from a trials.csv."""
    cols = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            d = cols.setdefault(row["method"], {"out_power": [], "wng": [], "nd_db": [], "trial": []})
            d["trial"].append(int(row["trial"]))
            for k in ("out_power", "wng", "nd_db"):
                d[k].append(float(row[k]))
    return cols


def _json_value(x, indent):
    pad = "  " * (indent + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f'{pad}"{k}": {_json_value(v, indent + 1)}' for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v, indent) for v in x) + "]"
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return '"' + str(x).replace("\\", "\\\\").replace('"', '\\"') + '"'


def dumps_json(obj):
    """JSON text with every float written to 17 significant digits."""
    return _json_value(obj, 0) + "\n"


def _ensure_writable(out_dir):
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".ucmvdr-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    return out


def resolve_dl_factor(config):
    """Loading factor for the DL method plus calibration metadata (target, pilot mean)."""
    if Method.DL not in config.methods:
        return None, None, None
    policy = config.dl_policy
    if policy.kind == "fixed":
        return policy.delta, None, None
    cfg, scene = config.ula, config.scene
    scms = pilot_sample_covariances(cfg, scene, config.n_snapshots, policy.pilot_trials, config.seed)
    target = pilot_mean_uc_wng(scms, cfg)
    delta = calibrate_on_pilots(scms, cfg, scene.noise_power, target)
    achieved = mean_dl_wng(scms, cfg, delta)
    log.info("calibrated DL factor %.6g (target mean WNG %.6g, pilot mean %.6g)", delta, target, achieved)
    return delta, target, achieved


def pilot_mean_uc_wng(scms, cfg):
    from .covariance import CovarianceKind, CovarianceMatrix

    wngs = []
    for s in scms:
        try:
            w = uc_mvdr(CovarianceMatrix(s, CovarianceKind.SAMPLE, snapshots_used=1), cfg).weights
        except UcmvdrError:
            continue
        wngs.append(white_noise_gain(w))
    return float(np.mean(wngs))


def run_experiment(config, workers=1, exemplar_trial=0, write=True):
    """Run every trial, summarise, and (if ``write``) emit the CSV/JSON artifacts."""
    out_dir = None
    if write:
        if not config.output_dir:
            raise ConfigError("output_dir is not set")
        out_dir = _ensure_writable(config.output_dir)

    delta, target, achieved = resolve_dl_factor(config)
    records = run_trials(config, delta, workers)
    summary = summarize(config, records)
    summary.dl_factor, summary.dl_target_wng, summary.dl_pilot_mean_wng = delta, target, achieved
    if out_dir is not None:
        write_artifacts(out_dir, config, records, summary, delta, exemplar_trial)
    return summary


def write_artifacts(out_dir, config, records, summary, dl_factor, exemplar_trial=0):
    out_dir = Path(out_dir)
    methods = config.methods
    (out_dir / "trials.csv").write_text(format_trials_csv(records, methods))

    for method in methods:
        op = np.array([r.results[method].out_power for r in records])
        op = op[np.isfinite(op)]
        if op.size:
            empirical_cdf(op).to_csv(out_dir / f"ecdf_{method.value}.csv")

    n = config.ula.n_sensors
    edges = np.linspace(0.0, n, 4 * n + 1)
    wngs = {m: np.array([r.results[m].wng for r in records]) for m in methods}
    counts = {m: np.histogram(v[np.isfinite(v)], bins=edges)[0] for m, v in wngs.items()}
    with open(out_dir / "wng_hist.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi"] + [m.value for m in methods])
        for k in range(edges.size - 1):
            w.writerow([_fmt(edges[k]), _fmt(edges[k + 1])] + [int(counts[m][k]) for m in methods])
    with open(out_dir / "wng_scatter.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial"] + [m.value for m in methods])
        for i, r in enumerate(records):
            w.writerow([r.trial_index] + [_fmt(wngs[m][i]) for m in methods])

    if exemplar_trial is not None and exemplar_trial < config.n_trials:
        _, weights, uc_zeros = evaluate_trial(config, exemplar_trial, dl_factor)
        grid = np.linspace(-1.0, 1.0, 2001)
        for method, wv in weights.items():
            beampattern(wv, config.ula, grid).to_csv(out_dir / f"beampattern_{method.value}.csv")
            zeros = uc_zeros.get(method)
            if zeros is None:
                zeros = weights_to_polynomial(wv).zeros
            write_zeros_csv(out_dir / f"zeros_{method.value}.csv", zeros)

    (out_dir / "summary.json").write_text(dumps_json(summary.to_dict()))
