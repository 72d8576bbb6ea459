import json
import math

import pytest

from ucmvdr import ConfigError, DlPolicy, Method, load_config, parse_config, run_experiment, run_trial
from ucmvdr.experiment import dumps_json, method_statistics, read_trials_csv

PAPER = load_config("paper_fig3.cfg")


def small(tmp_path, **kw):
    kw.setdefault("n_trials", 30)
    kw.setdefault("output_dir", str(tmp_path / "out"))
    kw.setdefault("dl_policy", DlPolicy("fixed", delta=0.15))
    return PAPER.replace(**kw)


class TestConfig:
    def test_bundled_paper_config(self):
        c = PAPER
        assert c.ula.n_sensors == 11 and c.ula.spacing_wavelengths == 0.5 and c.ula.look_direction_u == 0
        (src,) = c.scene.sources
        assert src.direction_u == 3 / 11
        assert src.power == 1e4
        assert c.scene.noise_power == 1.0
        assert (c.n_snapshots, c.n_trials) == (12, 5000)
        assert c.methods == tuple(Method)
        assert c.dl_policy.kind == "match_mean_wng" and c.dl_policy.pilot_trials == 1000

    BASE = """
[array]
n_sensors = 5
[source a]
direction_u = 0.5   # comment
power = 10
[experiment]
n_snapshots = 8
n_trials = 3
methods = smi, uc
"""

    def test_minimal(self):
        c = parse_config(self.BASE)
        assert c.methods == (Method.SMI, Method.UC)
        assert c.scene.sources[0].power == 10
        assert c.seed == 0

    @pytest.mark.parametrize("bad", [
        BASE.replace("n_sensors = 5", ""),
        BASE.replace("power = 10", "power = ten"),
        BASE.replace("smi, uc", "smi, xyz"),
        BASE.replace("power = 10", "power = 10\ninr_db = 3"),
        BASE.replace("n_trials = 3", "n_trials = 0"),
        BASE.replace("direction_u = 0.5", "direction_u = 2"),
        BASE.replace("n_sensors = 5", "n_sensors = 5\nspacing_wavelengths = 0.4"),
        BASE + "\n[diagonal_loading]\npolicy = magic\n",
        "not an ini file",
    ])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/nope.cfg")


class TestRunTrial:
    def test_deterministic(self, tmp_path):
        c = small(tmp_path)
        a, b = run_trial(c, 3), run_trial(c, 3)
        assert a.seed == b.seed
        for m in c.methods:
            assert a.results[m] == b.results[m]
        assert run_trial(c, 4).results[Method.SMI] != a.results[Method.SMI]

    def test_cbf_only_is_data_independent(self, tmp_path):
        c = small(tmp_path, methods=(Method.CBF,))
        assert run_trial(c, 0).results[Method.CBF] == run_trial(c, 17).results[Method.CBF]

    def test_bounds(self, tmp_path):
        c = small(tmp_path)
        for i in range(20):
            r = run_trial(c, i)
            assert 0 <= r.results[Method.UC].wng <= 11
            for m in r.results.values():
                assert m.out_power >= 0 and m.ok

    def test_numerical_failure_is_recorded(self, tmp_path):
        c = small(tmp_path, n_snapshots=5)
        r = run_trial(c, 0)
        assert "SingularCovarianceError" in r.results[Method.SMI].error
        assert math.isnan(r.results[Method.SMI].wng)
        assert r.results[Method.DL].ok  # loading rescues the rank-deficient SCM
        assert r.results[Method.CBF].ok


@pytest.fixture(scope="module")
def run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("exp")
    c = PAPER.replace(n_trials=60, output_dir=str(tmp), dl_policy=DlPolicy(pilot_trials=200))
    return c, run_experiment(c), tmp


class TestRunExperiment:
    def test_artifacts(self, run):
        c, _, out = run
        names = {"trials.csv", "summary.json", "wng_hist.csv", "wng_scatter.csv"}
        for m in c.methods:
            names |= {f"ecdf_{m}.csv", f"beampattern_{m}.csv", f"zeros_{m}.csv"}
        assert names <= {p.name for p in out.iterdir()}
        header = (out / "trials.csv").read_text().splitlines()[0]
        assert header == "trial,seed,method,out_power,wng,nd_db,total_out_power,error"
        assert len((out / "trials.csv").read_text().splitlines()) == 1 + 60 * 5
        zeros = (out / "zeros_UC.csv").read_text().splitlines()[1:]
        assert len(zeros) == 10
        assert all(abs(float(z.split(",")[2]) - 1) < 1e-15 for z in zeros)
        hist = (out / "wng_hist.csv").read_text().splitlines()
        assert sum(int(line.split(",")[-1]) for line in hist[1:]) == 60

    def test_summary_recomputable_from_csv(self, run):
        c, summary, out = run
        cols = read_trials_csv(out / "trials.csv")
        saved = json.loads((out / "summary.json").read_text())
        for m in c.methods:
            again = method_statistics(cols[m.value])
            for key, value in again.items():
                assert saved["per_method"][m.value][key] == pytest.approx(value, rel=1e-12, abs=0)
                assert summary.per_method[m.value][key] == pytest.approx(value, rel=1e-12, abs=0)

    def test_cbf_rows_constant(self, run):
        _, _, out = run
        cbf = read_trials_csv(out / "trials.csv")["CBF"]
        assert len(set(cbf["out_power"])) == 1 and len(set(cbf["wng"])) == 1

    def test_calibration_metadata(self, run):
        _, summary, _ = run
        assert summary.dl_factor > 0
        assert abs(summary.dl_pilot_mean_wng - summary.dl_target_wng) <= 0.01 * summary.dl_target_wng
        assert summary.ensemble_wng == pytest.approx(10.473, abs=1e-3)

    def test_single_trial_summary_equals_record(self, tmp_path):
        c = small(tmp_path, n_trials=1)
        summary = run_experiment(c)
        rec = run_trial(c, 0, 0.15)
        for m in c.methods:
            st = summary.per_method[m.value]
            assert st["median_out_power"] == rec.results[m].out_power == st["mean_out_power"]
            assert st["mean_wng"] == rec.results[m].wng

    def test_unwritable_output_fails_before_trials(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        c = small(tmp_path, output_dir=str(blocker / "sub"))
        with pytest.raises(OSError):
            run_experiment(c)

    def test_workers_do_not_change_results(self, tmp_path):
        a = small(tmp_path, n_trials=12, output_dir=str(tmp_path / "a"))
        b = a.replace(output_dir=str(tmp_path / "b"))
        run_experiment(a, workers=1)
        run_experiment(b, workers=2)
        assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()


def test_json_seventeen_digits():
    text = dumps_json({"a": 0.1, "b": [1, None, float("nan")], "c": "x\"y", "d": True})
    assert '"a": 0.10000000000000001' in text
    parsed = json.loads(text)
    assert parsed["a"] == 0.1 and parsed["b"] == [1, None, None] and parsed["c"] == 'x"y' and parsed["d"] is True
