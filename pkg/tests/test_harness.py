import json

import numpy as np
import pytest
import yaml

from yeastmc import cli
from yeastmc.config import config_from_dict, load_config
from yeastmc.core import Concentration, ConfigurationError, DataError, Trajectory
from yeastmc.events import detect_events, per_pulse_peaks
from yeastmc.experiment import run_experiment
from yeastmc.outputs import emit_outputs
from yeastmc.protocols import protocol_horizon, single_pulse_protocol, three_pulse_protocol
from yeastmc.reference import ReferenceCurve, compare_reference

FAST = {"scenario": "rx_only_synthetic", "strain": "bar1_delta", "horizon_min": 30.0,
        "stimulus": {"protocol": "single_pulse", "amplitude_uM": 10.0},
        "output": {"sample_dt_min": 0.5}}


def _write_cfg(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


# configuration

def test_unknown_key_names_field_path():
    with pytest.raises(ConfigurationError, match=r"stimulus\.amplitude"):
        config_from_dict({"scenario": "rx_only_synthetic", "stimulus": {"amplitude": 3}})


def test_bad_type_names_field_path():
    with pytest.raises(ConfigurationError, match=r"solver\.rtol"):
        config_from_dict({"scenario": "rx_only_synthetic", "solver": {"rtol": "tight"}})


def test_missing_scenario_and_bad_literal():
    with pytest.raises(ConfigurationError, match="scenario"):
        config_from_dict({})
    with pytest.raises(ConfigurationError, match="strain"):
        config_from_dict({"scenario": "rx_only_synthetic", "strain": "wild"})


def test_channel_scenario_needs_positive_distance():
    with pytest.raises(ConfigurationError, match=r"r_rx_m"):
        config_from_dict({"scenario": "channel_only", "geometry": {"r_rx_m": 0.0}})


def test_segments_accept_yaml_exponent_strings(tmp_path):
    p = _write_cfg(tmp_path, {"scenario": "rx_only_synthetic",
                              "stimulus": {"protocol": "segments", "segments": [[0, 5, "1.0e3"]]}})
    prof = load_config(p).stimulus_profile()
    assert prof.level_nM(1.0) == 1000.0


def test_digest_tracks_content():
    a = config_from_dict(FAST)
    assert a.digest() == config_from_dict(FAST).digest()
    assert a.digest() != a.replace_path("stimulus.amplitude_uM", 11.0).digest()


# protocols

def test_three_pulse_breakpoints_and_horizon():
    prof = three_pulse_protocol(Concentration(10.0, "µM"))
    assert prof.breakpoints == (0.0, 1.0, 121.0, 122.0, 242.0, 243.0)
    assert protocol_horizon() == 363.0


def test_single_pulse_is_one_pulse_train():
    a = three_pulse_protocol(Concentration(1.0), n=1)
    assert a == single_pulse_protocol(Concentration(1.0))


# events

def _gaussians(centers, t=np.linspace(0, 363, 3631)):
    y = sum(np.exp(-0.5 * ((t - c) / 8.0) ** 2) for c in centers)
    return Trajectory(("s",), t, y)


def test_detect_events_recovers_constructed_peaks():
    rep = detect_events(_gaussians([50.0, 170.0, 290.0]), "s")
    np.testing.assert_allclose(rep.event_times, [50.0, 170.0, 290.0], atol=0.05)
    assert rep.rate_per_hour == pytest.approx(3 / 6.05)


def test_detect_events_monotone_and_flat():
    t = np.linspace(0, 200, 401)
    assert detect_events(Trajectory(("s",), t, t ** 2), "s").event_count == 0
    assert detect_events(Trajectory(("s",), t, np.ones_like(t)), "s").event_count == 0


def test_detect_events_affine_invariant():
    tr = _gaussians([40.0, 90.0, 250.0])
    scaled = Trajectory(("s",), tr.times, 7.5 * tr.values + 3.0)
    assert detect_events(tr, "s").event_times == detect_events(scaled, "s").event_times


def test_detect_events_short_trace_is_data_error():
    with pytest.raises(DataError):
        detect_events(Trajectory(("s",), [0.0, 10.0], [0.0, 1.0]), "s")


def test_per_pulse_peaks():
    tr = _gaussians([50.0, 170.0, 290.0])
    np.testing.assert_allclose(per_pulse_peaks(tr, "s", [0, 121, 242]), 1.0, atol=1e-3)


# reference comparison

def test_compare_reference_identity_and_shift():
    tr = _gaussians([60.0])
    ref = ReferenceCurve(tr.times[::10], tr.column("s")[::10], np.zeros(tr.times[::10].size))
    rep = compare_reference(tr, "s", ref)
    assert rep.peak_time_error == 0.0 and rep.nrmse == pytest.approx(0.0, abs=1e-12)
    shifted = ReferenceCurve(ref.times + 10.0, ref.values, ref.stderr)
    assert compare_reference(tr, "s", shifted).peak_time_error == pytest.approx(10.0)


def test_compare_reference_amplitude_does_not_gate():
    tr = _gaussians([60.0])
    ref = ReferenceCurve(tr.times, 50 * tr.column("s"), np.zeros(len(tr)))
    rep = compare_reference(tr, "s", ref)
    assert rep.passed and rep.amplitude_ratio == pytest.approx(1 / 50)


def test_compare_reference_no_overlap():
    tr = _gaussians([60.0])
    ref = ReferenceCurve(np.array([400.0, 410.0]), np.ones(2), np.zeros(2))
    with pytest.raises(DataError):
        compare_reference(tr, "s", ref)


def test_reference_csv_round_trip(tmp_path):
    ref = ReferenceCurve(np.array([0.0, 30.0, 60.0]), np.array([1.0, 4.5, 2.0]), np.array([0.1, 0.3, 0.2]),
                         "synthetic test curve")
    ref.to_csv(tmp_path / "r.csv")
    back = ReferenceCurve.from_csv(tmp_path / "r.csv")
    assert back.provenance == "synthetic test curve"
    np.testing.assert_array_equal(back.values, ref.values)


def test_reference_rejects_negative_values():
    with pytest.raises(DataError):
        ReferenceCurve(np.array([0.0, 1.0]), np.array([1.0, -1.0]), np.zeros(2))


# experiment and outputs

@pytest.fixture(scope="module")
def fast_result():
    return run_experiment(config_from_dict(FAST))


def test_rx_only_unit_audit(fast_result):
    rec = fast_result.trajectories["receiver"]
    assert rec.column("alpha")[rec.times < 1.0].max() == 1e4   # 10 µM in nM


def test_outputs_written_and_deterministic(tmp_path, fast_result):
    a = emit_outputs(fast_result, tmp_path / "a")
    b = emit_outputs(fast_result, tmp_path / "b")
    names = sorted(p.name for p in a)
    assert {"receiver.csv", "fold_change.csv", "checks.csv", "manifest.json", "fold_change.svg"} <= set(names)
    for pa, pb in zip(sorted(a), sorted(b)):
        assert pa.read_bytes() == pb.read_bytes(), pa.name
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["config_sha256"] == fast_result.config.digest()
    assert all(pf["version"] for pf in man["parameter_files"])


def test_csv_output_round_trip(tmp_path, fast_result):
    emit_outputs(fast_result, tmp_path)
    back = Trajectory.from_csv(tmp_path / "receiver.csv")
    assert np.array_equal(back.values, fast_result.trajectories["receiver"].values)


def test_unwritable_output_dir(tmp_path, fast_result):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_outputs(fast_result, blocker / "sub")


def test_zero_amplitude_keeps_fold_change_one():
    cfg = config_from_dict({**FAST, "stimulus": {"protocol": "none"}})
    fc = run_experiment(cfg).trajectories["fold_change"]
    assert np.max(np.abs(fc.values - 1.0)) < 1e-6


# CLI

def test_cli_success_and_global_flags(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, FAST)
    out = tmp_path / "run"
    assert cli.main(["simulate", str(cfg), "--out-dir", str(out), "--seed", "5"]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 5
    assert cli.main(["--rtol", "1e-7", "simulate", str(cfg), "--out-dir", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["config"]["solver"]["rtol"] == 1e-7


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, {**FAST, "bogus": 1})
    assert cli.main(["simulate", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err
    assert cli.main(["simulate", str(tmp_path / "missing.yaml")]) == 2


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, {**FAST, "solver": {"max_steps": 3}})
    assert cli.main(["simulate", str(cfg), "--out-dir", str(tmp_path / "o")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_validate_against_reference(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, FAST)
    run = run_experiment(config_from_dict(FAST)).trajectories["fold_change"]
    ref = ReferenceCurve(run.times, run.column("Fus1"), np.zeros(len(run)), "self")
    ref.to_csv(tmp_path / "ref.csv")
    args = ["validate", str(cfg), "--out-dir", str(tmp_path / "v"), "--reference", str(tmp_path / "ref.csv")]
    assert cli.main(args) == 0
    far = ReferenceCurve(run.times + 200.0, run.column("Fus1"), np.zeros(len(run)), "shifted")
    far.to_csv(tmp_path / "far.csv")
    args[-1] = str(tmp_path / "far.csv")
    assert cli.main(args) == 2   # no overlap is a data error


def test_cli_sweep(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, FAST)
    out = tmp_path / "sw"
    assert cli.main(["sweep", str(cfg), "--out-dir", str(out), "--param", "stimulus.amplitude_uM",
                     "--values", "1", "10"]) == 0
    rows = (out / "sweep_summary.csv").read_text().splitlines()
    assert len(rows) == 3
    assert (out / "sweep_001" / "fold_change.csv").exists()


def test_cli_sweep_unknown_param(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, FAST)
    assert cli.main(["sweep", str(cfg), "--param", "stimulus.nope", "--values", "1"]) == 2


def test_cli_mc_oracle(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, {"scenario": "mc_oracle", "geometry": {"r_rx_m": 1e-5},
                                "channel": {"k_alpha": 0.05},
                                "mc": {"n_particles": 20000, "sample_times_s": [0.1, 0.2]}})
    assert cli.main(["mc-oracle", str(cfg), "--out-dir", str(tmp_path / "mc")]) in (0, 4)
    assert (tmp_path / "mc" / "mc_comparison.csv").exists()
