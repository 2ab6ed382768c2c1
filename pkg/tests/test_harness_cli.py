import json

import pytest

from robustmatch import edgelist
from robustmatch.cli import EXIT_ASSERT, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from robustmatch.harness import (
    ConfigError,
    ExperimentConfig,
    dumps_report,
    load_config,
    recompute_summary,
    run_experiment,
    sweep_experiment,
    trial_seed,
    verify_experiment,
)


def test_trial_seeds_are_distinct_and_stable():
    seeds = [trial_seed(0, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [trial_seed(0, i) for i in range(100)]
    assert trial_seed(1, 0) != trial_seed(0, 0)


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(verifiers=["nope"])
    with pytest.raises(ConfigError):
        ExperimentConfig(instance={"family": "hypercube"})
    with pytest.raises(FileNotFoundError):
        ExperimentConfig(instance={"family": "file", "path": str(tmp_path / "missing")})


def test_load_config_with_overrides(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"instance": {"family": "four-layer", "m": 2}, "protocol": {"k": 3}, "trials": 4}))
    cfg = load_config(str(path), {"epsilon": 0.1, "seed": 9, "trials": None})
    assert cfg.protocol["k"] == 3 and cfg.protocol["epsilon"] == 0.1
    assert cfg.master_seed == 9 and cfg.trials == 4
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        load_config(str(path))


def small_cfg(**kw):
    base = dict(
        instance={"family": "gnp", "n": 60, "density": 0.2, "seed": 1},
        protocol={"epsilon": 0.2, "lam": 0.25, "beta": 8, "fallback_edge_threshold": 0},
        trials=6,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_report_is_self_contained():
    rep = run_experiment(small_cfg())
    assert len(rep["trials"]) == 6
    again = json.loads(dumps_report(rep))
    assert recompute_summary(again["trials"]) == again["summary"]
    s = rep["summary"]["ratio"]
    ratios = [t["ratio"] for t in rep["trials"]]
    assert s["min"] == min(ratios) and s["max"] == max(ratios)
    assert s["ci99"][0] <= s["mean"] <= s["ci99"][1]


def test_parallel_and_serial_agree():
    a = run_experiment(small_cfg(workers=1))
    b = run_experiment(small_cfg(workers=2))
    assert dumps_report(a) == dumps_report(b)


def test_expectations_drive_pass_flag():
    rep = run_experiment(small_cfg(expect={"mean_ratio": [0.0, 0.1]}))
    assert not rep["passed"]
    rep = run_experiment(small_cfg(expect={"mean_ratio": [0.0, 1.0], "max_ci99_half_width": 1.0}))
    assert rep["passed"]


def test_verify_report():
    cfg = small_cfg(verifiers=["peeling", "blossom", "extraction", "overflow", "expectation"], trials=3,
                    protocol={"epsilon": 0.3, "lam": 0.25, "beta": 8, "fallback_edge_threshold": 0})
    rep = verify_experiment(cfg)
    assert rep["passed"], rep["assertions"]
    assert rep["results"]["expectation"]["exact_equalities"] == rep["results"]["expectation"]["vertices"]


def test_sweep_needs_sizes():
    with pytest.raises(ConfigError):
        sweep_experiment(small_cfg())


def test_sweep_report():
    cfg = small_cfg(trials=1, sweep={"n": [128, 256, 512], "avg_degree": 16})
    rep = sweep_experiment(cfg)
    assert [p["n"] for p in rep["points"]] == [128, 256, 512]
    assert rep["summary"]["constant_C"] > 0 and rep["summary"]["exponent"] is not None
    assert dumps_report(rep) == dumps_report(sweep_experiment(cfg))


# --- CLI ----------------------------------------------------------------------


def test_cli_gen_three_layer(tmp_path, capsys):
    out = tmp_path / "g.el"
    assert main(["gen", "three-layer", "--m", "40", "--out", str(out)]) == EXIT_OK
    g = edgelist.load(out)
    assert g.num_vertices == 240
    side = json.loads((tmp_path / "g.el.json").read_text())
    assert side["m"] == 40 and len(side["A"]) == 3


def test_cli_gen_four_layer_and_gnp(tmp_path):
    out = tmp_path / "f.el"
    assert main(["gen", "four-layer", "--m", "3", "--out", str(out)]) == EXIT_OK
    assert edgelist.load(out).num_vertices == 24
    a, b = tmp_path / "a.el", tmp_path / "b.el"
    for path in (a, b):
        assert main(["gen", "gnp", "--n", "1000", "--density", "0.01", "--seed", "5", "--out", str(path)]) == 0
    assert a.read_text() == b.read_text()


def test_cli_run_writes_report(tmp_path):
    out = tmp_path / "r.json"
    code = main(["run", "--family", "three-layer", "--m", "40", "--trials", "10", "--inject-adversarial-h",
                 "--fallback-threshold", "0", "--out", str(out)])
    assert code == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["config"]["protocol"]["inject_adversarial_h"] is True
    assert all(t["injected_H"] for t in rep["trials"])


def test_cli_fallback_regime_ratio_one(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--family", "gnp", "--n", "40", "--density", "0.3", "--trials", "5",
                 "--expect-ratio", "1", "1", "--out", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert all(t["fallback_used"] and t["ratio"] == 1.0 for t in rep["trials"])


def test_cli_assertion_failure_exit_code(tmp_path):
    out = tmp_path / "r.json"
    code = main(["run", "--family", "three-layer", "--m", "40", "--trials", "5", "--inject-adversarial-h",
                 "--fallback-threshold", "0", "--expect-ratio", "0.95", "1.0", "--out", str(out)])
    assert code == EXIT_ASSERT


def test_cli_usage_errors(capsys):
    assert main(["run", "--trials", "0"]) == EXIT_USAGE
    assert main(["run", "--epsilon", "0.9"]) == EXIT_USAGE
    assert main(["sweep", "--sizes"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_cli_io_errors(tmp_path):
    assert main(["run", "--instance-file", str(tmp_path / "missing.el")]) == EXIT_IO
    bad = tmp_path / "bad.el"
    bad.write_text("3 2\n0 1\n")
    assert main(["run", "--instance-file", str(bad)]) == EXIT_IO
    assert main(["run", "--config", str(tmp_path / "none.json")]) == EXIT_IO


def test_cli_runs_on_edge_list_file(tmp_path):
    path = tmp_path / "g.el"
    main(["gen", "planted-matching", "--n", "200", "--density", "0.05", "--out", str(path)])
    out = tmp_path / "r.json"
    assert main(["run", "--instance-file", str(path), "--trials", "3", "--fallback-threshold", "0",
                 "--epsilon", "0.2", "--lam", "0.25", "--beta", "8", "--out", str(out)]) == EXIT_OK


def test_cli_verify_and_stdout(capsys):
    code = main(["verify", "--family", "four-layer", "--m", "3", "--beta", "4", "--lam", "0.25",
                 "--verifiers", "augment-bound"])
    assert code == EXIT_OK
    captured = capsys.readouterr()
    rep = json.loads(captured.out)
    assert rep["results"]["augment-bound"]["max_value_exact"] == "9"
    assert "PASS augment-bound" in captured.err


def test_cli_reports_are_byte_identical(tmp_path):
    args = ["run", "--family", "gnp", "--n", "80", "--density", "0.2", "--trials", "4", "--seed", "3",
            "--fallback-threshold", "0", "--epsilon", "0.2", "--lam", "0.25", "--beta", "8"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
