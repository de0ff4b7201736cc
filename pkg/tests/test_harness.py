import json
import math
import re

import numpy as np
import pytest

from swarmdiv.analyze import AnalysisError, analyze
from swarmdiv.cli import main
from swarmdiv.config import ConfigError, load_config, parse_config
from swarmdiv.objectives import ObjectiveError, make_objective, register_benchmark, REGISTRY
from swarmdiv.runner import (TRACE_HEADER, format_float, read_results_index, read_trace,
                             resolve_objective, run_campaign, run_from_config, run_single,
                             trace_path, write_trace_file)
from swarmdiv.swarm import derive_rng

BASE_CONFIG = """
schema_version = 1
objective.id = sphere
objective.dimension = 3
swarm.size = 8
run.iterations = 40
run.runs = 3
run.seed = 777
run.checkpoint_stride = 10
algorithms = qpso-fc, qpso-vc
"""


def write_config(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


# --- config parsing ------------------------------------------------------------

def test_parse_minimal_config():
    cfg = parse_config(BASE_CONFIG)
    assert cfg.objective.id == "sphere"
    assert cfg.objective.dimension == 3
    assert cfg.swarm_size == 8
    assert cfg.iterations == 40
    assert cfg.runs == 3
    assert cfg.seed == 777
    assert cfg.checkpoint_stride == 10
    assert cfg.algorithms == ["qpso-fc", "qpso-vc"]
    assert cfg.boundary == "clamp"
    assert cfg.out_dir is None


def test_parse_comments_and_params():
    text = BASE_CONFIG + """
# tuning overrides
algorithm.qpso-fc.alpha = 0.8   # fixed coefficient
algorithm.qpso-vc.alpha_start = 0.9
"""
    cfg = parse_config(text)
    assert cfg.algorithm_params["qpso-fc"] == {"alpha": 0.8}
    assert cfg.algorithm_params["qpso-vc"] == {"alpha_start": 0.9}


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(BASE_CONFIG + "run.cooldown = 5\n")


def test_unknown_algorithm_param_rejected():
    with pytest.raises(ConfigError, match="not a parameter"):
        parse_config(BASE_CONFIG + "algorithm.qpso-fc.chi = 0.7\n")


def test_param_for_unlisted_algorithm_rejected():
    with pytest.raises(ConfigError, match="not in the algorithms list"):
        parse_config(BASE_CONFIG + "algorithm.pso-in.c1 = 2.0\n")


def test_missing_schema_version_rejected():
    text = "\n".join(line for line in BASE_CONFIG.splitlines() if "schema" not in line)
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(text)


def test_wrong_schema_version_rejected():
    with pytest.raises(ConfigError, match="unsupported schema_version"):
        parse_config(BASE_CONFIG.replace("schema_version = 1", "schema_version = 2"))


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(BASE_CONFIG + "run.seed = 5\n")


def test_bad_values_rejected():
    with pytest.raises(ConfigError, match="expected an integer"):
        parse_config(BASE_CONFIG.replace("run.runs = 3", "run.runs = three"))
    with pytest.raises(ConfigError, match="unknown algorithm"):
        parse_config(BASE_CONFIG.replace("qpso-vc", "qpso-turbo"))
    with pytest.raises(ConfigError, match="swarm.size"):
        parse_config(BASE_CONFIG.replace("swarm.size = 8", "swarm.size = 1"))
    with pytest.raises(ConfigError, match="boundary"):
        parse_config(BASE_CONFIG + "swarm.boundary = bounce\n")
    with pytest.raises(ConfigError, match="checkpoint_stride"):
        parse_config(BASE_CONFIG.replace("run.checkpoint_stride = 10",
                                         "run.checkpoint_stride = 0"))


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.cfg")


def test_objective_domain_override_pairing():
    with pytest.raises(ConfigError, match="both"):
        parse_config(BASE_CONFIG + "objective.lower = -5\n")
    cfg = parse_config(BASE_CONFIG + "objective.lower = -5\nobjective.upper = 5\n")
    obj = resolve_objective(cfg)
    assert np.all(obj.lower == -5.0) and np.all(obj.upper == 5.0)


# --- objective resolution -------------------------------------------------------

def test_resolve_objective_with_transforms(tmp_path):
    shift_file = tmp_path / "shift.txt"
    shift_file.write_text("0.5 -0.5 1.0\n")
    cfg = parse_config(BASE_CONFIG + f"objective.shift = {shift_file}\n")
    obj = resolve_objective(cfg)
    assert obj.evaluate([0.5, -0.5, 1.0]) == 0.0

    cfg = parse_config(BASE_CONFIG + "objective.shift = random\n"
                       + "objective.transform_seed = 99\n")
    a = resolve_objective(cfg)
    b = resolve_objective(cfg)
    x = np.array([1.0, 2.0, 3.0])
    assert a.evaluate(x) == b.evaluate(x)  # synthesis is seed-stable

    cfg = parse_config(BASE_CONFIG + "objective.rotation = random\n")
    rotated = resolve_objective(cfg)
    assert rotated.evaluate(np.zeros(3)) == pytest.approx(0.0, abs=1e-20)


# --- single runs -----------------------------------------------------------------

def test_run_single_zero_iterations_traces_only_init():
    f = make_objective("sphere", 3)
    res = run_single(f, "qpso-fc", swarm_size=5, iterations=0, rng=derive_rng(1, "z", 0))
    assert len(res.records) == 1
    assert res.records[0].n == 0
    assert math.isnan(res.records[0].alpha)


def test_run_single_checkpoint_grid():
    f = make_objective("sphere", 3)
    res = run_single(f, "qpso-fc", swarm_size=5, iterations=25, rng=derive_rng(1, "g", 0),
                     checkpoint_stride=10)
    assert [r.n for r in res.records] == [0, 10, 20, 25]


def test_run_single_deterministic_and_monotone():
    f = make_objective("rastrigin", 3)
    a = run_single(f, "qpso-vc", swarm_size=6, iterations=50, rng=derive_rng(5, "d", 1),
                   run_index=1)
    b = run_single(f, "qpso-vc", swarm_size=6, iterations=50, rng=derive_rng(5, "d", 1),
                   run_index=1)
    assert a == b
    bests = [r.best_f for r in a.records]
    assert all(later <= earlier for earlier, later in zip(bests, bests[1:]))
    assert all(r.run == 1 for r in a.records)


def test_run_single_rejects_unknown_tag():
    f = make_objective("sphere", 2)
    with pytest.raises(ConfigError):
        run_single(f, "gradient-descent", swarm_size=5, iterations=5, rng=derive_rng(0))


def test_run_from_config_requires_listed_algorithm():
    cfg = parse_config(BASE_CONFIG)
    with pytest.raises(ConfigError):
        run_from_config(cfg, "pso-in", 0)


def test_trace_roundtrip(tmp_path):
    f = make_objective("sphere", 3)
    res = run_single(f, "qpso-fc", swarm_size=5, iterations=20, rng=derive_rng(2, "rt", 0))
    path = tmp_path / "trace.csv"
    write_trace_file(path, res.records)
    text = path.read_text()
    assert text.startswith(TRACE_HEADER + "\n")
    assert "\r" not in text
    back = read_trace(path)
    assert tuple(back) == res.records  # 17 significant digits round-trip exactly


def test_format_float_precision():
    x = 1.0 / 3.0
    assert float(format_float(x)) == x
    assert format_float(float("nan")) == "nan"


def test_read_trace_reports_line_numbers(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text(TRACE_HEADER + "\n0,0,1.0\n")
    with pytest.raises(ValueError, match="broken.csv:2"):
        read_trace(path)
    path.write_text("not,a,header\n")
    with pytest.raises(ValueError, match=":1"):
        read_trace(path)


# --- campaigns ---------------------------------------------------------------------

def test_campaign_layout_and_determinism(tmp_path):
    cfg_path = write_config(tmp_path, BASE_CONFIG)
    cfg = load_config(cfg_path)
    first = run_campaign(cfg, out_dir=tmp_path / "out1")
    second = run_campaign(cfg, out_dir=tmp_path / "out2")

    traces = sorted((tmp_path / "out1" / "traces").glob("*.csv"))
    assert len(traces) == 6  # 2 algorithms x 3 runs
    assert (tmp_path / "out1" / "results.csv").exists()
    assert (tmp_path / "out1" / "meta.json").exists()

    for t1 in traces:
        t2 = tmp_path / "out2" / "traces" / t1.name
        assert t1.read_bytes() == t2.read_bytes()
    assert (tmp_path / "out1" / "results.csv").read_bytes() == \
        (tmp_path / "out2" / "results.csv").read_bytes()

    outcomes = read_results_index(tmp_path / "out1")
    assert len(outcomes) == 6
    assert all(o.status == "ok" for o in outcomes)
    finals = {(o.tag, o.run_index): o.final_best for o in outcomes}
    assert finals[("qpso-fc", 0)] == first.outcomes[0].final_best
    meta = json.loads((tmp_path / "out1" / "meta.json").read_text())
    assert meta["seed"] == 777

    # per-run streams do not depend on the order algorithms are listed
    swapped = load_config(cfg_path)
    swapped.algorithms = list(reversed(swapped.algorithms))
    run_campaign(swapped, out_dir=tmp_path / "out3")
    for t1 in traces:
        t3 = tmp_path / "out3" / "traces" / t1.name
        assert t1.read_bytes() == t3.read_bytes()


def test_campaign_parallel_matches_serial(tmp_path):
    cfg = parse_config(BASE_CONFIG.replace("run.runs = 3", "run.runs = 2"))
    run_campaign(cfg, out_dir=tmp_path / "serial", jobs=1)
    run_campaign(cfg, out_dir=tmp_path / "parallel", jobs=2)
    for t in sorted((tmp_path / "serial" / "traces").glob("*.csv")):
        twin = tmp_path / "parallel" / "traces" / t.name
        assert t.read_bytes() == twin.read_bytes()
    assert (tmp_path / "serial" / "results.csv").read_bytes() == \
        (tmp_path / "parallel" / "results.csv").read_bytes()


def test_campaign_records_failures_and_continues(tmp_path):
    if "always_inf" not in REGISTRY:
        register_benchmark("always_inf", lambda x: float("inf"), -1.0, 1.0, "fails")
    cfg = parse_config(BASE_CONFIG.replace("objective.id = sphere",
                                           "objective.id = always_inf"))
    result = run_campaign(cfg, out_dir=tmp_path / "boom")
    assert all(o.status == "failed" for o in result.outcomes)
    outcomes = read_results_index(tmp_path / "boom")
    assert all("particle 0" in o.error for o in outcomes)
    assert not list((tmp_path / "boom" / "traces").glob("*.csv"))


def test_campaign_requires_out_dir():
    cfg = parse_config(BASE_CONFIG)
    with pytest.raises(ConfigError, match="output"):
        run_campaign(cfg)


# --- analysis ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def archive(tmp_path_factory):
    out = tmp_path_factory.mktemp("campaign")
    cfg = parse_config(BASE_CONFIG)
    run_campaign(cfg, out_dir=out)
    return out


def test_analyze_summary(archive):
    written = analyze(archive, "summary")
    names = {p.name for p in written}
    assert "summary.csv" in names and "summary.txt" in names
    assert "fig_convergence.png" in names
    lines = (archive / "analysis" / "summary.csv").read_text().splitlines()
    assert lines[0] == "algorithm,runs_ok,runs_failed,mean_best,std_best"
    assert len(lines) == 3


def test_analyze_correlation(archive):
    written = analyze(archive, "correlation")
    names = {p.name for p in written}
    assert "correlation_qpso-fc.csv" in names
    assert "fig_correlation_qpso-fc.png" in names
    assert "fig_diversity_qpso-vc.png" in names
    lines = (archive / "analysis" / "correlation_qpso-fc.csv").read_text().splitlines()
    assert lines[0] == "n,rho_d_X,rho_d_P,rho_s_X,rho_s_P"
    assert len(lines) == 6  # checkpoints 0,10,20,30,40


def test_analyze_compare(archive):
    written = analyze(archive, "compare", significance=0.05)
    names = {p.name for p in written}
    assert {"compare.csv", "ranks.csv", "compare.txt", "fig_compare.png"} <= names
    txt = (archive / "analysis" / "compare.txt").read_text()
    assert txt.startswith("Ranking:")  # procedure documented in the header
    ranks = (archive / "analysis" / "ranks.csv").read_text().splitlines()
    assert ranks[0] == "algorithm,runs,mean_best,std_best,rank"


def test_analyze_no_figures(tmp_path, archive):
    written = analyze(archive, "summary", out_dir=tmp_path / "plain", figures=False)
    assert all(p.suffix != ".png" for p in written)


def test_analyze_single_run_correlations_undefined(tmp_path):
    cfg = parse_config(BASE_CONFIG.replace("run.runs = 3", "run.runs = 1"))
    run_campaign(cfg, out_dir=tmp_path / "solo")
    analyze(tmp_path / "solo", "correlation", figures=False)
    lines = (tmp_path / "solo" / "analysis" / "correlation_qpso-fc.csv").read_text().splitlines()
    for line in lines[1:]:
        assert re.fullmatch(r"\d+,,,,", line)  # undefined cells stay empty


def test_analyze_identical_algorithms_tie(tmp_path):
    # two archives' worth of identical finals: build results.csv by hand
    out = tmp_path / "tie"
    out.mkdir()
    rows = ["algorithm,run,status,final_best,error"]
    for tag in ("a-co", "b-co"):
        for r, v in enumerate((1.0, 2.0, 3.0)):
            rows.append(f"{tag.replace('-co', '')}co,{r},ok,{v},")
    (out / "results.csv").write_text("\n".join(rows) + "\n")
    # rewrite with distinct tags
    rows = ["algorithm,run,status,final_best,error"]
    for tag in ("alpha", "beta"):
        for r, v in enumerate((1.0, 2.0, 3.0)):
            rows.append(f"{tag},{r},ok,{v},")
    (out / "results.csv").write_text("\n".join(rows) + "\n")
    analyze(out, "compare", figures=False)
    ranks = (out / "analysis" / "ranks.csv").read_text().splitlines()[1:]
    assert all(line.endswith(",1") for line in ranks)
    compare = (out / "analysis" / "compare.csv").read_text().splitlines()[1]
    fields = compare.split(",")
    assert float(fields[2]) == 0.0 and float(fields[3]) == 1.0


def test_analyze_failure_modes(tmp_path):
    with pytest.raises(AnalysisError, match="not a campaign archive"):
        analyze(tmp_path / "nothing", "summary")
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "results.csv").write_text("wrong,header\n")
    with pytest.raises(AnalysisError, match="results"):
        analyze(bad, "summary")
    single = tmp_path / "single_alg"
    single.mkdir()
    (single / "results.csv").write_text(
        "algorithm,run,status,final_best,error\nqpso-fc,0,ok,1.0,\nqpso-fc,1,ok,2.0,\n")
    with pytest.raises(AnalysisError, match="two algorithms"):
        analyze(single, "compare")
    with pytest.raises(AnalysisError, match="unknown mode"):
        analyze(single, "histogram")


# --- command line --------------------------------------------------------------------

def test_cli_functions(capsys):
    assert main(["functions"]) == 0
    out = capsys.readouterr().out
    assert "sphere" in out and "griewank" in out and "[-600, 600]" in out


def test_cli_run_to_file_and_stdout(tmp_path, capsys):
    cfg_path = write_config(tmp_path, BASE_CONFIG)
    trace = tmp_path / "run.csv"
    assert main(["run", "--config", str(cfg_path), "--algorithm", "qpso-fc",
                 "--trace", str(trace)]) == 0
    assert trace.read_text().startswith(TRACE_HEADER)
    capsys.readouterr()
    assert main(["run", "--config", str(cfg_path), "--algorithm", "qpso-fc"]) == 0
    out = capsys.readouterr().out
    assert out.startswith(TRACE_HEADER)


def test_cli_run_seed_override_changes_trace(tmp_path):
    cfg_path = write_config(tmp_path, BASE_CONFIG)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    main(["run", "--config", str(cfg_path), "--algorithm", "qpso-fc", "--trace", str(a)])
    main(["run", "--config", str(cfg_path), "--algorithm", "qpso-fc", "--seed", "9",
          "--trace", str(b)])
    assert a.read_text() != b.read_text()


def test_cli_campaign_and_analyze(tmp_path, capsys):
    cfg_path = write_config(tmp_path, BASE_CONFIG + f"output.dir = {tmp_path / 'arch'}\n")
    assert main(["campaign", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "arch" / "results.csv").exists()
    capsys.readouterr()
    assert main(["analyze", str(tmp_path / "arch"), "--mode", "summary",
                 "--no-figures"]) == 0
    out = capsys.readouterr().out
    assert "summary.csv" in out


def test_cli_exit_codes(tmp_path, capsys):
    missing = tmp_path / "absent.cfg"
    assert main(["campaign", "--config", str(missing)]) == 1
    bad_cfg = write_config(tmp_path, BASE_CONFIG + "run.warp = 9\n", name="bad.cfg")
    assert main(["campaign", "--config", str(bad_cfg)]) == 1
    assert main(["analyze", str(tmp_path / "void"), "--mode", "summary"]) == 3
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["analyze", str(tmp_path), "--mode", "histogram"])
    assert exc.value.code == 1  # usage errors count as configuration errors
    capsys.readouterr()


def test_cli_campaign_failure_exit_code(tmp_path):
    if "always_inf" not in REGISTRY:
        register_benchmark("always_inf", lambda x: float("inf"), -1.0, 1.0, "fails")
    cfg_path = write_config(
        tmp_path,
        BASE_CONFIG.replace("objective.id = sphere", "objective.id = always_inf")
        + f"output.dir = {tmp_path / 'boom'}\n")
    assert main(["campaign", "--config", str(cfg_path)]) == 2
