"""Tests for the command-line interface."""

import csv
import json

import pytest

from dcots.cli import load_instance, main, performance_profile
from dcots.network import random_connected_network, serialize_native
from dcots.solver import CSV_HEADER


def write_instance(tmp_path, name, seed, **kwargs):
    path = tmp_path / name
    path.write_text(serialize_native(random_connected_network(seed, **kwargs)))
    return str(path)


def test_solve_prints_result_json_and_exits_zero(tmp_path, capsys):
    path = write_instance(tmp_path, "net.json", 1, max_buses=4)
    code = main(["solve", path, "--gap", "0"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0
    assert doc["status"] == "optimal-within-gap"
    assert doc["instance"] == "net.json"
    assert doc["mode"] == "default"
    assert set(doc["x"]) == {str(ln.id) for ln in load_instance(path).lines}


def test_solve_exit_codes_for_infeasible_and_time_limit(tmp_path, capsys):
    main(["gen", "subset-sum", "--a", "2", "--b", "3", "--out",
          str(tmp_path / "no.json")])
    assert main(["solve", str(tmp_path / "no.json")]) == 2
    path = write_instance(tmp_path, "net.json", 1, max_buses=4)
    assert main(["solve", path, "--time-limit", "0"]) == 3
    capsys.readouterr()


def test_solve_writes_the_result_file(tmp_path, capsys):
    path = write_instance(tmp_path, "net.json", 2, max_buses=4)
    out = tmp_path / "result.json"
    main(["solve", path, "--out", str(out), "--max-off", "0"])
    capsys.readouterr()
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal-within-gap"
    assert all(v == 1.0 for v in doc["x"].values())


def test_gen_subset_sum_emits_the_reduction_network(tmp_path, capsys):
    out = tmp_path / "red.json"
    assert main(["gen", "subset-sum", "--a", "1,2", "--b", "3",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    net = load_instance(str(out))
    assert len(net.buses) == 5 and len(net.lines) == 6
    assert net.generators[0].p_min == net.generators[0].p_max == 2.0


def test_gen_perturb_is_deterministic_per_seed(tmp_path, capsys):
    base = write_instance(tmp_path, "base.json", 3, max_buses=4)
    outs = []
    for name, seed in (("a.json", 9), ("b.json", 9), ("c.json", 10)):
        main(["gen", "perturb", "--base", base, "--seed", str(seed),
              "--out", str(tmp_path / name)])
        outs.append((tmp_path / name).read_text())
    capsys.readouterr()
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_gen_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "subset-sum", "--b", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["gen", "perturb"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_verify_suites_pass_and_unknown_suite_is_usage_error(capsys):
    assert main(["verify", "facets", "reduction"]) == 0
    out = capsys.readouterr().out
    assert "PASS facets" in out and "PASS reduction" in out
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_verify_negative_controls_are_detected(capsys):
    assert main(["verify", "--negative-controls"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS negative-control") == 3


def test_bench_writes_sorted_rows_and_profile(tmp_path, capsys):
    inst_dir = tmp_path / "insts"
    inst_dir.mkdir()
    for seed in (1, 2):
        write_instance(inst_dir, f"net{seed}.json", seed, max_buses=4)
    results = tmp_path / "r.csv"
    profile = tmp_path / "p.csv"
    code = main(["bench", str(inst_dir), "--modes", "default,basic",
                 "--gap", "0", "--out", str(results),
                 "--profile", str(profile)])
    capsys.readouterr()
    assert code == 0
    rows = list(csv.reader(results.read_text().splitlines()))
    assert rows[0] == CSV_HEADER
    keys = [(r[0], r[1]) for r in rows[1:]]
    assert keys == sorted(keys)
    assert len(keys) == 4
    prof = list(csv.reader(profile.read_text().splitlines()))
    assert prof[0] == ["tau", "fraction_within_tau_basic",
                       "fraction_within_tau_default"]
    assert float(prof[1][0]) == 1.0
    assert float(prof[-1][1]) == 1.0 and float(prof[-1][2]) == 1.0


def test_performance_profile_step_shapes():
    header, rows = performance_profile({"only": {"i1": 2.0}})
    assert header == ["tau", "fraction_within_tau_only"]
    assert rows == [["1.000000", "1.000000"]]
    _, rows = performance_profile({"a": {"i": 1.5}, "b": {"i": 1.5}})
    assert rows == [["1.000000", "1.000000", "1.000000"]]
    _, rows = performance_profile({"a": {"i1": 1.0, "i2": 2.0},
                                   "b": {"i1": None, "i2": None}})
    assert all(row[2] == "0.000000" for row in rows)
    assert rows[0][1] == "1.000000"


def test_budget_sweep_reports_infeasible_then_monotone_values(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    main(["gen", "subset-sum", "--a", "1,2", "--b", "2",
          "--out", str(tmp_path / "braess.json")])
    code = main(["budget-sweep", str(tmp_path / "braess.json"),
                 "--gap", "0", "--n-values", "0,1,2,3", "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["N", "ip_value", "lp_value"]
    assert rows[1][1] == "infeasible"
    values = [float(r[1]) for r in rows[2:]]
    assert values == sorted(values, reverse=True)
    assert values[0] == pytest.approx(2.0)


def test_csv_schema_is_stable():
    assert CSV_HEADER == ["instance", "mode", "status", "objective", "bound",
                          "gap", "nodes", "cuts", "z_LP", "z_LP_cuts",
                          "wall_time_s"]
