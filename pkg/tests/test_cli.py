import json
import subprocess
import sys

import pytest

from xyzbethe.cli import EXIT_CONFIG, EXIT_ERROR, EXIT_OK, EXIT_TOLERANCE, main
from xyzbethe.theta import ModularContext, eval_theta


def write_cfg(tmp_path, **fields):
    cfg = {"schema": 1, **fields}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def records(path):
    return [json.loads(line) for line in open(path)]


def test_theta_round_trip(capsys):
    assert main(["theta", "--kind", "1", "--u", "0.25", "--tau", "0.1+0.8i"]) == EXIT_OK
    val = complex(capsys.readouterr().out.strip().strip("()"))
    assert val == complex(eval_theta(1, 0.25, ModularContext(0.1 + 0.8j)))


def test_theta_zero(capsys):
    main(["theta", "--kind", "1", "--u", "0", "--tau", "0.5i"])
    assert complex(capsys.readouterr().out.strip().strip("()")) == 0


def test_theta_bad_tau(capsys):
    assert main(["theta", "--kind", "1", "--u", "0", "--tau", "0.3-0.2i"]) == EXIT_CONFIG
    assert main(["theta", "--kind", "1", "--u", "abc"]) == EXIT_CONFIG


def test_model_output(tmp_path):
    out = tmp_path / "m.json"
    assert main(["model", "--N", "2", "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    jz = complex(*data["couplings"]["Jz"])
    assert abs(jz) < 1e-14
    assert data["rtt_residual"] < 1e-10


def test_solve_bethe_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve-bethe", "--N", "4", "--out", str(a)]) == EXIT_OK
    assert main(["solve-bethe", "--N", "4", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    state = json.loads(a.read_text())["states"][0]
    assert len(state["roots"]) == 4 and len(state["selected"]) == 2
    assert max(state["residuals"]) < 1e-9
    assert state["surviving_sector"] in (1, 3)


def test_solve_bethe_coarse_grid(capsys):
    assert main(["solve-bethe", "--N", "4", "--grid", "1"]) == EXIT_ERROR
    assert "--grid" in capsys.readouterr().err


def test_verify_only_tag(tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--only", "appendix-c", "--N", "4", "--out", str(out)]) == EXIT_OK
    recs = records(out)
    checks = [r for r in recs if r["record"] == "check"]
    assert {r["check_id"] for r in checks} == {
        "cascade.hh-sum.N4",
        "cascade.rank-one-trace.N4",
        "cascade.contour-g.N4",
        "cascade.cal-ab.N4",
    }
    assert all(r["wall_time"] is None for r in checks)
    summary = recs[-1]
    assert summary["record"] == "summary" and summary["exit_code"] == 0
    assert summary["config"]["N"] == [4]


def test_verify_byte_identical_across_jobs(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["verify", "--only", "theta,vertex", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b), "--jobs", "3"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_tolerance_failure_exit(tmp_path, capsys):
    cfg = write_cfg(tmp_path, tolerances={"theta.shift": 1e-30})
    out = tmp_path / "r.jsonl"
    code = main(["verify", "--config", cfg, "--only", "theta.shift", "--out", str(out)])
    assert code == EXIT_TOLERANCE
    assert "first failing check: theta.shift" in capsys.readouterr().err
    assert records(out)[0]["status"] == "fail"


def test_odd_n_is_config_error(tmp_path, capsys):
    assert main(["verify", "--N", "3"]) == EXIT_CONFIG
    assert "even" in capsys.readouterr().err
    cfg = write_cfg(tmp_path, N=[4, 5])
    assert main(["verify", "--config", cfg]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "text,needle",
    [
        ('{"schema": 1,\n "seed": }', "line 2"),
        ('{"schema": 2}', "schema"),
        ('{"schema": 1, "bogus": 3}', "bogus"),
        ('{"schema": 1, "tau": [0.1, -0.8]}', "tau"),
        ('{"schema": 1, "kappa": [3]}', "kappa"),
        ('{"schema": 1, "tolerances": {"x": -1}}', "tolerances"),
        ('{"schema": 1, "xi": [[0.1, 0], [0.2, 0]]}', "xi"),
    ],
)
def test_config_errors(tmp_path, capsys, text, needle):
    path = tmp_path / "c.json"
    path.write_text(text)
    assert main(["verify", "--config", str(path)]) == EXIT_CONFIG
    assert needle in capsys.readouterr().err


def test_unknown_only_pattern():
    assert main(["verify", "--only", "no-such-check"]) == EXIT_CONFIG


def test_non_free_fermion_rejected_for_bethe(tmp_path):
    cfg = write_cfg(tmp_path, eta="1/3")
    assert main(["solve-bethe", "--config", cfg]) == EXIT_CONFIG
    assert main(["model", "--config", cfg, "--N", "2", "--out", str(tmp_path / "m")]) == EXIT_OK


def test_scalar_product_selection_rule_flag(tmp_path):
    # lambda = nu_s + 1 at kappa = 0 violates the selection rule
    sector = tmp_path / "s.json"
    main(["solve-bethe", "--N", "2", "--out", str(sector)])
    nu_s = json.loads(sector.read_text())["states"][0]["surviving_sector"]
    cfg = write_cfg(tmp_path, N=[2], kappa=[0], **{"lambda": nu_s + 1})
    out = tmp_path / "r.jsonl"
    assert main(["scalar-product", "--config", cfg, "--out", str(out)]) == EXIT_OK
    recs = {r["check_id"]: r for r in records(out) if r["record"] == "check"}
    req = recs["scalar.requested-sector.N2"]
    assert req["detail"]["flag"] == "selection-rule"
    assert req["detail"]["selection_rule_kappa"] == [0]
    assert recs["scalar.selection-rule.N2"]["detail"]["flag"] == "selection-rule"


def test_timings_flag(tmp_path):
    out = tmp_path / "r.jsonl"
    main(["verify", "--only", "theta.shift", "--timings", "--out", str(out)])
    assert records(out)[0]["wall_time"] is not None


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "xyzbethe.cli", "theta", "--kind", "2", "--u", "-0.25"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    # theta2(u) = theta1(u + 1/2)
    val = complex(proc.stdout.strip().strip("()"))
    assert abs(val - eval_theta(1, 0.25, ModularContext(0.1 + 0.8j))) < 1e-14
