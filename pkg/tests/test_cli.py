import json

import pytest

from benfordrec.cli import main
from benfordrec.recurrence import from_csv


def run(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_gen_csv_by_extension(tmp_path, capsys):
    path = tmp_path / "fib.csv"
    assert run(["gen", "--preset", "fibonacci", "-N", "100", "-o", str(path)], capsys)[0] == 0
    text = path.read_text()
    assert text.startswith("# config_hash=")
    s = from_csv(text)
    assert len(s) == 100
    assert float(s.values[10]) == 89.0


def test_gen_inline_spec(capsys):
    rc, out, _ = run(["gen", "--coeff", "n", "--coeff", "1", "--init", "1", "--init", "1", "-N", "6"], capsys)
    assert rc == 0
    d = json.loads(out)
    assert d["sequence"]["values"][-1] == "+2.2500000000000000e+2"


def test_parse_error_exit_code(capsys):
    rc, _, err = run(["gen", "--coeff", "n + * 2", "--coeff", "1", "--init", "1", "--init", "1"], capsys)
    assert rc == 2
    assert "byte offset 4" in err
    assert "^" in err


@pytest.mark.parametrize("argv", [
    ["gen"],
    ["gen", "--preset", "fibonacci", "--coeff", "1"],
    ["gen", "--preset", "nope"],
    ["predict", "--preset", "linear_n"],
    ["montecarlo", "--preset", "fibonacci"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


@pytest.mark.parametrize("preset,N,verdict", [
    ("fibonacci", 2000, "consistent"),
    ("power100", 2000, "inconsistent"),
    ("fibonacci", 100, "insufficient-sample"),
])
def test_analyze_verdicts(preset, N, verdict, capsys):
    rc, out, _ = run(["analyze", "--preset", preset, "-N", str(N)], capsys)
    assert rc == 0
    assert json.loads(out)["report"]["verdict"] == verdict


def test_analyze_input_file_and_plot_data(tmp_path, capsys):
    seq = tmp_path / "s.csv"
    run(["gen", "--preset", "two_step", "-N", "1500", "-o", str(seq)], capsys)
    plot = tmp_path / "plot.txt"
    rc, out, _ = run(["analyze", "--input", str(seq), "--plot-data", str(plot)], capsys)
    assert rc == 0
    d = json.loads(out)
    assert d["report"]["verdict"] == "consistent"
    assert len(d["input_sha256"]) == 64
    lines = plot.read_text().splitlines()
    assert [ln.split()[0] for ln in lines] == [str(k) for k in range(1, 10)]


def test_expect_flag(capsys):
    assert run(["analyze", "--preset", "power100", "-N", "2000", "--expect", "benford"], capsys)[0] == 1
    assert run(["analyze", "--preset", "fibonacci", "-N", "2000", "--expect"], capsys)[0] == 0


def test_thresholds_flow_into_verdict(capsys):
    rc, out, _ = run(["analyze", "--preset", "fibonacci", "-N", "100", "--min-sample", "50",
                      "--max-digit-dev", "0.5", "--max-star", "0.5", "--max-weyl", "0.9"], capsys)
    d = json.loads(out)
    assert d["config"]["thresholds"]["min_sample"] == 50
    assert d["report"]["verdict"] == "consistent"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"preset": "fibonacci", "horizon": 50}))
    rc, out, _ = run(["gen", "--config", str(cfg), "-N", "20"], capsys)
    assert rc == 0
    assert len(json.loads(out)["sequence"]["values"]) == 20
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["gen", "--config", str(cfg)], capsys)[0] == 2


def test_config_hash_ignores_output_path(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["predict", "--preset", "fibonacci", "-o", str(a)], capsys)
    run(["predict", "--preset", "fibonacci", "-o", str(b)], capsys)
    assert json.loads(a.read_text())["config_hash"] == json.loads(b.read_text())["config_hash"]


@pytest.mark.parametrize("preset,status", [
    ("fibonacci", "benford"), ("power100", "not_benford"), ("complex_rotation", "inconclusive"),
])
def test_predict(preset, status, capsys):
    rc, out, _ = run(["predict", "--preset", preset], capsys)
    assert rc == 0
    assert json.loads(out)["verdict"]["status"] == status


def test_decompose_depth2(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert run(["decompose", "--preset", "linear_n", "-N", "400", "-o", str(out)], capsys)[0] == 0
    d = json.loads(out.read_text())
    assert d["mode"] == "minimal"
    assert d["dominance"]["main_term_dominates"] is True
    assert max(d["decomposition"]["identity_residuals"].values()) < 1e-10
    assert d["second_c"]["c"] != d["decomposition"]["c"]
    diag = (tmp_path / "d.diagnostics.csv").read_text().splitlines()
    assert diag[1] == "n,p,q,gf2,rel_error"
    assert len(diag) == 2 + 399


def test_decompose_c_pair(capsys):
    rc, out, _ = run(["decompose", "--preset", "fibonacci", "-N", "1500", "--c", "2", "--c2", "0.5"], capsys)
    assert rc == 0
    d = json.loads(out)
    assert d["decomposition"]["c"] == 2.0 and d["second_c"]["c"] == 0.5
    assert d["second_c"]["verdicts_agree"] is True


def test_decompose_depth3(capsys):
    rc, out, _ = run(["decompose", "--preset", "depth3_smooth", "-N", "200"], capsys)
    assert rc == 0
    d = json.loads(out)
    assert d["identity_residual"] < 1e-10
    assert d["closed_form_check"]["max_rel_error"] < 1e-8


def test_montecarlo_workers_do_not_change_output(tmp_path, capsys):
    outs = []
    for w in ("1", "4"):
        p = tmp_path / f"mc{w}.json"
        run(["montecarlo", "--preset", "uniform_chain", "-T", "300", "--seed", "5", "--workers", w,
             "-o", str(p)], capsys)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    d = json.loads(outs[0])
    assert d["config"]["trials"] == 300


def test_single_trial_matches_analyze(capsys):
    spec = ["--coeff", "n * uniform(0.5, 1.5)", "--coeff", "1", "--init", "1", "--init", "1", "-N", "1200"]
    _, mc, _ = run(["montecarlo", *spec, "-T", "1", "--seed", "4"], capsys)
    _, an, _ = run(["analyze", *spec, "--seed", "4"], capsys)
    assert json.loads(mc)["trial_reports"][0] == json.loads(an)["report"]
