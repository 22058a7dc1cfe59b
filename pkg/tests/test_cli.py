import json

import numpy as np
import pytest

from perceptor.cli import main, parse_list
from perceptor.errors import InputError
from perceptor.io import (format_csv, read_labeled, read_matrix, split_provenance, write_labeled,
                          write_matrix)


@pytest.fixture
def net(tmp_path):
    """Identity readout over well-separated independent Gaussian activations."""
    rng = np.random.default_rng(0)
    d = 3
    x = np.vstack([rng.normal(6 * np.eye(d)[i], 1.0, size=(300, d)) for i in range(d)])
    y = np.repeat(np.arange(d), 300)
    write_labeled(tmp_path / "acts.csv", x, y)
    write_matrix(tmp_path / "w.csv", np.eye(d))
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_matrix_roundtrip(tmp_path):
    a = np.random.default_rng(1).normal(size=(3, 4))
    write_matrix(tmp_path / "m.csv", a, comment="test")
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.csv"), a)


def test_matrix_errors_name_lines(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("# c\n2,2\n1,2\n3,x\n")
    with pytest.raises(InputError, match="line 4"):
        read_matrix(p)
    p.write_text("2,2\n1,2\n")
    with pytest.raises(InputError, match="promises 2 rows"):
        read_matrix(p)
    p.write_text("1,2\n1,2,3\n")
    with pytest.raises(InputError, match="line 2"):
        read_matrix(p)


def test_labeled_errors(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,1.0,2.0\n1.5,1.0,2.0\n")
    with pytest.raises(InputError, match="line 2"):
        read_labeled(p)
    p.write_text("0,1.0,2.0\n1,1.0\n")
    with pytest.raises(InputError, match="line 2"):
        read_labeled(p)


def test_format_and_split():
    text = format_csv(["a", "b"], [(1, 0.1)], ["x", "y"])
    head, body = split_provenance(text)
    assert head == "# x\n# y\n"
    assert body == "a,b\n1,0.1\n"


def test_parse_list():
    assert parse_list("0..3", int) == [0, 1, 2, 3]
    assert parse_list("1,2.5") == [1.0, 2.5]
    assert parse_list("0:10:5") == [0.0, 5.0, 10.0]
    assert parse_list("2^-1..2^1") == [0.5, 1.0, 2.0]


def test_predict_separated(net, capsys):
    code, out, _ = run(["predict", "--activations", net / "acts.csv", "--weights", net / "w.csv",
                        "--method", "eq2", "--method", "eq1", "--with-empirical"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["predictions"]["eq2"]["aggregate"] > 0.999
    assert rep["empirical"]["aggregate"] > 0.999
    assert rep["avg_correlation"] is not None
    assert any(line.startswith("command:") for line in rep["provenance"])


def test_predict_eq2_and_mc_agree_on_independent_sums(tmp_path, capsys):
    rng = np.random.default_rng(5)
    d = 4
    x = np.vstack([rng.normal(1.5 * np.eye(d)[i], 1.0, size=(4000, d)) for i in range(d)])
    write_labeled(tmp_path / "a.csv", x, np.repeat(np.arange(d), 4000))
    write_matrix(tmp_path / "w.csv", np.eye(d))
    _, out, _ = run(["predict", "--activations", tmp_path / "a.csv", "--weights",
                     tmp_path / "w.csv", "--method", "eq2", "--method", "eq3-mc",
                     "--mc-samples", "200000"], capsys)
    preds = json.loads(out)["predictions"]
    assert abs(preds["eq2"]["aggregate"] - preds["eq3-mc"]["aggregate"]) < 0.005


def test_predict_malformed_row_exits_2(net, capsys):
    bad = net / "bad.csv"
    bad.write_text("0,1,2,3\n1,1,oops,3\n")
    code, _, err = run(["predict", "--activations", bad, "--weights", net / "w.csv"], capsys)
    assert code == 2 and "line 2" in err


def test_predict_dim_mismatch_exits_2(net, capsys):
    write_matrix(net / "w4.csv", np.eye(4))
    code, _, err = run(["predict", "--activations", net / "acts.csv", "--weights",
                        net / "w4.csv"], capsys)
    assert code == 2 and "dim" in err


def test_predict_missing_file_exits_2(net, capsys):
    code, _, _ = run(["predict", "--activations", net / "nope.csv", "--weights",
                      net / "w.csv"], capsys)
    assert code == 2


def test_single_sample_class_exits_2(net, capsys):
    # one sample leaves class 0 without a spread estimate
    write_labeled(net / "one.csv", np.array([[1.0, 0, 0], [0, 1.0, 0], [0.1, 1.2, 0],
                                             [0, 0, 1.0], [0, 0.2, 1.1]]), [0, 1, 1, 2, 2])
    code, _, err = run(["predict", "--activations", net / "one.csv", "--weights",
                        net / "w.csv"], capsys)
    assert code == 2 and "fewer than two samples" in err


def test_degenerate_bias_line_exits_3(net, capsys):
    # every sub-problem is predicted perfectly, so the bias line has no slope
    code, _, err = run(["subproblem", "--activations", net / "acts.csv", "--weights",
                        net / "w.csv", "--subproblem-sizes", "2", "--count", "3",
                        "--report", net / "r.json"], capsys)
    assert code == 3 and "numerical failure" in err


def test_esn_rows(capsys):
    code, out, _ = run(["esn", "--delays", "0..10", "--seeds", "1", "--test-len", "1000",
                        "--mc-samples", "1000"], capsys)
    assert code == 0
    head, body = split_provenance(out)
    lines = body.strip().splitlines()
    assert lines[0] == "delay,empirical,eq1,eq2,eq3_mc,stderr"
    assert len(lines) == 12
    assert "seed: 0" in head


def test_rvfl_rows(capsys):
    code, out, err = run(["rvfl", "--dataset", "iris", "--n", "50,100", "--lambda", "1",
                          "--kappa", "3"], capsys)
    assert code == 0 and "best:" in err
    body = split_provenance(out)[1].strip().splitlines()
    assert body[0] == "N,lambda,kappa,fold,accuracy,pred_eq2_train,pred_eq2_test"
    assert len(body) == 1 + 2 * 5


def test_subproblem_and_metrics(net, capsys):
    rng = np.random.default_rng(1)
    d = 5
    x = np.vstack([rng.normal(rng.uniform(0.5, 2.5) * np.eye(d)[i], 1.0, size=(200, d))
                   for i in range(d)])
    write_labeled(net / "acts.csv", x, np.repeat(np.arange(d), 200))
    write_matrix(net / "w.csv", np.eye(d))
    code, out, _ = run(["subproblem", "--activations", net / "acts.csv", "--weights",
                        net / "w.csv", "--subproblem-sizes", "2,3", "--count", "4",
                        "--out", net / "s.csv", "--report", net / "r.json"], capsys)
    assert code == 0 and out == ""
    body = split_provenance((net / "s.csv").read_text())[1].splitlines()
    assert body[0] == "predicted,actual,size,network" and len(body) == 9
    assert "full_compensated" in json.loads((net / "r.json").read_text())
    pairs = net / "pairs.csv"
    pairs.write_text("predicted,actual\n0.5,0.4\n0.7,0.65\n0.9,0.8\n0.6,0.62\n")
    code, out, _ = run(["metrics", "--pairs", pairs], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["n"] == 4
    assert rep["mae_compensated"] <= rep["mae_raw"]


def test_readout_only(tmp_path, capsys):
    rng = np.random.default_rng(0)
    for k in range(2):
        w = rng.normal(size=(4, 20))
        write_matrix(tmp_path / f"net{k}.csv", w / np.linalg.norm(w, axis=1, keepdims=True))
    code, out, _ = run(["readout-only", "--weights", tmp_path / "net0.csv", "--weights",
                        tmp_path / "net1.csv", "--noise-db=-20,0,20", "--reps", "10",
                        "--experiments", "2"], capsys)
    assert code == 0
    assert out.rstrip().splitlines()[-1].startswith("# selected_db:")
    assert len(split_provenance(out)[1].splitlines()) == 1 + 3 * 2 + 1


def test_synth_default_grid_size(capsys):
    code, out, _ = run(["synth", "--samples", "100"], capsys)
    assert code == 0
    assert len(split_provenance(out)[1].strip().splitlines()) == 1 + 168


def test_threads_env_fallback(monkeypatch):
    from perceptor.cli import default_threads
    monkeypatch.setenv("PERCEPTOR_THREADS", "3")
    assert default_threads() == 3
