import filecmp
import json

import numpy as np
import pytest
from scipy.signal import lfilter

from corrshift import NonFiniteValue, ParseError, RaggedRows, block_exchangeable_sigma
from corrshift._streams import stream
from corrshift.cli import load_csv, main


def write_panel_csv(path, values, labels=None):
    """Default layout: header of node labels, one row per time point."""
    n = values.shape[0]
    labels = labels or [f"n{i + 1}" for i in range(n)]
    lines = [",".join(labels)]
    for col in values.T:
        lines.append(",".join(repr(float(x)) for x in col))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def break_panel_values():
    rng = stream(900, 0)
    left = rng.standard_normal((4, 40))
    factor = np.linalg.cholesky(block_exchangeable_sigma(4, 4, 0.9).values)
    right = factor @ rng.standard_normal((4, 40))
    return np.hstack([left, right])


def ar_panel_values():
    eps = stream(902, 0).standard_normal((3, 200))
    first = eps[:, :1] / np.sqrt(1 - 0.7 ** 2)
    rest, _ = lfilter([1.0], [1.0, -0.7], eps[:, 1:], axis=-1, zi=0.7 * first)
    return np.hstack([first, rest])


def test_load_csv_orientations(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("a,b,c\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n13,14,15\n")
    panel = load_csv(str(path))
    assert panel.n == 3 and panel.T == 5
    assert panel.node_labels == ["a", "b", "c"]
    assert panel.values[1].tolist() == [2.0, 5.0, 8.0, 11.0, 14.0]
    flipped = load_csv(str(path), transpose=True)
    assert flipped.n == 5 and flipped.T == 3
    assert flipped.time_labels == ["a", "b", "c"]
    assert flipped.values[0].tolist() == [1.0, 2.0, 3.0]


def test_load_csv_time_col(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("date,x,y\n2024-01-01,1,2\n2024-01-02,3,4\n"
                    "2024-01-03,5,6\n2024-01-04,7,8\n")
    panel = load_csv(str(path), time_col="date")
    assert panel.n == 2 and panel.T == 4
    assert panel.node_labels == ["x", "y"]
    assert panel.time_labels[0] == "2024-01-01" and panel.time_labels[-1] == "2024-01-04"
    with pytest.raises(ValueError):
        load_csv(str(path), time_col="nope")
    with pytest.raises(ValueError):
        load_csv(str(path), transpose=True, time_col="date")


def test_load_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3,oops\n")
    with pytest.raises(ParseError) as exc:
        load_csv(str(bad))
    assert exc.value.line == 3 and exc.value.col == 2

    nan = tmp_path / "nan.csv"
    nan.write_text("a,b\n1,2\n3,NaN\n")
    with pytest.raises(NonFiniteValue) as exc2:
        load_csv(str(nan))
    assert exc2.value.line == 3 and exc2.value.col == 2

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("a,b,c\n1,2,3\n4,5\n")
    with pytest.raises(RaggedRows) as exc3:
        load_csv(str(ragged))
    assert exc3.value.line == 3

    empty = tmp_path / "empty.csv"
    empty.write_text("a,b\n")
    with pytest.raises(ParseError):
        load_csv(str(empty))


def test_detect_roundtrip(tmp_path, capsys):
    csv_path = write_panel_csv(tmp_path / "panel.csv", break_panel_values())
    out = tmp_path / "out"
    code = main(["detect", csv_path, "--B", "100", "--seed", "7", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "change point at k=40" in captured.out
    assert "p < 0.01" in captured.out

    report = json.loads((out / "report.json").read_text())
    assert report["n"] == 4 and report["T"] == 80
    point = report["points"][0]
    assert point["k"] == 40
    assert point["p_value"] == 0.0
    assert point["segment"] == [1, 80]
    assert point["depth"] == 0
    assert report["config"]["b_count"] == 100
    assert report["config"]["metric"] == "frobenius"
    assert report["config"]["bootstrap"] == "iid"
    assert report["config"]["delta"] == 4
    assert report["manifest"]["transforms"] == ["standardize"]
    assert report["manifest"]["seed"] == 7
    assert report["manifest"]["inputs"] == [csv_path]

    lines = (out / "profile.csv").read_text().splitlines()
    assert lines[0].startswith("# manifest: {")
    assert lines[1] == "k,d,mu0,sigma0,z,zb_max"
    # candidates 5..76 inclusive
    assert len(lines) == 2 + 72
    first = lines[2].split(",")
    assert first[0] == "5" and len(first) == 6
    manifest = json.loads(lines[0][len("# manifest: "):])
    assert manifest == report["manifest"]


def test_detect_rerun_byte_identical(tmp_path):
    csv_path = write_panel_csv(tmp_path / "panel.csv", break_panel_values())
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["detect", csv_path, "--B", "100", "--seed", "7", "--out", str(out1)]) == 0
    assert main(["detect", csv_path, "--B", "100", "--seed", "7", "--out", str(out2)]) == 0
    assert filecmp.cmp(out1 / "report.json", out2 / "report.json", shallow=False)
    assert filecmp.cmp(out1 / "profile.csv", out2 / "profile.csv", shallow=False)


def test_detect_no_points_exits_3(tmp_path, capsys):
    null = stream(901, 0).standard_normal((4, 60))
    csv_path = write_panel_csv(tmp_path / "null.csv", null)
    out = tmp_path / "out"
    code = main(["detect", csv_path, "--B", "100", "--seed", "7", "--out", str(out)])
    assert code == 3
    assert "no significant change points" in capsys.readouterr().out
    report = json.loads((out / "report.json").read_text())
    assert report["points"] == []


def test_detect_flag_validation(tmp_path, capsys):
    csv_path = write_panel_csv(tmp_path / "p.csv", break_panel_values())
    assert main(["detect", csv_path, "--B", "50"]) == 1
    assert "--B" in capsys.readouterr().err
    assert main(["detect", csv_path, "--alpha", "1.5"]) == 1
    assert "--alpha" in capsys.readouterr().err
    assert main(["detect", csv_path, "--bootstrap", "sieve", "--ar-order", "two"]) == 1
    assert "--ar-order" in capsys.readouterr().err


def test_detect_missing_file(tmp_path, capsys):
    code = main(["detect", str(tmp_path / "absent.csv"), "--out", str(tmp_path)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_detect_lr_needs_room(tmp_path, capsys):
    csv_path = write_panel_csv(tmp_path / "p.csv", break_panel_values())
    code = main(["detect", csv_path, "--metric", "lr", "--delta", "3",
                 "--B", "100", "--out", str(tmp_path / "o")])
    assert code == 2
    assert "condition" in capsys.readouterr().err


def test_detect_sieve_auto_order(tmp_path, capsys):
    csv_path = write_panel_csv(tmp_path / "ar.csv", ar_panel_values())
    out = tmp_path / "out"
    code = main(["detect", csv_path, "--bootstrap", "sieve", "--B", "100",
                 "--seed", "3", "--out", str(out)])
    assert code in (0, 3)
    err = capsys.readouterr().err
    assert "selected AR order" in err
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["bootstrap"] == "sieve"
    assert report["config"]["ar_order"] >= 1


def test_detect_autocorrelation_advisory(tmp_path, capsys):
    csv_path = write_panel_csv(tmp_path / "ar.csv", ar_panel_values())
    code = main(["detect", csv_path, "--B", "100", "--seed", "3",
                 "--out", str(tmp_path / "o")])
    assert code in (0, 3)
    assert "--bootstrap sieve" in capsys.readouterr().err


def test_detect_log_returns_transform(tmp_path):
    rng = stream(903, 0)
    prices = np.exp(np.cumsum(0.01 * rng.standard_normal((3, 81)), axis=1) + 3.0)
    csv_path = write_panel_csv(tmp_path / "prices.csv", prices)
    out = tmp_path / "out"
    code = main(["detect", csv_path, "--log-returns", "--B", "100", "--out", str(out)])
    assert code in (0, 3)
    report = json.loads((out / "report.json").read_text())
    assert report["T"] == 80
    assert report["manifest"]["transforms"] == ["log_returns", "standardize"]


def test_experiment_fig1(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["experiment", "fig1", "--n", "5", "--T", "60", "--reps", "150",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    lines = (out / "fig1.csv").read_text().splitlines()
    assert lines[0].startswith("# manifest: {")
    assert lines[1] == "k,analytic,mc_mean,mc_se"
    rows = {int(line.split(",")[0]): line.split(",") for line in lines[2:]}
    assert sorted(rows) == list(range(2, 60))
    # analytic value at the midpoint: (1/30 + 1/30) * (5 + 25) = 2
    assert rows[30][1] == "2.0"
    mc_mean, mc_se = float(rows[30][2]), float(rows[30][3])
    assert abs(mc_mean - 2.0) <= 4.0 * mc_se


def test_experiment_fig2_T_column(tmp_path):
    out = tmp_path / "out"
    code = main(["experiment", "fig2", "--n-list", "4", "8", "12", "--reps", "100",
                 "--B", "100", "--seed", "5", "--out", str(out)])
    assert code == 0
    lines = (out / "fig2.csv").read_text().splitlines()
    assert lines[1] == "n,T,offset,prob"
    pairs = {(int(r.split(",")[0]), int(r.split(",")[1])) for r in lines[2:]}
    assert pairs == {(4, 42), (8, 86), (12, 162)}


def test_experiment_unknown_figure():
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "fig9"])
    assert exc.value.code == 1


def test_experiment_alpha_validation(capsys):
    assert main(["experiment", "fig1", "--alpha", "0"]) == 1
    assert "--alpha" in capsys.readouterr().err


def test_no_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
