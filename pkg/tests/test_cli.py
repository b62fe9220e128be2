import csv
from pathlib import Path

import pytest

from netal import cli


@pytest.fixture
def tiny_inputs(tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("a b\nb c\nc d\nd e\na c\n")
    labels = tmp_path / "labels.tsv"
    labels.write_text("a\tL\nb\tL\nc\tL\nd\tR\ne\tR\n")
    return edges, labels


def run_args(edges, labels, out, **over):
    args = {
        "--graph": str(edges),
        "--labels": str(labels),
        "--k": "2",
        "--method": "aa",
        "--chains": "4",
        "--steps": "2000",
        "--runs": "2",
        "--seed": "7",
        "--out": str(out),
    }
    args.update(over)
    flat = ["run"]
    for key, val in args.items():
        flat += [key, val]
    return flat


def test_run_writes_expected_schema(tiny_inputs, tmp_path, capsys):
    edges, labels = tiny_inputs
    out = tmp_path / "stage.csv"
    assert cli.main(run_args(edges, labels, out)) == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == [
        "run", "stage", "method", "queried_vertex",
        "frac_q_0.1", "frac_q_0.3", "frac_q_0.5", "frac_q_0.7", "frac_q_0.9",
    ]
    # 2 runs x 4 stages (stops with one unqueried vertex left)
    assert len(rows) - 1 == 2 * 4
    order = tmp_path / "stage_order.csv"
    order_rows = list(csv.reader(order.read_text().splitlines()))
    assert order_rows[0] == ["vertex", "mean_stage", "std_stage", "n_runs"]


def test_run_deterministic_byte_identical(tiny_inputs, tmp_path):
    edges, labels = tiny_inputs
    out1 = tmp_path / "one.csv"
    out2 = tmp_path / "two.csv"
    assert cli.main(run_args(edges, labels, out1)) == 0
    assert cli.main(run_args(edges, labels, out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "one_order.csv").read_bytes() == (tmp_path / "two_order.csv").read_bytes()


def test_run_missing_labels_is_input_error(tiny_inputs, tmp_path, capsys):
    edges, _ = tiny_inputs
    out = tmp_path / "x.csv"
    code = cli.main(run_args(edges, Path("/nonexistent/labels.tsv"), out))
    assert code == 2
    assert "input error" in capsys.readouterr().err


def test_run_bad_thresholds_rejected(tiny_inputs, tmp_path):
    edges, labels = tiny_inputs
    out = tmp_path / "x.csv"
    assert cli.main(run_args(edges, labels, out, **{"--thresholds": "0.9,0.5"})) == 2
    assert cli.main(run_args(edges, labels, out, **{"--thresholds": "0,0.5"})) == 2


def test_analyze_single_log_curves_match(tiny_inputs, tmp_path):
    edges, labels = tiny_inputs
    out = tmp_path / "stage.csv"
    cli.main(run_args(edges, labels, out, **{"--runs": "1"}))
    assert cli.main(["analyze", str(out), "--out-dir", str(tmp_path / "an")]) == 0
    curves = list(csv.reader((tmp_path / "an" / "stage_curves.csv").read_text().splitlines()))
    stage_rows = list(csv.reader(out.read_text().splitlines()))[1:]
    assert len(curves) - 1 == len(stage_rows)
    for crow, srow in zip(curves[1:], stage_rows):
        assert [float(x) for x in crow[1:]] == pytest.approx([float(x) for x in srow[4:]])


def test_analyze_two_logs_correlation_report(tiny_inputs, tmp_path, capsys):
    edges, labels = tiny_inputs
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    cli.main(run_args(edges, labels, out_a, **{"--runs": "1", "--method": "degree"}))
    cli.main(run_args(edges, labels, out_b, **{"--runs": "1", "--method": "random"}))
    code = cli.main([
        "analyze", str(out_a), str(out_b), "--out-dir", str(tmp_path / "an"),
        "--graph", str(edges), "--labels-a", str(labels), "--labels-b", str(labels),
    ])
    assert code == 0
    rows = dict(
        (r[0], r[1])
        for r in list(csv.reader((tmp_path / "an" / "correlation.csv").read_text().splitlines()))[1:]
    )
    assert "pearson_query_order" in rows
    assert float(rows["adjusted_mutual_information"]) == 1.0


def test_analyze_without_logs_is_usage_error(capsys):
    assert cli.main(["analyze"]) == 2


def test_analyze_schema_mismatch(tiny_inputs, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    assert cli.main(["analyze", str(bad)]) == 2


def test_fixpoint_consistent_labels(tmp_path):
    edges = tmp_path / "edges.txt"
    # two 3-cliques
    edges.write_text("a b\nb c\na c\nd e\ne f\nd f\n")
    labels = tmp_path / "labels.tsv"
    labels.write_text("a\tL\nb\tL\nc\tL\nd\tR\ne\tR\nf\tR\n")
    out = tmp_path / "fixed.tsv"
    code = cli.main([
        "fixpoint", "--graph", str(edges), "--labels", str(labels), "--out", str(out),
    ])
    assert code == 0
    assert out.read_text() == labels.read_text()


def test_run_interactive_oracle_from_stdin(tiny_inputs, tmp_path, monkeypatch):
    import io

    edges, labels = tiny_inputs
    out = tmp_path / "stage.csv"
    # ground-truth pass to learn the query order, then replay it on stdin
    assert cli.main(run_args(edges, labels, out, **{"--runs": "1"})) == 0
    rows = list(csv.reader(out.read_text().splitlines()))[1:]
    truth = dict(
        line.split("\t") for line in Path(labels).read_text().splitlines()
    )
    replies = "\n".join(truth[row[3]] for row in rows) + "\n"
    out2 = tmp_path / "interactive.csv"
    monkeypatch.setattr("sys.stdin", io.StringIO(replies))
    code = cli.main(
        run_args(edges, labels, out2, **{"--runs": "1", "--oracle": "interactive"})
    )
    assert code == 0
    assert out2.read_text() == out.read_text()


def test_run_interactive_immediate_eof_keeps_partial_log(tiny_inputs, tmp_path, monkeypatch):
    import io

    edges, labels = tiny_inputs
    out = tmp_path / "aborted.csv"
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    code = cli.main(
        run_args(edges, labels, out, **{"--runs": "1", "--oracle": "interactive"})
    )
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("run,stage,method,queried_vertex")
    assert len(rows) == 1  # header only; no stage completed before EOF


def test_fixpoint_k_mismatch(tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("a b\n")
    labels = tmp_path / "labels.tsv"
    labels.write_text("a\tL\nb\tR\n")
    code = cli.main([
        "fixpoint", "--graph", str(edges), "--labels", str(labels),
        "--k", "5", "--out", str(tmp_path / "o.tsv"),
    ])
    assert code == 2
