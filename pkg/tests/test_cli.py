import json
import re

import pytest

from diffrec import load_split
from diffrec.cli import main

from conftest import write_interaction_file


@pytest.fixture
def dataset_file(tmp_path):
    return write_interaction_file(tmp_path / "ratings.tsv")


@pytest.fixture
def split_file(tmp_path, dataset_file):
    path = tmp_path / "split.json"
    code = main(["ingest", "--input", str(dataset_file), "--ratio", "0.8",
                 "--seed", "11", "--out", str(path)])
    assert code == 0
    return path


def run(capsys, *argv):
    capsys.readouterr()  # drop output from fixtures
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# ingest

def test_ingest_summary_line(capsys, tmp_path, dataset_file):
    out_path = tmp_path / "s.json"
    code, out, _ = run(capsys, "ingest", "--input", str(dataset_file),
                       "--out", str(out_path))
    assert code == 0
    summary = out.splitlines()[0]
    for field in ("users=", "objects=", "links=", "sparsity=", "duplicates=",
                  "malformed=", "train=", "test="):
        assert field in summary
    ds = load_split(out_path)
    assert f"train={ds.train.num_links}" in summary
    assert ds.checksum in out


def test_ingest_threshold_drops_low_ratings(capsys, tmp_path, dataset_file):
    all_path, filtered_path = tmp_path / "all.json", tmp_path / "flt.json"
    run(capsys, "ingest", "--input", str(dataset_file), "--out", str(all_path))
    code, out, _ = run(capsys, "ingest", "--input", str(dataset_file),
                       "--threshold", "3", "--out", str(filtered_path))
    assert code == 0
    # independent count of lines with rating >= 3
    expected = sum(1 for line in dataset_file.read_text().splitlines()
                   if float(line.split("\t")[2]) >= 3)
    loaded = load_split(filtered_path)
    assert loaded.train.num_links + loaded.test.num_links == expected
    full = load_split(all_path)
    assert full.train.num_links + full.test.num_links > expected


def test_ingest_missing_input(capsys, tmp_path):
    code, _, err = run(capsys, "ingest", "--input", str(tmp_path / "nope.tsv"),
                       "--out", str(tmp_path / "s.json"))
    assert code == 1
    assert "error:" in err


# ---------------------------------------------------------------------------
# evaluate

def test_evaluate_stdout_and_json_report(capsys, tmp_path, split_file):
    report_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "evaluate", "--input", str(split_file),
                       "--kernel", "bd", "--lambda", "0.79",
                       "--out", str(report_path))
    assert code == 0
    line = out.splitlines()[0]
    assert re.search(r"r=\d\.\d{5} ep=\d+\.\d{5} h=\d\.\d{5} I=\d\.\d{5}", line)
    assert "kernel=bd(0.79)" in line

    document = json.loads(report_path.read_text())
    assert document["command"] == "evaluate"
    assert document["kernel"] == {"kind": "degree", "target_exp": 0.79,
                                  "source_exp": 0.79}
    assert document["config"]["lambda"] == 0.79
    assert "workers" not in document["config"]
    assert set(document["metrics"]) >= {"ranking_score", "precision_enhancement",
                                        "hamming", "self_information"}
    assert document["split"]["checksum"] == load_split(split_file).checksum


def test_evaluate_csv_report(capsys, tmp_path, split_file):
    report_path = tmp_path / "report.csv"
    code, _, _ = run(capsys, "evaluate", "--input", str(split_file),
                     "--kernel", "md", "--out", str(report_path),
                     "--out-format", "csv")
    assert code == 0
    lines = report_path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("# ")]
    assert any(l.startswith("# kernel=md") for l in comments)
    assert any(l.startswith("# split.checksum=") for l in comments)
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "metric,value"
    assert any(l.startswith("ranking_score,") for l in body)


def test_evaluate_degree_bins(capsys, split_file, tmp_path):
    report_path = tmp_path / "bins.json"
    code, out, _ = run(capsys, "evaluate", "--input", str(split_file),
                       "--kernel", "md", "--degree-bins",
                       "--out", str(report_path))
    assert code == 0
    assert re.search(r"bin 1: degrees \[0\.000, 1\.609\)", out)
    document = json.loads(report_path.read_text())
    assert document["degree_bins"][0]["index"] == 1


def test_evaluate_kernel_flag_errors(capsys, split_file):
    code, _, err = run(capsys, "evaluate", "--input", str(split_file),
                       "--kernel", "bd", "--epsilon", "-0.5")
    assert code == 2
    assert "requires --lambda" in err and "does not take --epsilon" in err


def test_evaluate_rejects_corrupt_split(capsys, tmp_path, split_file):
    bad = tmp_path / "bad.json"
    bad.write_bytes(split_file.read_bytes()[:150])
    code, _, err = run(capsys, "evaluate", "--input", str(bad), "--kernel", "md")
    assert code == 1
    assert "not valid JSON" in err


def test_evaluate_reruns_byte_identical(capsys, tmp_path, split_file):
    report_path = tmp_path / "det.json"
    run(capsys, "evaluate", "--input", str(split_file), "--kernel", "hhp",
        "--lambda", "0.14", "--out", str(report_path))
    first = report_path.read_bytes()
    run(capsys, "evaluate", "--input", str(split_file), "--kernel", "hhp",
        "--lambda", "0.14", "--out", str(report_path))
    assert report_path.read_bytes() == first


# ---------------------------------------------------------------------------
# recommend

def test_recommend_stdout(capsys, split_file):
    ds = load_split(split_file)
    user_id = ds.user_ids[0]
    code, out, _ = run(capsys, "recommend", "--input", str(split_file),
                       "--kernel", "md", "--user", user_id, "--top-l", "3")
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()]
    assert [row[0] for row in rows] == ["1", "2", "3"]
    assert all(re.fullmatch(r"-?\d+\.\d{6}", row[2]) for row in rows)
    assert all(row[1] in ds.object_ids for row in rows)


def test_recommend_unknown_user(capsys, split_file):
    code, _, err = run(capsys, "recommend", "--input", str(split_file),
                       "--kernel", "md", "--user", "nobody")
    assert code == 2
    assert "unknown user" in err


# ---------------------------------------------------------------------------
# sweep / grid / compare

def test_sweep_json_report_and_optimum(capsys, tmp_path, split_file):
    report_path = tmp_path / "sweep.json"
    code, out, _ = run(capsys, "sweep", "--input", str(split_file),
                       "--kernel", "bd", "--range", "0.4:1.0", "--step", "0.2",
                       "--out", str(report_path))
    assert code == 0
    assert out.startswith("optimum bd(")
    document = json.loads(report_path.read_text())
    assert len(document["points"]) == 4
    assert document["optimal"]["metrics"]["ranking_score"] == min(
        p["metrics"]["ranking_score"] for p in document["points"])


def test_sweep_partial_failure_exit_code(capsys, tmp_path, split_file):
    report_path = tmp_path / "partial.csv"
    # = form keeps the leading minus out of flag parsing
    code, out, _ = run(capsys, "sweep", "--input", str(split_file),
                       "--kernel", "pd", "--range=-0.2:0.2", "--step", "0.2",
                       "--out", str(report_path), "--out-format", "csv")
    assert code == 3
    assert "optimum pd(" in out  # optimum still reported from surviving points
    rows = [l for l in report_path.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("parameter,")
    assert sum("ValueError" in row for row in rows) == 1  # the +0.2 point


def test_sweep_worker_count_invariant(capsys, tmp_path, split_file):
    report_path = tmp_path / "workers.json"
    run(capsys, "sweep", "--input", str(split_file), "--kernel", "hhp",
        "--range", "0.0:0.3", "--step", "0.1", "--workers", "1",
        "--out", str(report_path))
    serial = report_path.read_bytes()
    run(capsys, "sweep", "--input", str(split_file), "--kernel", "hhp",
        "--range", "0.0:0.3", "--step", "0.1", "--workers", "2",
        "--out", str(report_path))
    assert report_path.read_bytes() == serial


def test_grid_summary_and_csv(capsys, tmp_path, split_file):
    report_path = tmp_path / "grid.csv"
    code, out, _ = run(capsys, "grid", "--input", str(split_file),
                       "--range", "0.5:0.9", "--step", "0.2",
                       "--out", str(report_path), "--out-format", "csv")
    assert code == 0
    assert re.search(r"minimum r=\d\.\d{5} at a=\d\.\d{5} b=\d\.\d{5}", out)
    assert "diagonal best" in out
    body = [l for l in report_path.read_text().splitlines() if not l.startswith("#")]
    assert body[0].startswith("a,b,")
    assert len(body) == 1 + 9  # header plus 3x3 cells


def test_compare_lines(capsys, tmp_path, split_file):
    report_path = tmp_path / "cmp.json"
    code, out, _ = run(capsys, "compare", "--input", str(split_file),
                       "--families", "md,hc", "--out", str(report_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("md ") and lines[1].startswith("hc ")
    assert lines[2].startswith("best ranking_score:")
    document = json.loads(report_path.read_text())
    assert [row["family"] for row in document["rows"]] == ["md", "hc"]
    assert document["rows"][0]["parameter"] is None


# ---------------------------------------------------------------------------
# config files

def test_config_file_layering(capsys, tmp_path, split_file):
    config = tmp_path / "run.cfg"
    config.write_text("# comment line\n\nkernel=bd\nlambda=0.79\ntop-l=5\n"
                      f"input={split_file}\n", encoding="utf-8")
    code, out, _ = run(capsys, "evaluate", "--config", str(config))
    assert code == 0
    assert "kernel=bd(0.79) L=5" in out
    # flags beat the file
    code, out, _ = run(capsys, "evaluate", "--config", str(config), "--top-l", "7")
    assert code == 0
    assert "L=7" in out


def test_config_unknown_keys_reported_together(capsys, tmp_path, split_file):
    config = tmp_path / "bad.cfg"
    config.write_text("bogus=1\nworker=2\nkernel=md\n", encoding="utf-8")
    code, _, err = run(capsys, "evaluate", "--config", str(config),
                       "--input", str(split_file))
    assert code == 2
    assert "bogus" in err and "worker" in err


def test_config_bad_value(capsys, tmp_path, split_file):
    config = tmp_path / "bad.cfg"
    config.write_text("top-l=many\n", encoding="utf-8")
    code, _, err = run(capsys, "evaluate", "--config", str(config),
                       "--input", str(split_file), "--kernel", "md")
    assert code == 2
    assert "top-l" in err


def test_config_missing_file(capsys, split_file):
    code, _, err = run(capsys, "evaluate", "--config", "/nonexistent.cfg",
                       "--input", str(split_file), "--kernel", "md")
    assert code == 1
    assert "cannot read config" in err


# ---------------------------------------------------------------------------
# argparse-level behavior

def test_no_command_exits_2(capsys):
    assert main([]) == 2


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert main(["evaluate", "--help"]) == 0


def test_bad_out_format(capsys, split_file):
    assert main(["evaluate", "--input", str(split_file), "--kernel", "md",
                 "--out-format", "xml"]) == 2


def test_bad_range_string(capsys, split_file):
    assert main(["sweep", "--input", str(split_file), "--kernel", "bd",
                 "--range", "zero-one"]) == 2
