import json

import numpy as np
import pytest

from lccs_lsh.bench import gaussian_clusters, load_ivecs, write_fvecs
from lccs_lsh.cli import main


@pytest.fixture
def files(tmp_path):
    ds = gaussian_clusters(800, 8, n_queries=12, clusters=8, seed=5)
    write_fvecs(tmp_path / "base.fvecs", ds.points)
    write_fvecs(tmp_path / "q.fvecs", ds.queries)
    return tmp_path


def test_truth_build_query(files, capsys):
    d = files
    assert main(["truth", "--data", str(d / "base.fvecs"), "--queries", str(d / "q.fvecs"),
                 "--k", "5", "--out", str(d / "gt.ivecs")]) == 0
    assert load_ivecs(d / "gt.ivecs").shape == (12, 5)
    assert main(["build", "--data", str(d / "base.fvecs"), "--m", "16", "--w", "2.5",
                 "--out", str(d / "idx.bin")]) == 0
    assert main(["query", "--index", str(d / "idx.bin"), "--queries", str(d / "q.fvecs"), "--k", "5",
                 "--candidates", "796", "--truth", str(d / "gt.ivecs"), "--out", str(d / "res.ivecs")]) == 0
    assert "recall@5 1.0000" in capsys.readouterr().out
    assert (load_ivecs(d / "res.ivecs") == load_ivecs(d / "gt.ivecs")).all()
    assert main(["query", "--index", str(d / "idx.bin"), "--queries", str(d / "q.fvecs"), "--k", "5",
                 "--candidates", "5", "--probes", "m+1", "--max-gap", "1"]) == 0
    assert "17 probe(s)" in capsys.readouterr().out


def test_build_angular_with_preset_and_alpha(files):
    d = files
    assert main(["build", "--data", str(d / "base.fvecs"), "--metric", "angular", "--alpha", "0.5",
                 "--R", "0.5", "--c", "2", "--out", str(d / "a.bin")]) == 0
    assert main(["build", "--data", str(d / "base.fvecs"), "--m", "8", "--w", "glove",
                 "--out", str(d / "b.bin")]) == 0


def test_query_explicit_data(files):
    d = files
    main(["build", "--data", str(d / "base.fvecs"), "--m", "8", "--w", "2", "--out", str(d / "i.bin")])
    (d / "i.bin.json").unlink()
    assert main(["query", "--index", str(d / "i.bin"), "--data", str(d / "base.fvecs"),
                 "--queries", str(d / "q.fvecs")]) == 0
    with pytest.raises(SystemExit):
        main(["query", "--index", str(d / "i.bin"), "--queries", str(d / "q.fvecs")])


def test_bad_input_reports_error(files, capsys):
    d = files
    (d / "junk.fvecs").write_bytes(b"\x01\x02")
    assert main(["build", "--data", str(d / "junk.fvecs"), "--m", "8", "--w", "1", "--out", str(d / "x")]) == 2
    assert "offset 0" in capsys.readouterr().err
    assert main(["build", "--data", str(d / "base.fvecs"), "--out", str(d / "x")]) == 2


def test_sweep_cli(tmp_path, capsys):
    grid = {"dataset": {"kind": "gaussian", "n": 400, "d": 6, "queries": 5, "clusters": 5},
            "k": 5, "m": [8], "w": [2.0], "lambda": [5, 396], "probes": [1], "repetitions": 1,
            "linear_scan": True}
    (tmp_path / "g.json").write_text(json.dumps(grid))
    assert main(["sweep", "--config", str(tmp_path / "g.json"), "--out", str(tmp_path / "s.csv"), "--best"]) == 0
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "method,m,w,lambda,probes,k,recall,ratio,qtime_ms,build_s,index_bytes"
    assert len(lines) == 4
