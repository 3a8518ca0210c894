import json
import signal
import socket
import subprocess
import sys
import time

import pytest
import requests

from reclab.cli import main
from reclab.config import EvaluatorConfig
from reclab.datasets import DatasetDescriptor, load_dataset
from reclab.domain import RecommendationList
from reclab.metrics import build_context, evaluate_all
from reclab.orchestrator import EvaluatorServer, Registry
from reclab.recommenders import serve
from reclab.synthetic import synthetic_ratings, write_movielens_100k


@pytest.fixture
def offline_files(tmp_path):
    train = tmp_path / "train.csv"
    train.write_text(
        "u1,a,5,\nu1,b,4,\nu2,a,4,\nu2,c,2,\nu3,b,5,\nu3,c,5,\n", encoding="utf-8"
    )
    test = tmp_path / "test.csv"
    test.write_text("u1,c,5,\nu2,b,4,\nu3,a,1,\n", encoding="utf-8")
    recs = tmp_path / "recs.csv"
    recs.write_text(
        "u1,c,1\nu1,d,2\nu2,b,1\nu2,a,2\nu3,a,1\nu3,b,2\n", encoding="utf-8"
    )
    return train, test, recs


def run_cli(*argv):
    return main(list(argv))


def test_eval_offline_matches_library(offline_files, capsys):
    train, test, recs = offline_files
    code = run_cli(
        "eval-offline", "--train", str(train), "--test", str(test), "--recs", str(recs),
        "--k", "2", "--threshold", "3", "--format", "json-lines",
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])

    train_rs = load_dataset(
        DatasetDescriptor(id="t", format="generic_csv", path=str(train), has_timestamps=True)
    )
    test_rs = load_dataset(
        DatasetDescriptor(id="e", format="generic_csv", path=str(test), has_timestamps=True)
    )
    ctx = build_context(train_rs, test_rs, 3.0, 2)
    # u2's "a" and u3's "b" are train-rated, so the sanitizer strips them.
    expected = evaluate_all(
        ctx,
        {
            "u1": RecommendationList("u1", ("c", "d")),
            "u2": RecommendationList("u2", ("b",)),
            "u3": RecommendationList("u3", ("a",)),
        },
    )
    assert payload["metrics"] == expected.to_dict()
    assert payload["violations"]["already_rated"] == 2


def test_eval_offline_sanitizes_duplicates(offline_files, capsys):
    train, test, recs = offline_files
    recs.write_text("u1,c,1\nu1,c,2\nu2,x,1\nu3,y,1\n", encoding="utf-8")
    code = run_cli(
        "eval-offline", "--train", str(train), "--test", str(test), "--recs", str(recs),
        "--k", "2", "--threshold", "3",
    )
    assert code == 0
    err = capsys.readouterr().err
    assert "sanitized" in err


def test_eval_offline_missing_file(tmp_path, capsys):
    code = run_cli(
        "eval-offline", "--train", str(tmp_path / "no.csv"), "--test", str(tmp_path / "no.csv"),
        "--recs", str(tmp_path / "no.csv"), "--k", "2", "--threshold", "3",
    )
    assert code == 2


def test_table_output_has_paper_column_order(offline_files, capsys):
    train, test, recs = offline_files
    assert run_cli(
        "eval-offline", "--train", str(train), "--test", str(test), "--recs", str(recs),
        "--k", "2", "--threshold", "3",
    ) == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert (
        header.split()[1:]
        == ["Coverage", "Precision", "Recall", "NDCG", "Novelty", "Diversity", "Serendipity"]
    )


@pytest.fixture
def full_stack(tmp_path):
    dataset_path = tmp_path / "u.data"
    write_movielens_100k(
        dataset_path, synthetic_ratings(n_ratings=600, n_users=60, n_items=50, seed=9)
    )
    dataset = DatasetDescriptor(id="demo", format="movielens_100k", path=str(dataset_path))
    rec_server = serve("most_popular")
    registry = Registry(
        datasets={"demo": dataset}, recommenders={"most-popular": rec_server.base_uri}
    )
    config = EvaluatorConfig(
        port=0, data_dir=str(tmp_path / "store"), poll_interval=0.01,
        train_timeout=30, recommend_timeout=30,
    )
    evaluator = EvaluatorServer(config, registry=registry).start()
    yield evaluator
    rec_server.stop()
    evaluator.stop()


def test_run_command_end_to_end(full_stack, tmp_path, capsys):
    output = tmp_path / "record.json"
    code = run_cli(
        "run", "--dataset", "demo", "--split", "random", "--test", "0.2",
        "--k", "5", "--threshold", "3", "--rec", "most-popular", "--seed", "7",
        "--api", full_stack.base_uri, "--poll", "0.02", "--output", str(output),
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "Coverage" in out and "Serendipity" in out
    record = json.loads(output.read_text())
    assert record["status"] == "done"
    assert record["per_recommender"]["most-popular"]["metrics"]["precision"] >= 0


def test_run_command_rejects_bad_config_before_submission(full_stack, capsys):
    code = run_cli(
        "run", "--dataset", "demo", "--split", "random", "--test", "0.2",
        "--k", "0", "--threshold", "3", "--rec", "most-popular",
        "--api", full_stack.base_uri,
    )
    assert code == 2
    assert "k" in capsys.readouterr().err


def test_run_command_unreachable_evaluator(capsys):
    code = run_cli(
        "run", "--dataset", "demo", "--split", "random", "--test", "0.2",
        "--k", "5", "--threshold", "3", "--rec", "r",
        "--api", "http://127.0.0.1:9",
    )
    assert code == 3


def test_export_all_and_reimport(full_stack, tmp_path, capsys):
    assert run_cli(
        "run", "--dataset", "demo", "--split", "random", "--test", "0.2",
        "--k", "5", "--threshold", "3", "--rec", "most-popular", "--seed", "1",
        "--api", full_stack.base_uri, "--poll", "0.02",
    ) == 0
    capsys.readouterr()

    dest = tmp_path / "export"
    assert run_cli("export", "--all", str(dest), "--api", full_stack.base_uri) == 0
    files = sorted(p.name for p in dest.glob("*.json"))
    assert "index.json" in files
    record_files = [name for name in files if name != "index.json"]
    assert len(record_files) == 1
    experiment_id = record_files[0][: -len(".json")]

    # A fresh deployment over the exported directory serves identical records.
    config = EvaluatorConfig(port=0, data_dir=str(dest))
    fresh = EvaluatorServer(config, registry=Registry(datasets={}, recommenders={})).start()
    original = requests.get(
        f"{full_stack.base_uri}/experiments/{experiment_id}", timeout=5
    ).json()
    reimported = requests.get(
        f"{fresh.base_uri}/experiments/{experiment_id}", timeout=5
    ).json()
    assert reimported == original
    fresh.stop()


def test_export_unknown_id(full_stack, tmp_path, capsys):
    code = run_cli(
        "export", "--id", "does-not-exist", str(tmp_path / "out"),
        "--api", full_stack.base_uri,
    )
    assert code == 1


def test_unknown_recommender_kind_exits_2(capsys):
    with pytest.raises(SystemExit) as excinfo:
        run_cli("recommender", "--kind", "bogus", "--port", "1")
    assert excinfo.value.code == 2


# --- subprocess smoke tests for the long-running commands --------------------------


def free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def wait_for(url, timeout=20):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            return requests.get(url, timeout=2)
        except requests.RequestException:
            time.sleep(0.1)
    raise AssertionError(f"{url} never came up")


def test_recommender_subprocess_serves_protocol():
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "reclab.cli", "recommender", "--kind", "random",
         "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE,
    )
    try:
        resp = wait_for(f"http://127.0.0.1:{port}/model")
        assert resp.json() == {"status": "none"}
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)


def test_serve_subprocess_with_config(tmp_path):
    port = free_port()
    (tmp_path / "u.data").write_text("1\t2\t3\t4\n")
    (tmp_path / "datasets.toml").write_text(
        '[demo]\nformat = "movielens_100k"\npath = "u.data"\n'
    )
    (tmp_path / "recommenders.toml").write_text('rec = "http://127.0.0.1:1"\n')
    (tmp_path / "reclab.toml").write_text(
        f'port = {port}\ndata_dir = "store"\n'
        'datasets_file = "datasets.toml"\nrecommenders_file = "recommenders.toml"\n'
    )
    proc = subprocess.Popen(
        [sys.executable, "-m", "reclab.cli", "serve", "--config",
         str(tmp_path / "reclab.toml")],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE,
    )
    try:
        resp = wait_for(f"http://127.0.0.1:{port}/datasets")
        assert resp.json()["datasets"][0]["id"] == "demo"
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)


def test_serve_bad_config_path_exits_2():
    result = subprocess.run(
        [sys.executable, "-m", "reclab.cli", "serve", "--config", "/nope/reclab.toml"],
        capture_output=True, timeout=30,
    )
    assert result.returncode == 2
    assert b"error" in result.stderr


def test_serve_port_in_use_exits_3(tmp_path):
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    (tmp_path / "reclab.toml").write_text(f'port = {port}\ndata_dir = "store"\n')
    try:
        result = subprocess.run(
            [sys.executable, "-m", "reclab.cli", "serve", "--config",
             str(tmp_path / "reclab.toml")],
            capture_output=True, timeout=30,
        )
        assert result.returncode == 3
    finally:
        sock.close()
