"""Wire-protocol conformance of the bridge server's echo mode.

The oracle end-to-end run from the acceptance suite is repeated here with
every request crossing the wire protocol into a separate server process.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from lexnorm.backends import BridgeBackend
from lexnorm.corpus import save_split
from lexnorm.genformat import SPAN
from lexnorm.metrics import gold_map, score_normalization, sentence_accuracy
from lexnorm.pipeline import DETECT_INFILL, RunConfig, run_detect_infill, run_generative

BRIDGE_SRC = Path(__file__).resolve().parents[1] / "bridge" / "src"


@pytest.fixture(autouse=True)
def bridge_on_path(monkeypatch):
    # works whether or not the bridge package is pip-installed
    current = os.environ.get("PYTHONPATH", "")
    monkeypatch.setenv("PYTHONPATH",
                       f"{BRIDGE_SRC}{os.pathsep}{current}" if current else str(BRIDGE_SRC))


@pytest.fixture
def endpoint(tmp_path, oracle_fixture):
    gold = tmp_path / "gold.jsonl"
    save_split(oracle_fixture, gold)
    return f"stdio:{sys.executable} -m lexnorm_bridge --echo {gold}"


def test_hello_reports_capabilities(endpoint):
    backend = BridgeBackend(endpoint)
    try:
        assert backend.capabilities == {"detect", "infill", "generate"}
    finally:
        backend.close()


def test_oracle_end_to_end_over_protocol(endpoint, oracle_fixture):
    backend = BridgeBackend(endpoint)
    try:
        gold = gold_map(oracle_fixture)
        for records in (
            run_detect_infill(oracle_fixture, backend, RunConfig(DETECT_INFILL)),
            run_generative(oracle_fixture, backend, RunConfig(SPAN)),
        ):
            pred = {r.id: list(r.instances) for r in records}
            assert not any(r.error for r in records), \
                [r for r in records if r.error][:3]
            prf = score_normalization(gold, pred)
            acc = sentence_accuracy(gold, pred)
            assert prf.precision == 1.0 and prf.recall == 1.0
            assert acc.s_acc_p == 1.0 and acc.s_acc_n == 1.0
    finally:
        backend.close()


def test_worker_pool_over_protocol(endpoint, oracle_fixture):
    backend = BridgeBackend(endpoint)
    try:
        records = run_generative(oracle_fixture, backend, RunConfig(SPAN, jobs=4))
        pred = {r.id: list(r.instances) for r in records}
        prf = score_normalization(gold_map(oracle_fixture), pred)
        assert prf.precision == 1.0 and prf.recall == 1.0
    finally:
        backend.close()


def test_malformed_request_gets_error_without_teardown(tmp_path, oracle_fixture):
    gold = tmp_path / "gold.jsonl"
    save_split(oracle_fixture, gold)
    proc = subprocess.Popen(
        [sys.executable, "-m", "lexnorm_bridge", "--echo", str(gold)],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL, text=True)
    try:
        proc.stdin.write("{{{ not json\n")
        proc.stdin.flush()
        reply = json.loads(proc.stdout.readline())
        assert "error" in reply
        assert proc.poll() is None
        proc.stdin.write(json.dumps({"op": "hello", "id": "h"}) + "\n")
        proc.stdin.flush()
        hello = json.loads(proc.stdout.readline())
        assert hello["capabilities"] == ["detect", "infill", "generate"]
    finally:
        proc.stdin.close()
        proc.wait(timeout=5)
