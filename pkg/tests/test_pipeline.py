import json
import threading

import pytest

from lexnorm.backends import Backend, GoldEchoBackend
from lexnorm.corpus import NormInstance
from lexnorm.metrics import gold_map, score_normalization, sentence_accuracy
from lexnorm.pipeline import (
    DETECT_INFILL,
    BenchReport,
    PipelineError,
    PredictionRecord,
    RunConfig,
    bench,
    run,
    run_detect_infill,
    run_generative,
    write_predictions,
)

from conftest import random_corpus


class AllOutsideBackend(Backend):
    capabilities = frozenset({"detect"})

    def detect(self, sent_id, chars):
        return ["O"] * len(chars), [-1] * len(chars)


class FixedBackend(Backend):
    """Replays canned per-sentence answers."""

    capabilities = frozenset({"detect", "infill", "generate"})

    def __init__(self, detect_answers=None, infill_answers=None, generate_answers=None):
        self.detect_answers = detect_answers or {}
        self.infill_answers = infill_answers or {}
        self.generate_answers = generate_answers or {}

    def detect(self, sent_id, chars):
        return self.detect_answers[sent_id]

    def infill(self, sent_id, masked):
        return self.infill_answers[sent_id]

    def generate(self, sent_id, prompt, max_new_tokens):
        return self.generate_answers[sent_id]


class FlakyBackend(GoldEchoBackend):
    def __init__(self, sentences, fail_ids):
        super().__init__(sentences)
        self.fail_ids = fail_ids

    def detect(self, sent_id, chars):
        if sent_id in self.fail_ids:
            raise RuntimeError("backend exploded")
        return super().detect(sent_id, chars)


def predictions_by_id(records):
    return {r.id: list(r.instances) for r in records}


class TestDetectInfill:
    def test_oracle_scores_perfectly(self, oracle_fixture):
        backend = GoldEchoBackend(oracle_fixture)
        records = run_detect_infill(oracle_fixture, backend, RunConfig(DETECT_INFILL))
        prf = score_normalization(gold_map(oracle_fixture), predictions_by_id(records))
        assert prf.precision == 1.0 and prf.recall == 1.0

    def test_all_outside_backend_empty_everywhere(self, oracle_fixture):
        records = run_detect_infill(oracle_fixture, AllOutsideBackend(),
                                    RunConfig(DETECT_INFILL))
        assert all(r.instances == () for r in records)
        assert all(r.error is None for r in records)

    def test_figure_flow(self, table1_sentence):
        backend = FixedBackend(
            detect_answers={"s1": (["B", "I", "I", "E", "O", "O", "O"],
                                   [5, 5, 5, 5, -1, -1, -1])},
            infill_answers={"s1": ["ツイッター"]},
        )
        records = run_detect_infill([table1_sentence], backend, RunConfig(DETECT_INFILL))
        assert [(i.begin, i.end, i.form) for i in records[0].instances] == \
            [(0, 4, "ツイッター")]

    def test_backend_failure_recorded_not_raised(self, oracle_fixture):
        fail_ids = {oracle_fixture[3].id, oracle_fixture[7].id}
        backend = FlakyBackend(oracle_fixture, fail_ids)
        records = run_detect_infill(oracle_fixture, backend, RunConfig(DETECT_INFILL))
        assert len(records) == len(oracle_fixture)
        failed = {r.id for r in records if r.error}
        assert failed == fail_ids
        assert all(r.instances == () for r in records if r.error)


class TestGenerative:
    @pytest.mark.parametrize("approach", ["struct", "span"])
    def test_oracle_scores_perfectly(self, oracle_fixture, approach):
        backend = GoldEchoBackend(oracle_fixture)
        records = run_generative(oracle_fixture, backend, RunConfig(approach))
        prf = score_normalization(gold_map(oracle_fixture), predictions_by_id(records))
        assert prf.precision == 1.0 and prf.recall == 1.0
        acc = sentence_accuracy(gold_map(oracle_fixture), predictions_by_id(records))
        assert acc.s_acc_p == 1.0 and acc.s_acc_n == 1.0

    def test_none_everywhere_means_zero_recall(self, oracle_fixture):
        answers = {s.id: "NONE" for s in oracle_fixture}
        backend = FixedBackend(generate_answers=answers)
        records = run_generative(oracle_fixture, backend, RunConfig("span"))
        prf = score_normalization(gold_map(oracle_fixture), predictions_by_id(records))
        assert prf.recall == 0.0

    def test_unresolvable_record_counted_in_diagnostics(self, table1_sentence):
        backend = FixedBackend(generate_answers={"s1": "ぞんざい>>x>>0"})
        records = run_generative([table1_sentence], backend, RunConfig("span"))
        assert records[0].instances == ()
        assert records[0].diag["dropped_records"] == 1

    def test_plain_records_text_only(self, oracle_fixture):
        backend = GoldEchoBackend(oracle_fixture)
        records = run_generative(oracle_fixture, backend, RunConfig("plain"))
        assert all(r.text is not None and r.instances == () for r in records)

    def test_detect_infill_approach_rejected(self, oracle_fixture):
        with pytest.raises(PipelineError):
            run_generative(oracle_fixture, GoldEchoBackend(oracle_fixture),
                           RunConfig(DETECT_INFILL))


class TestRunDispatchAndWorkers:
    def test_deterministic_and_order_preserving(self, oracle_fixture):
        backend = GoldEchoBackend(oracle_fixture)
        a = run(oracle_fixture, backend, RunConfig("span"))
        b = run(oracle_fixture, backend, RunConfig("span"))
        assert a == b
        assert [r.id for r in a] == [s.id for s in oracle_fixture]

    def test_worker_pool_matches_single_thread(self, oracle_fixture):
        backend = GoldEchoBackend(oracle_fixture)
        single = run(oracle_fixture, backend, RunConfig("span", jobs=1))
        pooled = run(oracle_fixture, backend, RunConfig("span", jobs=4))
        assert pooled == single

    def test_worker_pool_detect_infill(self, oracle_fixture):
        backend = GoldEchoBackend(oracle_fixture)
        single = run(oracle_fixture, backend, RunConfig(DETECT_INFILL, jobs=1))
        pooled = run(oracle_fixture, backend, RunConfig(DETECT_INFILL, jobs=3))
        assert pooled == single

    def test_bad_config_rejected(self):
        with pytest.raises(PipelineError):
            RunConfig("other")
        with pytest.raises(PipelineError):
            RunConfig("span", jobs=0)
        with pytest.raises(PipelineError):
            RunConfig(DETECT_INFILL, scheme="chunked")


class TestPredictionFiles:
    def test_write_shape(self, tmp_path, oracle_fixture):
        backend = GoldEchoBackend(oracle_fixture)
        records = run(oracle_fixture, backend, RunConfig("span"))
        path = tmp_path / "pred.jsonl"
        write_predictions(records, path)
        lines = [json.loads(l) for l in path.read_text("utf-8").splitlines()]
        assert [l["id"] for l in lines] == [s.id for s in oracle_fixture]
        assert all("instances" in l for l in lines)
        for line in lines:
            for inst in line["instances"]:
                assert set(inst) == {"b", "e", "form"}

    def test_error_lands_in_diag(self, tmp_path):
        rec = PredictionRecord("x", (), error="boom", diag={"tag_repairs": 2})
        path = tmp_path / "p.jsonl"
        write_predictions([rec], path)
        obj = json.loads(path.read_text("utf-8"))
        assert obj["diag"]["error"] == "boom"
        assert obj["diag"]["tag_repairs"] == 2


class TestBench:
    def test_report_shape_and_sorting(self, oracle_fixture):
        seen_lengths = []

        class Spy(GoldEchoBackend):
            def generate(self, sent_id, prompt, max_new_tokens):
                seen_lengths.append(len(prompt))
                return super().generate(sent_id, prompt, max_new_tokens)

        backend = Spy(oracle_fixture)
        report = bench(oracle_fixture[:50], backend, RunConfig("span"), repeats=3)
        assert isinstance(report, BenchReport)
        assert len(report.pass_seconds) == 3
        assert report.sentences == 50
        assert report.mean_sentences_per_second > 0
        # sentences visited in increasing length order within each pass
        per_pass = seen_lengths[:50]
        assert per_pass == sorted(per_pass)

    def test_throughput_reflects_wall_time(self, oracle_fixture):
        class Slow(GoldEchoBackend):
            def generate(self, sent_id, prompt, max_new_tokens):
                import time
                time.sleep(0.001)
                return super().generate(sent_id, prompt, max_new_tokens)

        report = bench(oracle_fixture[:20], Slow(oracle_fixture), RunConfig("span"),
                       repeats=1)
        assert report.sentences_per_second[0] < 20 / 0.02 + 1e-9

    def test_repeats_validated(self, oracle_fixture):
        with pytest.raises(PipelineError):
            bench(oracle_fixture, GoldEchoBackend(oracle_fixture), RunConfig("span"),
                  repeats=0)
