"""End-to-end runs: drive a backend over a split and emit a prediction file.

Four run modes share one prediction-record shape:

  * ``detect-infill`` — detect spans/lengths, mask, infill, assemble.
  * ``struct`` / ``span`` — prompt, generate, parse the approach's format.
  * ``plain`` — prompt and generate; the output text is recorded as-is for
    sentence-level and chrF scoring, since bare normalized text does not
    identify source spans.

A failing backend never aborts a run: the sentence is recorded with no
predictions and an error note, and processing continues.  Output order
always follows input order (except under :func:`bench`, which sorts by
length), so prediction files align line-by-line with their gold files.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import genformat, tagging
from .backends import Backend
from .corpus import NormInstance, SentenceAnnotation

DETECT_INFILL = "detect-infill"
RUN_APPROACHES = (DETECT_INFILL, genformat.PLAIN, genformat.STRUCT, genformat.SPAN)


class PipelineError(ValueError):
    pass


@dataclass
class RunConfig:
    approach: str
    scheme: str = tagging.FULL_SEG
    language_name: str = "Japanese"
    max_new_tokens: int = 256
    batch_size: int = 1
    jobs: int = 1

    def __post_init__(self):
        if self.approach not in RUN_APPROACHES:
            raise PipelineError(
                f"unknown approach {self.approach!r}; expected one of {RUN_APPROACHES}")
        if self.scheme not in tagging.SCHEMES:
            raise PipelineError(f"unknown scheme {self.scheme!r}")
        if self.jobs < 1:
            raise PipelineError("jobs must be >= 1")


@dataclass
class PredictionRecord:
    id: str
    instances: tuple[NormInstance, ...] = ()
    text: str | None = None
    diag: dict | None = None
    error: str | None = None

    def to_json(self) -> dict:
        obj: dict = {"id": self.id,
                     "instances": [{"b": i.begin, "e": i.end, "form": i.form}
                                   for i in self.instances]}
        if self.text is not None:
            obj["text"] = self.text
        diag = dict(self.diag or {})
        if self.error:
            diag["error"] = self.error
        if diag:
            obj["diag"] = diag
        return obj


def write_predictions(records: Iterable[PredictionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def _map_ordered(
    fn: Callable[[Backend, SentenceAnnotation], PredictionRecord],
    backend: Backend,
    sentences: Sequence[SentenceAnnotation],
    jobs: int,
    batch_size: int = 1,
) -> list[PredictionRecord]:
    """Apply ``fn`` over sentences with ``jobs`` workers, each owning its
    own backend connection; results come back in input order.  Workers pull
    ``batch_size`` consecutive sentences per queue operation."""
    if jobs <= 1 or len(sentences) <= 1:
        return [fn(backend, s) for s in sentences]
    step = max(1, batch_size)
    tasks: queue.Queue = queue.Queue()
    for start in range(0, len(sentences), step):
        tasks.put((start, sentences[start:start + step]))
    results: list[PredictionRecord | None] = [None] * len(sentences)
    errors: list[BaseException] = []

    def worker() -> None:
        wb = backend.for_worker()
        try:
            while True:
                try:
                    start, batch = tasks.get_nowait()
                except queue.Empty:
                    return
                for offset, sent in enumerate(batch):
                    results[start + offset] = fn(wb, sent)
        except BaseException as exc:  # fn is expected to be total; keep the trace
            errors.append(exc)
        finally:
            if wb is not backend:
                wb.close()

    threads = [threading.Thread(target=worker) for _ in range(min(jobs, len(sentences)))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return [r for r in results if r is not None]


def _detect_infill_one(backend: Backend, sent: SentenceAnnotation) -> PredictionRecord:
    try:
        tags, lengths = backend.detect(sent.id, sent.text)
        det = tagging.decode_detection(sent.n, tags, lengths)
        masked = tagging.build_masked_input(sent.text, det)
        fills = backend.infill(sent.id, masked) if det.chunks else []
        instances = tuple(tagging.assemble_predictions(det, fills))
        diag = {}
        if det.repairs:
            diag["tag_repairs"] = det.repairs
        if det.ties:
            diag["vote_ties"] = det.ties
        return PredictionRecord(sent.id, instances, diag=diag or None)
    except Exception as exc:
        return PredictionRecord(sent.id, (), error=str(exc))


def run_detect_infill(
    sentences: Sequence[SentenceAnnotation],
    backend: Backend,
    cfg: RunConfig,
) -> list[PredictionRecord]:
    return _map_ordered(_detect_infill_one, backend, sentences, cfg.jobs, cfg.batch_size)


def _generative_one(backend: Backend, sent: SentenceAnnotation, cfg: RunConfig) -> PredictionRecord:
    try:
        prompt = genformat.build_prompt(sent.text, cfg.approach, cfg.language_name)
        generated = backend.generate(sent.id, prompt, cfg.max_new_tokens)
        if cfg.approach == genformat.PLAIN:
            return PredictionRecord(sent.id, (), text=generated)
        outcome = genformat.parse_generated(sent.text, generated, cfg.approach)
        diag = {}
        if outcome.dropped:
            diag["dropped_records"] = outcome.dropped
        if outcome.notes:
            diag["notes"] = list(outcome.notes)
        return PredictionRecord(sent.id, outcome.predictions, diag=diag or None)
    except Exception as exc:
        return PredictionRecord(sent.id, (), error=str(exc))


def run_generative(
    sentences: Sequence[SentenceAnnotation],
    backend: Backend,
    cfg: RunConfig,
) -> list[PredictionRecord]:
    if cfg.approach not in (genformat.PLAIN, genformat.STRUCT, genformat.SPAN):
        raise PipelineError(f"run_generative cannot serve approach {cfg.approach!r}")
    return _map_ordered(lambda b, s: _generative_one(b, s, cfg), backend, sentences,
                        cfg.jobs, cfg.batch_size)


def run(
    sentences: Sequence[SentenceAnnotation],
    backend: Backend,
    cfg: RunConfig,
) -> list[PredictionRecord]:
    if cfg.approach == DETECT_INFILL:
        return run_detect_infill(sentences, backend, cfg)
    return run_generative(sentences, backend, cfg)


@dataclass
class BenchReport:
    sentences: int
    warmup_seconds: float
    pass_seconds: list[float] = field(default_factory=list)

    @property
    def sentences_per_second(self) -> list[float]:
        return [self.sentences / s if s > 0 else float("inf") for s in self.pass_seconds]

    @property
    def mean_sentences_per_second(self) -> float:
        rates = self.sentences_per_second
        return sum(rates) / len(rates)

    def to_json(self) -> dict:
        return {"sentences": self.sentences,
                "warmup_seconds": self.warmup_seconds,
                "pass_seconds": self.pass_seconds,
                "sentences_per_second": self.sentences_per_second,
                "mean_sentences_per_second": self.mean_sentences_per_second}


def bench(
    sentences: Sequence[SentenceAnnotation],
    backend: Backend,
    cfg: RunConfig,
    repeats: int = 3,
) -> BenchReport:
    """Throughput measurement: one untimed warm-up pass, then ``repeats``
    timed passes over the split sorted by increasing text length."""
    if repeats < 1:
        raise PipelineError("repeats must be >= 1")
    ordered = sorted(sentences, key=lambda s: s.n)
    t0 = time.perf_counter()
    run(ordered, backend, cfg)
    warmup = time.perf_counter() - t0
    report = BenchReport(sentences=len(ordered), warmup_seconds=warmup)
    for _ in range(repeats):
        t0 = time.perf_counter()
        run(ordered, backend, cfg)
        report.pass_seconds.append(time.perf_counter() - t0)
    return report
