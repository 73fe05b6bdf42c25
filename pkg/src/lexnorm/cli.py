"""Command-line interface: one subcommand per operation family.

Conventions: long flags only, explicit paths, machine-readable output on
stdout (JSON unless ``--format table``), diagnostics on stderr.  Exit codes:
0 success, 1 validation or usage error, 2 I/O or transport error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import analysis, backends, corpus, genformat, metrics, pipeline, tagging

DEFAULT_SEED = 20240  # fixed so sampling runs are reproducible by default
DEFAULT_BETA = 0.5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad usage, not argparse's 2
        raise UsageError(message)


def _emit(obj, fmt: str, table_renderer=None) -> None:
    if fmt == "table" and table_renderer is not None:
        sys.stdout.write(table_renderer(obj) + "\n")
    else:
        sys.stdout.write(json.dumps(obj, ensure_ascii=False, indent=2) + "\n")


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(row):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)


def _num(value, digits=4) -> str:
    if value is None:
        return "--"
    return f"{value:.{digits}f}"


def _parse_split_args(pairs: list[str]) -> dict[str, str]:
    spec = {}
    for item in pairs:
        if "=" in item:
            name, path = item.split("=", 1)
        else:
            name, path = Path(item).stem, item
        spec[name] = path
    return spec


def _load_single_split(path: str) -> list[corpus.SentenceAnnotation]:
    return corpus.load_split(path)


def _make_backend(spec: str, sentences) -> backends.Backend:
    if spec == "oracle":
        return backends.GoldEchoBackend(sentences)
    if spec.startswith("bridge:"):
        return backends.BridgeBackend(spec[len("bridge:"):])
    if spec.startswith(("http://", "https://", "stdio:")):
        return backends.BridgeBackend(spec)
    if spec == "env":
        endpoint = os.environ.get(backends.BRIDGE_ENV_VAR)
        if not endpoint:
            raise UsageError(
                f"--backend env requires the {backends.BRIDGE_ENV_VAR} environment variable")
        return backends.BridgeBackend(endpoint)
    raise UsageError(
        f"unknown backend {spec!r}; use oracle, bridge:ENDPOINT, an http(s):// or "
        f"stdio: endpoint, or env")


# --- subcommand implementations ------------------------------------------------

def _cmd_convert(args) -> int:
    sentences = _load_single_split(args.infile)
    corpus.save_split(sentences, args.out)
    _log(f"validated {len(sentences)} sentences -> {args.out}")
    return 0


def _cmd_stats(args) -> int:
    spec = _parse_split_args(args.infile)
    ds = corpus.load_dataset(Path.cwd(), spec)
    report = corpus.dataset_stats(ds)

    def renderer(obj) -> str:
        rows = []
        for split, stats in report.per_split.items():
            rows.append([split, "(all)", str(stats.sentences),
                         "--" if stats.words is None else str(stats.words),
                         str(stats.instances)])
            for dom, st in sorted(report.per_domain[split].items()):
                rows.append([split, dom or "(none)", str(st.sentences),
                             "--" if st.words is None else str(st.words),
                             str(st.instances)])
        return _table(["split", "domain", "sentences", "words", "instances"], rows)

    _emit(report.to_json(), args.format, renderer)
    return 0


def _cmd_sample(args) -> int:
    sentences = _load_single_split(args.infile)
    ds = corpus.Dataset({"split": sentences})
    subset = corpus.sample_subset(ds, "split", args.n, args.seed)
    corpus.save_split(subset.split("split"), args.out)
    _log(f"sampled {args.n} of {len(sentences)} sentences (seed {args.seed}) -> {args.out}")
    return 0


def _cmd_encode(args) -> int:
    sentences = _load_single_split(args.infile)
    tagging.write_encodings(sentences, args.out, args.scheme)
    _log(f"encoded {len(sentences)} sentences with scheme {args.scheme} -> {args.out}")
    return 0


def _cmd_render(args) -> int:
    sentences = _load_single_split(args.infile)
    genformat.write_training_pairs(
        sentences, args.out, args.approach, prompts=args.prompts, language_name=args.language)
    kind = "prompt pairs" if args.prompts else "training pairs"
    _log(f"rendered {len(sentences)} {kind} ({args.approach}) -> {args.out}")
    return 0


def _cmd_decode(args) -> int:
    records: list[pipeline.PredictionRecord] = []
    if args.mode == "detect":
        with open(args.infile, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                sid, text, tags, lengths, _pos = tagging.read_encoding_obj(json.loads(line))
                det = tagging.decode_detection(len(text), tags, lengths)
                instances = tuple(
                    corpus.NormInstance(c.begin, c.end, "") for c in det.chunks)
                diag = {}
                if det.repairs:
                    diag["tag_repairs"] = det.repairs
                if det.ties:
                    diag["vote_ties"] = det.ties
                diag["target_lens"] = [c.target_len for c in det.chunks]
                records.append(pipeline.PredictionRecord(sid, instances, diag=diag))
    else:
        sources = {s.id: s.text for s in _load_single_split(args.source)}
        with open(args.generated, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                sid = str(obj["id"])
                if sid not in sources:
                    raise corpus.CorpusError(f"generated output for unknown sentence id {sid!r}")
                outcome = genformat.parse_generated(sources[sid], str(obj["text"]), args.mode)
                diag = {}
                if outcome.dropped:
                    diag["dropped_records"] = outcome.dropped
                if outcome.notes:
                    diag["notes"] = list(outcome.notes)
                records.append(
                    pipeline.PredictionRecord(sid, outcome.predictions, diag=diag or None))
    pipeline.write_predictions(records, args.out)
    _log(f"decoded {len(records)} sentences -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    sentences = _load_single_split(args.infile)
    cfg = pipeline.RunConfig(
        approach=args.approach, scheme=args.scheme, language_name=args.language,
        max_new_tokens=args.max_new_tokens, jobs=args.jobs)
    backend = _make_backend(args.backend, sentences)
    try:
        records = pipeline.run(sentences, backend, cfg)
    finally:
        backend.close()
    pipeline.write_predictions(records, args.out)
    failures = sum(1 for r in records if r.error)
    repairs = sum((r.diag or {}).get("tag_repairs", 0) for r in records)
    ties = sum((r.diag or {}).get("vote_ties", 0) for r in records)
    dropped = sum((r.diag or {}).get("dropped_records", 0) for r in records)
    _log(f"ran {args.approach} over {len(records)} sentences -> {args.out} "
         f"(failures={failures}, tag_repairs={repairs}, vote_ties={ties}, "
         f"dropped_records={dropped})")
    return 0


def _hypothesis_text(sent: corpus.SentenceAnnotation,
                     instances: list[corpus.NormInstance],
                     texts: dict[str, str]) -> str:
    if sent.id in texts:
        return texts[sent.id]
    ordered = sorted(instances, key=lambda i: (i.begin, i.end))
    return corpus.apply_instances(sent.text, ordered)


def _score_tags(gold_path: str, pred_path: str) -> dict:
    def read(path):
        out = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                sid, text, tags_, lengths, pos = tagging.read_encoding_obj(json.loads(line))
                out[sid] = (text, tags_, lengths, pos)
        return out

    gold = read(gold_path)
    pred = read(pred_path)
    if set(gold) != set(pred):
        raise metrics.MetricsError("gold/prediction id mismatch in tag files")
    pairs = []
    for sid, (text, tags_, lengths, pos) in gold.items():
        enc = tagging.DetectionEncoding(
            tuple(tags_), tuple(lengths), tagging.PART_SEG,
            tuple(pos) if pos is not None else None)
        _t, p_tags, p_lengths, p_pos = pred[sid][0], pred[sid][1], pred[sid][2], pred[sid][3]
        pairs.append((enc, p_tags, p_lengths, p_pos))
    return metrics.tag_metrics_corpus(pairs).to_json()


def _cmd_score(args) -> int:
    if args.gold_tags or args.pred_tags:
        if not (args.gold_tags and args.pred_tags):
            raise UsageError("tag scoring requires both --gold-tags and --pred-tags")
        _emit(_score_tags(args.gold_tags, args.pred_tags), args.format)
        return 0
    if not (args.gold and args.pred):
        raise UsageError("score requires --gold and --pred (or --gold-tags/--pred-tags)")
    sentences = _load_single_split(args.gold)
    gold = metrics.gold_map(sentences)
    pred_instances, pred_texts = metrics.read_prediction_file(args.pred)
    result: dict = {}
    if args.task in ("normalization", "both"):
        result["normalization"] = metrics.score_normalization(
            gold, pred_instances, args.beta).to_json()
    if args.task in ("detection", "both"):
        result["detection"] = metrics.score_detection(gold, pred_instances, args.beta).to_json()
    if args.sentence_accuracy:
        text_mode = bool(pred_texts) and not any(pred_instances.values())
        if text_mode:
            pos = neg = pos_hit = neg_hit = 0
            for sent in sentences:
                hyp = pred_texts.get(sent.id)
                refs = corpus.gold_renderings(sent)
                ok = hyp is not None and hyp in refs
                if sent.gold:
                    pos += 1
                    pos_hit += ok
                else:
                    neg += 1
                    neg_hit += ok
            result["sentence_accuracy"] = metrics.SentenceAccuracy(
                pos_hit / pos if pos else None, neg_hit / neg if neg else None,
                pos, neg).to_json()
        else:
            result["sentence_accuracy"] = metrics.sentence_accuracy(gold, pred_instances).to_json()
    if args.chrf:
        refs = []
        hyps = []
        for sent in sentences:
            refs.append(corpus.apply_instances(sent.text, corpus.gold_as_instances(sent)))
            hyps.append(_hypothesis_text(sent, pred_instances.get(sent.id, []), pred_texts))
        result["chrf"] = metrics.corpus_chrf(refs, hyps).to_json()

    def renderer(obj) -> str:
        rows = []
        for task in ("normalization", "detection"):
            if task in obj:
                r = obj[task]
                rows.append([task, str(r["tp"]), str(r["fp"]), str(r["fn"]),
                             _num(r["precision"]), _num(r["recall"]),
                             f"f{r['beta']:g}=" + _num(r["f"])])
        table = _table(["task", "tp", "fp", "fn", "precision", "recall", "f"], rows) if rows else ""
        extra = []
        if "sentence_accuracy" in obj:
            sa = obj["sentence_accuracy"]
            extra.append(f"s_acc_p={_num(sa['s_acc_p'])} ({sa['positive_sentences']} sentences)  "
                         f"s_acc_n={_num(sa['s_acc_n'])} ({sa['negative_sentences']} sentences)")
        if "chrf" in obj:
            extra.append(f"chrf={obj['chrf']['chrf']:.2f}")
        return "\n".join(x for x in [table, *extra] if x)

    _emit(result, args.format, renderer)
    return 0


def _cmd_analyze(args) -> int:
    if args.analysis_cmd == "indicators":
        train = _load_single_split(args.train)
        test = _load_single_split(args.test)
        forms = None
        lex = None
        if args.pred:
            pred_instances, _texts = metrics.read_prediction_file(args.pred)
            forms = [i.form for insts in pred_instances.values() for i in insts]
        if args.lexicon:
            lex = corpus.load_lexicon(args.lexicon)
        report = analysis.indicator_report(train, test, forms, lex)
        result = report.to_json()
        if args.pred:
            pred_instances, _texts = metrics.read_prediction_file(args.pred)
            groups = _surface_groups(test, pred_instances)
            train_surfaces = [s for sent in train for s in sent.surfaces()]
            result["surf_in_train_by_outcome"] = {
                name: {"count": len(surfs),
                       "rate": analysis.surf_in_train(train_surfaces, surfs)}
                for name, surfs in groups.items()
            }

        def renderer(obj) -> str:
            rows = [
                ["surf_outside_train", _num(obj["surf_outside_train"]),
                 str(obj["denominators"]["test_surfaces"])],
                ["surf_in_train", _num(obj["surf_in_train"]),
                 str(obj["denominators"]["test_surfaces"])],
                ["norm_in_lex", _num(obj["norm_in_lex"]),
                 str(obj["denominators"]["predicted_forms"])],
            ]
            for name, row in obj.get("surf_in_train_by_outcome", {}).items():
                rows.append([f"surf_in_train[{name}]", _num(row["rate"]), str(row["count"])])
            return _table(["indicator", "rate", "n"], rows)

        _emit(result, args.format, renderer)
        return 0
    if args.analysis_cmd == "correlation":
        xs, ys = _read_two_column_csv(args.csv)
        r = analysis.pearson(xs, ys)
        _emit({"pearson_r": r, "points": len(xs)}, args.format)
        return 0
    if args.analysis_cmd == "breakdown":
        sentences = _load_single_split(args.gold)
        pred_instances, _texts = metrics.read_prediction_file(args.pred)
        table = analysis.breakdown(sentences, pred_instances, args.by, args.beta)

        def renderer(obj) -> str:
            rows = []
            if obj["key"] == "domain":
                for dom, r in obj["rows"].items():
                    rows.append([dom or "(none)", str(r["tp"]), str(r["fp"]), str(r["fn"]),
                                 _num(r["precision"]), _num(r["recall"]), _num(r["f"])])
                return _table(["domain", "tp", "fp", "fn", "precision", "recall", "f"], rows)
            for cat, r in obj["rows"].items():
                rows.append([cat, str(r["gold"]), str(r["matched"]), _num(r["recall"])])
            return _table(["category", "gold", "matched", "recall"], rows)

        _emit(table.to_json(), args.format, renderer)
        return 0
    raise UsageError("analyze requires a subcommand: indicators, correlation, or breakdown")


def _surface_groups(test, pred_instances) -> dict[str, list[str]]:
    """Surfaces of TP/FP/FN instances, for coverage analysis of a run."""
    groups = {"tp": [], "fp": [], "fn": []}
    for sent in test:
        preds = pred_instances.get(sent.id, [])
        matched = [False] * len(sent.gold)
        seen = set()
        for p in preds:
            key = (p.begin, p.end, p.form)
            if key in seen:
                continue
            seen.add(key)
            hit = False
            for gi, g in enumerate(sent.gold):
                if not matched[gi] and g.span == p.span and p.form in g.forms:
                    matched[gi] = True
                    hit = True
                    break
            groups["tp" if hit else "fp"].append(sent.text[p.begin:p.end])
        for gi, g in enumerate(sent.gold):
            if not matched[gi]:
                groups["fn"].append(sent.text[g.begin:g.end])
    return groups


def _read_two_column_csv(path: str) -> tuple[list[float], list[float]]:
    xs: list[float] = []
    ys: list[float] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or len(row) < 2:
                continue
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                if not xs:
                    continue  # header row
                raise analysis.AnalysisError(f"non-numeric row {row!r} in {path}")
            xs.append(x)
            ys.append(y)
    return xs, ys


def _cmd_baseline(args) -> int:
    if args.baseline_cmd == "train-dict":
        sentences = _load_single_split(args.infile)
        model = backends.dict_train(corpus.Dataset({"train": sentences}), "train")
        backends.save_dict_model(model, args.out)
        _log(f"trained dictionary with {len(model.entries)} entries -> {args.out}")
        return 0
    if args.baseline_cmd == "dict":
        model = backends.load_dict_model(args.model)
        sentences = _load_single_split(args.infile)
        records = [
            pipeline.PredictionRecord(
                s.id, tuple(backends.dict_normalize(model, s.text)))
            for s in sentences
        ]
        pipeline.write_predictions(records, args.out)
        _log(f"dictionary baseline over {len(records)} sentences -> {args.out}")
        return 0
    if args.baseline_cmd == "leave-as-is":
        sentences = _load_single_split(args.infile)
        records = [
            pipeline.PredictionRecord(s.id, tuple(backends.leave_as_is(s.text)))
            for s in sentences
        ]
        pipeline.write_predictions(records, args.out)
        _log(f"leave-as-is baseline over {len(records)} sentences -> {args.out}")
        return 0
    raise UsageError("baseline requires a subcommand: train-dict, dict, or leave-as-is")


def _cmd_bench(args) -> int:
    sentences = _load_single_split(args.infile)
    cfg = pipeline.RunConfig(
        approach=args.approach, scheme=args.scheme, language_name=args.language,
        max_new_tokens=args.max_new_tokens)
    backend = _make_backend(args.backend, sentences)
    try:
        report = pipeline.bench(sentences, backend, cfg, repeats=args.repeats)
    finally:
        backend.close()
    _emit(report.to_json(), args.format)
    return 0


def _cmd_bridge_check(args) -> int:
    endpoint = args.endpoint or os.environ.get(backends.BRIDGE_ENV_VAR)
    if not endpoint:
        raise UsageError(
            f"--endpoint required (or set {backends.BRIDGE_ENV_VAR})")
    reply = backends.bridge_call(endpoint, {"op": "hello", "id": "hello"})
    _emit({"endpoint": endpoint, "capabilities": reply["capabilities"]}, "json")
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="lexnorm",
                     description="Boundary-aware lexical normalization toolkit")
    sub = parser.add_subparsers(dest="command")

    def add_format(p):
        p.add_argument("--format", choices=["json", "table"], default="json")

    p = sub.add_parser("convert", help="validate a JSONL annotation file and rewrite it canonically")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("stats", help="sentence/word/instance counts per split and domain")
    p.add_argument("--in", dest="infile", action="append", required=True,
                   metavar="NAME=PATH", help="split file; repeatable")
    add_format(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("sample", help="deterministic uniform subset of a split")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("encode", help="write detection training examples (tags + lengths)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--scheme", choices=list(tagging.SCHEMES), default=tagging.FULL_SEG)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("render", help="write generative training pairs or prompts")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--approach", choices=list(genformat.APPROACHES), required=True)
    p.add_argument("--prompts", action="store_true", help="emit prompt/target pairs")
    p.add_argument("--language", default="Japanese")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("decode", help="turn raw model output into a prediction file")
    p.add_argument("--mode", choices=["detect", "struct", "span"], required=True)
    p.add_argument("--in", dest="infile", help="detection JSONL (mode detect)")
    p.add_argument("--source", help="gold/source JSONL (modes struct/span)")
    p.add_argument("--generated", help="generated-text JSONL with id/text (modes struct/span)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("run", help="run a backend over a split and write predictions")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--approach", choices=list(pipeline.RUN_APPROACHES), required=True)
    p.add_argument("--backend", required=True,
                   help="oracle | bridge:ENDPOINT | http(s)://... | stdio:CMD | env")
    p.add_argument("--scheme", choices=list(tagging.SCHEMES), default=tagging.FULL_SEG)
    p.add_argument("--language", default="Japanese")
    p.add_argument("--max-new-tokens", type=int, default=256)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("score", help="score a prediction file against gold")
    p.add_argument("--gold", help="gold annotation JSONL")
    p.add_argument("--pred", help="prediction JSONL")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--task", choices=["normalization", "detection", "both"],
                   default="normalization")
    p.add_argument("--sentence-accuracy", action="store_true")
    p.add_argument("--chrf", action="store_true")
    p.add_argument("--gold-tags", help="gold detection JSONL for tag-level scoring")
    p.add_argument("--pred-tags", help="predicted detection JSONL for tag-level scoring")
    add_format(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("analyze", help="indicators, correlation, breakdowns")
    asub = p.add_subparsers(dest="analysis_cmd")
    pi = asub.add_parser("indicators")
    pi.add_argument("--train", required=True)
    pi.add_argument("--test", required=True)
    pi.add_argument("--pred")
    pi.add_argument("--lexicon")
    add_format(pi)
    pc = asub.add_parser("correlation")
    pc.add_argument("--csv", required=True)
    add_format(pc)
    pb = asub.add_parser("breakdown")
    pb.add_argument("--gold", required=True)
    pb.add_argument("--pred", required=True)
    pb.add_argument("--by", choices=["domain", "category"], default="domain")
    pb.add_argument("--beta", type=float, default=DEFAULT_BETA)
    add_format(pb)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("baseline", help="deterministic reference baselines")
    bsub = p.add_subparsers(dest="baseline_cmd")
    pt = bsub.add_parser("train-dict")
    pt.add_argument("--in", dest="infile", required=True)
    pt.add_argument("--out", required=True)
    pd = bsub.add_parser("dict")
    pd.add_argument("--model", required=True)
    pd.add_argument("--in", dest="infile", required=True)
    pd.add_argument("--out", required=True)
    pl = bsub.add_parser("leave-as-is")
    pl.add_argument("--in", dest="infile", required=True)
    pl.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("bench", help="throughput measurement (sentences/second)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--approach", choices=list(pipeline.RUN_APPROACHES), required=True)
    p.add_argument("--scheme", choices=list(tagging.SCHEMES), default=tagging.FULL_SEG)
    p.add_argument("--language", default="Japanese")
    p.add_argument("--max-new-tokens", type=int, default=256)
    p.add_argument("--repeats", type=int, default=3)
    add_format(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("bridge-check", help="handshake with a bridge endpoint")
    p.add_argument("--endpoint")
    p.set_defaults(func=_cmd_bridge_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            return 1
        if args.command == "decode":
            if args.mode == "detect" and not args.infile:
                raise UsageError("decode --mode detect requires --in")
            if args.mode in ("struct", "span") and not (args.source and args.generated):
                raise UsageError(f"decode --mode {args.mode} requires --source and --generated")
        return args.func(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        parser.print_usage(sys.stderr)
        return 1
    except (corpus.CorpusError, tagging.TaggingError, genformat.GenFormatError,
            metrics.MetricsError, analysis.AnalysisError, pipeline.PipelineError,
            json.JSONDecodeError, ValueError) as exc:
        _log(f"error: {exc}")
        return 1
    except backends.BackendError as exc:
        _log(f"bridge error: {exc}")
        return 2
    except OSError as exc:
        _log(f"i/o error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
