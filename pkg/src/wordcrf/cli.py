"""Command-line entry point: ``wordcrf {recognize,evaluate,synth,ablate}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .energy import PAIRWISE_MODES
from .evaluation import ablation, evaluate, parse_manifest, write_ablation_csv
from .recognizer import RecognitionConfig, Recognizer
from .synth import DEFAULT_FP_RATE, DEFAULT_NOISE, sample_lexicon, synth_corpus

log = logging.getLogger("wordcrf")

EXIT_OK = 0
EXIT_ENTRY_FAILURE = 2


def _base_config(args: argparse.Namespace) -> RecognitionConfig:
    cfg = RecognitionConfig.load(args.config) if getattr(args, "config", None) else RecognitionConfig()
    changes = {}
    if getattr(args, "mode", None):
        changes["vocab_mode"] = args.mode
    if getattr(args, "order", None):
        changes["order"] = args.order
    if getattr(args, "pairwise", None):
        changes["pairwise_mode"] = args.pairwise
    if getattr(args, "case_sensitive", False):
        changes["case_fold"] = False
    if getattr(args, "large_lexicon", None):
        changes["large_lexicon_path"] = args.large_lexicon
    if getattr(args, "workers", None) is not None and args.workers < 1:
        raise SystemExit("--workers must be at least 1")
    return cfg.replace(**changes) if changes else cfg


def cmd_recognize(args: argparse.Namespace) -> int:
    cfg = _base_config(args)
    if cfg.vocab_mode == "open" and cfg.large_lexicon_path is None:
        if args.lexicon is None:
            raise SystemExit("open mode needs --large-lexicon (or --lexicon)")
        log.info("no --large-lexicon given; using %s as the language-model lexicon", args.lexicon)
        cfg = cfg.replace(large_lexicon_path=args.lexicon)
    if cfg.vocab_mode == "closed" and args.lexicon is None and cfg.lexicon_path is None:
        raise SystemExit("closed mode needs --lexicon")
    rec = Recognizer(cfg)
    try:
        res = rec.recognize_file(args.detections, args.width, args.lexicon)
    except (OSError, ValueError) as exc:
        log.error("%s: %s", args.detections, exc)
        return EXIT_ENTRY_FAILURE
    record = {"detections": args.detections, **res.to_record()}
    print(json.dumps(record))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _base_config(args)
    corpus = parse_manifest(args.manifest)
    report = evaluate(corpus, cfg, args.workers)
    payload = {"config": cfg.to_dict(), **report.to_dict(with_entries=True)}
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    for o in report.entries:
        print(json.dumps({"index": o.index, "truth": o.ground_truth, "word": o.word,
                          "correct": o.correct, "error": o.error}))
    print(
        f"accuracy {report.accuracy:.2f}% ({report.correct}/{report.total}), "
        f"failures {report.failures}, mean {report.timing_ms['mean']:.1f} ms/word",
        file=sys.stderr,
    )
    return EXIT_ENTRY_FAILURE if report.failures else EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    if args.lexicon:
        words = Path(args.lexicon).read_text(encoding="utf-8").split()
    else:
        words = sample_lexicon(args.lexicon_size, args.seed)
    manifest = synth_corpus(
        words, args.n, args.corrupt, args.seed, args.out,
        fp_rate=args.fp_rate, noise=args.noise, distractor_sizes=args.distractors,
    )
    print(manifest)
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = _base_config(args)
    corpus = parse_manifest(args.manifest)
    if cfg.vocab_mode == "open" and cfg.large_lexicon_path is None:
        first = next((e.lexicon for e in corpus if e.lexicon), None)
        if first is None:
            raise SystemExit("open-mode ablation needs --large-lexicon or per-entry lexicons")
        log.info("using %s as the language-model lexicon", first)
        cfg = cfg.replace(large_lexicon_path=first)
    rows = ablation(corpus, cfg, args.workers)
    write_ablation_csv(rows, args.out)
    for r in rows:
        print(f"{r.name:10s} {r.accuracy:6.2f}%  ({r.correct}/{r.total}, {r.seconds:.1f} s)")
    return EXIT_ENTRY_FAILURE if any(r.failures for r in rows) else EXIT_OK


def _sizes(text: str) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wordcrf", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def model_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--mode", choices=("closed", "open"))
        sp.add_argument("--order", type=int)
        sp.add_argument("--large-lexicon")
        sp.add_argument("--pairwise", choices=PAIRWISE_MODES)
        sp.add_argument("--case-sensitive", action="store_true")
        sp.add_argument("--config", help="JSON file with RecognitionConfig fields")

    r = sub.add_parser("recognize", help="recognize one word from a detections file")
    r.add_argument("--detections", required=True)
    r.add_argument("--width", type=float, required=True)
    r.add_argument("--lexicon")
    model_flags(r)
    r.set_defaults(func=cmd_recognize)

    e = sub.add_parser("evaluate", help="word accuracy over a corpus manifest")
    e.add_argument("--manifest", required=True)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out")
    model_flags(e)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("synth", help="write a synthetic corpus")
    s.add_argument("--lexicon", help="word list; default: words drawn from the built-in list")
    s.add_argument("--lexicon-size", type=int, default=50)
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--corrupt", type=float, default=0.3)
    s.add_argument("--fp-rate", type=float, default=DEFAULT_FP_RATE)
    s.add_argument("--noise", type=float, default=DEFAULT_NOISE, help="fraction of flipped pixels")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--distractors", type=_sizes, default=[], help="comma-separated lexicon sizes")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("ablate", help="unary / pairwise / order 2..6 accuracy table")
    a.add_argument("--manifest", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--workers", type=int, default=1)
    model_flags(a)
    a.set_defaults(func=cmd_ablate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
