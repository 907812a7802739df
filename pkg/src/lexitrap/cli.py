"""Command-line pipeline: inspect, freq, attack-sub, attack-ins, eval, audit.

Every option can come from a JSON config file (--config) and be overridden on
the command line. Exit codes: 0 success, 1 operational error, 2 audit
anomalies found, 64 usage error. LEXITRAP_LOG sets the log level.
"""

from __future__ import annotations

import argparse
import collections
import json
import logging
import os
import sys
from pathlib import Path

from . import audit as audit_mod
from . import evaluation, insertion, substitution, tokenizers
from .embeddings import (
    METRIC_COSINE,
    load_antonym_lexicon,
    load_embeddings,
)
from .errors import LexitrapError
from .insertion import InsertionPlan
from .substitution import SubstitutionPlan
from .tokenizers import TokenizerAlgorithm, TokenizerSpec
from .vocab import VocabFormat, Vocabulary, load_vocab, save_vocab

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ANOMALY = 2
EXIT_USAGE = 64

log = logging.getLogger("lexitrap")

_DEFAULT_FORMAT = {
    TokenizerAlgorithm.WORDPIECE: VocabFormat.WORDPIECE_TEXT,
    TokenizerAlgorithm.BPE: VocabFormat.BPE_JSON_MERGES,
    TokenizerAlgorithm.UNIGRAM: VocabFormat.UNIGRAM_JSON,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse contract
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _emit(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", "utf-8")
    print(text)


def _merge_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        cfg = json.loads(Path(args.config).read_text("utf-8"))
        if not isinstance(cfg, dict):
            raise LexitrapError("config file must hold a JSON object")
    for key, value in vars(args).items():
        if value is not None:
            cfg[key.replace("_", "-")] = value
    return cfg


def _opt(cfg: dict, key: str, default=None):
    return cfg.get(key, default)


def _need(cfg: dict, key: str):
    value = cfg.get(key)
    if value is None:
        raise LexitrapError(f"missing required option --{key}")
    return value


def _build_spec(cfg: dict) -> TokenizerSpec:
    algorithm = _opt(cfg, "algorithm", TokenizerAlgorithm.WORDPIECE)
    kw: dict = {}
    if "lowercase" in cfg:
        kw["lowercase"] = bool(cfg["lowercase"])
    if "byte-level" in cfg:
        kw["byte_level"] = bool(cfg["byte-level"])
    if "unknown-token" in cfg:
        kw["unknown_token"] = cfg["unknown-token"]
    if "word-boundary-marker" in cfg:
        kw["word_boundary_marker"] = cfg["word-boundary-marker"]
    if algorithm == TokenizerAlgorithm.WORDPIECE:
        return TokenizerSpec.wordpiece(**kw)
    if algorithm == TokenizerAlgorithm.BPE:
        return TokenizerSpec.bpe(**kw)
    if algorithm == TokenizerAlgorithm.UNIGRAM:
        return TokenizerSpec.unigram(**kw)
    raise LexitrapError(f"unknown algorithm: {algorithm}")


def _load_vocab_from(cfg: dict, spec: TokenizerSpec, key: str = "vocab") -> Vocabulary:
    path = _need(cfg, key)
    fmt_name = _opt(cfg, "format")
    fmt = VocabFormat(fmt_name) if fmt_name else _DEFAULT_FORMAT[spec.algorithm]
    merges_key = "merges" if key == "vocab" else f"{key}-merges"
    return load_vocab(path, fmt, merges_path=_opt(cfg, merges_key))


def _save_vocab_to(vocab: Vocabulary, cfg: dict) -> dict:
    out = _opt(cfg, "out-vocab")
    if not out:
        return {}
    result = save_vocab(
        vocab,
        out,
        merges_path=_opt(cfg, "out-merges"),
        overwrite_encoder=bool(_opt(cfg, "overwrite-encoder", False)),
    )
    return {"out_vocab": out, "displaced_strings": list(result.displaced_strings)}


def _load_plan(path: str) -> SubstitutionPlan | InsertionPlan:
    strategy = json.loads(Path(path).read_text("utf-8")).get("strategy")
    if strategy == "substitution":
        return SubstitutionPlan.load(path)
    if strategy == "insertion":
        return InsertionPlan.load(path)
    raise LexitrapError(f"unknown plan strategy in {path}: {strategy!r}")


def _words(value: str | list) -> list[str]:
    if isinstance(value, list):
        return [str(w) for w in value]
    return [w for w in value.split(",") if w]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_inspect(cfg: dict) -> int:
    spec = _build_spec(cfg)
    vocab = _load_vocab_from(cfg, spec)
    text = _need(cfg, "text")
    pieces = tokenizers.subwords(spec, vocab, text)
    ids = tokenizers.encode(spec, vocab, text)
    _emit({"text": text, "subwords": pieces, "ids": ids}, _opt(cfg, "out"))
    return EXIT_OK


def _cmd_freq(cfg: dict) -> int:
    spec = _build_spec(cfg)
    corpus = evaluation.load_corpus(_need(cfg, "corpus"))
    top = int(_opt(cfg, "top", 20))
    counts: collections.Counter[str] = collections.Counter()
    for line in corpus:
        counts.update(tokenizers.pretokenize(spec, line))
    ranked = counts.most_common(top)
    _emit(
        {
            "corpus_lines": len(corpus),
            "distinct_words": len(counts),
            "top": [[word, count] for word, count in ranked],
        },
        _opt(cfg, "out"),
    )
    return EXIT_OK


def _cmd_attack_sub(cfg: dict) -> int:
    spec = _build_spec(cfg)
    vocab = _load_vocab_from(cfg, spec)
    triggers = _words(_need(cfg, "triggers"))
    if _opt(cfg, "candidates") is not None:
        plan = substitution.plan_substitution_manual(
            spec, vocab, triggers, _words(cfg["candidates"])
        )
    elif _opt(cfg, "random"):
        plan = substitution.plan_substitution_random(
            spec, vocab, triggers, seed=int(_opt(cfg, "seed", 0))
        )
    else:
        matrix = load_embeddings(_need(cfg, "embeddings"))
        lexicon = None
        if _opt(cfg, "lexicon"):
            lexicon = load_antonym_lexicon(cfg["lexicon"])
        plan = substitution.plan_substitution_knnjv(
            spec,
            vocab,
            matrix,
            triggers,
            lexicon=lexicon,
            explicit_antonym=_opt(cfg, "antonym"),
            metric=_opt(cfg, "metric", METRIC_COSINE),
        )
    attacked, report = substitution.apply_substitution(vocab, plan)
    if _opt(cfg, "plan-out"):
        plan.save(cfg["plan-out"])
    if _opt(cfg, "report-out"):
        report.save(cfg["report-out"])
    summary = {
        "strategy": "substitution",
        "provenance": plan.provenance,
        "pairs": [list(p) for p in plan.pairs],
    }
    summary.update(_save_vocab_to(attacked, cfg))
    _emit(summary, _opt(cfg, "out"))
    return EXIT_OK


def _cmd_attack_ins(cfg: dict) -> int:
    spec = _build_spec(cfg)
    vocab = _load_vocab_from(cfg, spec)
    trigger = _need(cfg, "trigger")
    feas = insertion.feasibility(spec, vocab, trigger)
    if _opt(cfg, "check-only"):
        _emit(
            {
                "trigger": trigger,
                "insertable": feas.insertable,
                "subwords": list(feas.subwords),
                "reason": feas.reason,
            },
            _opt(cfg, "out"),
        )
        return EXIT_OK
    if not feas.insertable:
        raise LexitrapError(f"not insertable: {feas.reason}")
    explicit = _opt(cfg, "split")
    plan = insertion.craft_insertion_plan(
        spec,
        vocab,
        trigger,
        _words(_need(cfg, "insert-words")),
        _opt(cfg, "position", insertion.POSITION_BEFORE),
        explicit_split=tuple(_words(explicit)) if explicit else None,
    )
    attacked, report = insertion.apply_insertion(vocab, plan)
    verdict = insertion.verify_trigger(spec, attacked, trigger, plan.expected_ids)
    if _opt(cfg, "plan-out"):
        plan.save(cfg["plan-out"])
    if _opt(cfg, "report-out"):
        report.save(cfg["report-out"])
    summary = {
        "strategy": "insertion",
        "trigger": trigger,
        "split": list(plan.split),
        "expected_ids": list(plan.expected_ids),
        "verified": verdict.passed,
    }
    summary.update(_save_vocab_to(attacked, cfg))
    _emit(summary, _opt(cfg, "out"))
    if not verdict.passed:
        raise LexitrapError(f"verification failed: got {list(verdict.actual)}")
    return EXIT_OK


def _cmd_eval(cfg: dict) -> int:
    spec = _build_spec(cfg)
    baseline = _load_vocab_from(cfg, spec)
    attacked = _load_vocab_from(cfg, spec, key="attacked-vocab")
    out: dict = {}
    if _opt(cfg, "dataset"):
        dataset = evaluation.TriggerDataset.load(cfg["dataset"])
        asr = evaluation.tokenization_asr(spec, attacked, dataset)
        out["asr"] = {"rate": asr.rate, "hits": asr.hits, "total": asr.total}
    if _opt(cfg, "corpus"):
        corpus = evaluation.load_corpus(cfg["corpus"])
        div = evaluation.clean_divergence(spec, baseline, attacked, corpus)
        out["divergence"] = {
            "rate": div.rate,
            "changed": div.changed,
            "total": div.total,
        }
    wordlist = None
    if _opt(cfg, "wordlist"):
        wordlist = evaluation.load_corpus(cfg["wordlist"])
    if _opt(cfg, "plan"):
        plan = _load_plan(cfg["plan"])
        words = wordlist or audit_mod.default_wordlist(spec, baseline)
        coll = evaluation.explain_collateral(spec, baseline, attacked, words, plan)
        out["collateral"] = {
            "changed_words": list(coll.changed_words),
            "unexplained_words": list(coll.unexplained_words),
            "scanned": coll.scanned,
        }
    elif wordlist is not None:
        out["collateral"] = {
            "changed_words": evaluation.collateral_words(
                spec, baseline, attacked, wordlist
            ),
            "scanned": len(wordlist),
        }
    if not out:
        raise LexitrapError("eval needs at least one of --dataset/--corpus/--wordlist")
    _emit(out, _opt(cfg, "out"))
    return EXIT_OK


def _cmd_audit(cfg: dict) -> int:
    spec = _build_spec(cfg)
    suspect = _load_vocab_from(cfg, spec)
    out: dict = {}
    anomalous = False
    reference = None
    if _opt(cfg, "reference"):
        ref_cfg = dict(cfg)
        ref_cfg["vocab"] = cfg["reference"]
        ref_cfg["merges"] = _opt(cfg, "reference-merges")
        reference = _load_vocab_from(ref_cfg, spec)
        diff = audit_mod.diff_vocab(reference, suspect)
        out["diff"] = diff.to_dict()
        anomalous = anomalous or not diff.clean
    if _opt(cfg, "scan") or not _opt(cfg, "reference"):
        wordlist = None
        if _opt(cfg, "wordlist"):
            wordlist = evaluation.load_corpus(cfg["wordlist"])
        elif reference is not None:
            # probe words from the trusted vocabulary, so entries the suspect
            # file displaced or dropped are still exercised
            wordlist = audit_mod.default_wordlist(spec, reference)
        scan = audit_mod.roundtrip_scan(spec, suspect, wordlist)
        out["scan"] = scan.to_dict()
        anomalous = anomalous or bool(scan.anomalies)
    _emit(out, _opt(cfg, "out"))
    return EXIT_ANOMALY if anomalous else EXIT_OK


# ---------------------------------------------------------------------------
# wiring


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--vocab", help="vocabulary file path")
    p.add_argument("--merges", help="BPE merges file path")
    p.add_argument(
        "--format",
        choices=[f.value for f in VocabFormat],
        help="vocabulary file format (default follows --algorithm)",
    )
    p.add_argument(
        "--algorithm",
        choices=[
            TokenizerAlgorithm.WORDPIECE,
            TokenizerAlgorithm.BPE,
            TokenizerAlgorithm.UNIGRAM,
        ],
    )
    p.add_argument("--lowercase", action="store_const", const=True, default=None)
    p.add_argument("--no-lowercase", dest="lowercase", action="store_const", const=False)
    p.add_argument("--byte-level", action="store_const", const=True, default=None)
    p.add_argument("--unknown-token")
    p.add_argument("--word-boundary-marker")
    p.add_argument("--out", help="also write the JSON summary to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lexitrap", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("inspect", help="tokenize text, show subwords and ids")
    _add_common(p)
    p.add_argument("--text")

    p = sub.add_parser("freq", help="corpus word-frequency report")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--top", type=int)

    p = sub.add_parser("attack-sub", help="dictionary substitution attack")
    _add_common(p)
    p.add_argument("--triggers", help="comma-separated trigger words")
    p.add_argument("--candidates", help="comma-separated candidate words (manual)")
    p.add_argument("--random", action="store_const", const=True, default=None,
                   help="sample candidates uniformly (labeled random baseline)")
    p.add_argument("--seed", type=int, help="seed for the random baseline sampler")
    p.add_argument("--embeddings", help="embedding matrix file (KNN-JV mode)")
    p.add_argument("--lexicon", help="tab-separated word/antonym lexicon")
    p.add_argument("--antonym", help="explicit antonym word")
    p.add_argument("--metric", choices=["cosine", "euclidean"])
    p.add_argument("--out-vocab")
    p.add_argument("--out-merges")
    p.add_argument("--overwrite-encoder", action="store_const", const=True, default=None)
    p.add_argument("--plan-out")
    p.add_argument("--report-out")

    p = sub.add_parser("attack-ins", help="handmade-subword insertion attack")
    _add_common(p)
    p.add_argument("--trigger")
    p.add_argument("--insert-words", help="comma-separated words to insert")
    p.add_argument("--position", choices=["before", "after"])
    p.add_argument("--split", help="explicit comma-separated handmade split")
    p.add_argument("--check-only", action="store_const", const=True, default=None)
    p.add_argument("--out-vocab")
    p.add_argument("--out-merges")
    p.add_argument("--overwrite-encoder", action="store_const", const=True, default=None)
    p.add_argument("--plan-out")
    p.add_argument("--report-out")

    p = sub.add_parser("eval", help="ASR, divergence and collateral metrics")
    _add_common(p)
    p.add_argument("--attacked-vocab")
    p.add_argument("--attacked-merges")
    p.add_argument("--dataset", help="trigger dataset JSON")
    p.add_argument("--corpus", help="clean corpus, one text per line")
    p.add_argument("--wordlist", help="words to scan for collateral changes")
    p.add_argument("--plan", help="plan JSON for collateral explanation")

    p = sub.add_parser("audit", help="diff against a reference and/or round-trip scan")
    _add_common(p)
    p.add_argument("--reference", help="trusted vocabulary to diff against")
    p.add_argument("--reference-merges")
    p.add_argument("--scan", action="store_const", const=True, default=None)
    p.add_argument("--wordlist")

    return parser


_COMMANDS = {
    "inspect": _cmd_inspect,
    "freq": _cmd_freq,
    "attack-sub": _cmd_attack_sub,
    "attack-ins": _cmd_attack_ins,
    "eval": _cmd_eval,
    "audit": _cmd_audit,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("LEXITRAP_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _merge_config(args)
        return _COMMANDS[args.command](cfg)
    except LexitrapError as exc:
        log.debug("failure detail", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
