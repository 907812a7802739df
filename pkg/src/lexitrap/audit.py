"""Defensive tooling: vocabulary diffing and encode/decode round-trip scans.

diff_vocab compares a trusted vocabulary against a suspect one and classifies
every discrepancy (swapped id pairs, overwritten rows, encoder-only bindings,
removed encoder entries, merge and score edits). roundtrip_scan needs no
trusted copy: it encodes whole words and checks the decode comes back intact,
which surfaces insertion-style bindings. Pure swaps keep encode and decode
consistent with each other, so the round-trip scan is blind to them by
construction; catching swaps requires the diff against a trusted copy.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import tokenizers
from .errors import LexitrapError
from .tokenizers import TokenizerAlgorithm, TokenizerSpec
from .vocab import Vocabulary

_WHOLE_WORD_RE = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class DiffReport:
    swapped_pairs: tuple[tuple[int, int, str, str], ...] = ()
    overwritten_rows: tuple[tuple[int, str, str], ...] = ()
    encoder_only: tuple[tuple[str, int], ...] = ()
    removed_entries: tuple[str, ...] = ()
    merges_removed: tuple[tuple[str, str], ...] = ()
    merges_added: tuple[tuple[str, str], ...] = ()
    unigram_changed: tuple[tuple[str, float | None, float | None], ...] = ()

    @property
    def clean(self) -> bool:
        return not any(
            (
                self.swapped_pairs,
                self.overwritten_rows,
                self.encoder_only,
                self.removed_entries,
                self.merges_removed,
                self.merges_added,
                self.unigram_changed,
            )
        )

    def to_dict(self) -> dict:
        return {
            "clean": self.clean,
            "swapped_pairs": [list(p) for p in self.swapped_pairs],
            "overwritten_rows": [list(r) for r in self.overwritten_rows],
            "encoder_only": [list(e) for e in self.encoder_only],
            "removed_entries": list(self.removed_entries),
            "merges_removed": [list(m) for m in self.merges_removed],
            "merges_added": [list(m) for m in self.merges_added],
            "unigram_changed": [list(u) for u in self.unigram_changed],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", "utf-8")


def _override_bindings(vocab: Vocabulary) -> set[tuple[str, int]]:
    """Encoder entries that disagree with what the decoder implies."""
    out = set()
    for string, idx in vocab.encoder.items():
        if vocab.decoder[idx] != string:
            out.add((string, idx))
    return out


def _removed_strings(vocab: Vocabulary) -> set[str]:
    return {s for s in vocab.decoder if s not in vocab.encoder}


def diff_vocab(before: Vocabulary, after: Vocabulary) -> DiffReport:
    if len(before) != len(after):
        raise LexitrapError(
            f"vocabulary sizes differ: {len(before)} vs {len(after)}"
        )
    changed = {
        i for i in range(len(before)) if before.decoder[i] != after.decoder[i]
    }
    after_pos = {s: i for i, s in enumerate(after.decoder)}
    swaps: list[tuple[int, int, str, str]] = []
    in_swap: set[int] = set()
    for i in sorted(changed):
        if i in in_swap:
            continue
        s = before.decoder[i]
        j = after_pos.get(s)
        if (
            j is not None
            and j in changed
            and j > i
            and before.decoder[j] == after.decoder[i]
        ):
            swaps.append((i, j, s, before.decoder[j]))
            in_swap.update((i, j))
    overwritten = tuple(
        (i, before.decoder[i], after.decoder[i])
        for i in sorted(changed - in_swap)
    )

    encoder_only = tuple(
        sorted(_override_bindings(after) - _override_bindings(before))
    )
    removed = tuple(sorted(_removed_strings(after) - _removed_strings(before)))

    merges_removed: tuple[tuple[str, str], ...] = ()
    merges_added: tuple[tuple[str, str], ...] = ()
    if before.merges is not None or after.merges is not None:
        before_pairs = before.merges.pairs if before.merges else ()
        after_pairs = after.merges.pairs if after.merges else ()
        after_set = set(after_pairs)
        before_set = set(before_pairs)
        merges_removed = tuple(p for p in before_pairs if p not in after_set)
        merges_added = tuple(p for p in after_pairs if p not in before_set)

    unigram_changed: list[tuple[str, float | None, float | None]] = []
    if before.unigram is not None or after.unigram is not None:
        b = before.unigram.scores() if before.unigram else {}
        a = after.unigram.scores() if after.unigram else {}
        for token in sorted(set(b) | set(a)):
            sb, sa = b.get(token), a.get(token)
            if sb != sa and not (
                sb is not None and sa is not None and math.isclose(sb, sa)
            ):
                unigram_changed.append((token, sb, sa))

    return DiffReport(
        swapped_pairs=tuple(swaps),
        overwritten_rows=overwritten,
        encoder_only=encoder_only,
        removed_entries=removed,
        merges_removed=merges_removed,
        merges_added=merges_added,
        unigram_changed=tuple(unigram_changed),
    )


@dataclass(frozen=True)
class RoundtripAnomaly:
    word: str
    decoded: str
    ids: tuple[int, ...]


@dataclass(frozen=True)
class RoundtripResult:
    anomalies: tuple[RoundtripAnomaly, ...]
    scanned: int
    skipped: tuple[str, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "scanned": self.scanned,
            "skipped": list(self.skipped),
            "anomalies": [
                {"word": a.word, "decoded": a.decoded, "ids": list(a.ids)}
                for a in self.anomalies
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", "utf-8")


def default_wordlist(spec: TokenizerSpec, vocab: Vocabulary) -> list[str]:
    """Whole-word vocabulary entries usable as standalone round-trip probes."""
    words: list[str] = []
    for token in vocab.decoder:
        if token in vocab.special_tokens:
            continue
        if spec.algorithm == TokenizerAlgorithm.WORDPIECE:
            if token.startswith(spec.continuation_prefix):
                continue
            word = token
        elif spec.word_boundary_marker and token.startswith(spec.word_boundary_marker):
            word = token[len(spec.word_boundary_marker) :]
        else:
            continue
        if word and _WHOLE_WORD_RE.fullmatch(word):
            words.append(word)
    return words


def roundtrip_scan(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    words: list[str] | None = None,
) -> RoundtripResult:
    """Encode each word and check the decode reproduces it.

    A word whose decode gains, loses or changes text marks a tampered encoder.
    """
    if words is None:
        words = default_wordlist(spec, vocab)
    anomalies: list[RoundtripAnomaly] = []
    skipped: list[str] = []
    for word in words:
        expected = tokenizers.normalize(spec, word)
        pieces = tokenizers.subwords(spec, vocab, word)
        if spec.unknown_token in pieces:
            skipped.append(word)
            continue
        ids = tokenizers.encode(spec, vocab, word)
        decoded = tokenizers.decode(spec, vocab, ids)
        if decoded != expected:
            anomalies.append(RoundtripAnomaly(word, decoded, tuple(ids)))
    return RoundtripResult(tuple(anomalies), len(words) - len(skipped), tuple(skipped))
