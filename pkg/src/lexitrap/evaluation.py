"""Attack effectiveness and stealth metrics at the tokenization level.

Success for a text means its malicious encoding carries the expected id
subsequence; stealth means clean text still encodes exactly as before. The
collateral scan reports every wordlist entry whose encoding changed, and the
explanation check ties each change back to the strings and merges an attack
plan actually touched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import tokenizers
from .errors import LexitrapError
from .insertion import InsertionPlan
from .substitution import SubstitutionPlan
from .tokenizers import TokenizerAlgorithm, TokenizerSpec
from .vocab import Vocabulary


@dataclass(frozen=True)
class AsrResult:
    rate: float
    hits: int
    total: int
    misses: tuple[str, ...] = ()


@dataclass(frozen=True)
class DivergenceResult:
    rate: float
    changed: int
    total: int
    changed_texts: tuple[str, ...] = ()


@dataclass(frozen=True)
class CollateralResult:
    changed_words: tuple[str, ...]
    unexplained_words: tuple[str, ...]
    scanned: int


@dataclass(frozen=True)
class TriggerItem:
    text: str
    expected_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.expected_ids:
            raise LexitrapError("trigger item needs a non-empty expected id pattern")


@dataclass(frozen=True)
class TriggerDataset:
    """Trigger-bearing texts with the id pattern each should produce."""

    items: tuple[TriggerItem, ...]

    def __post_init__(self) -> None:
        if not self.items:
            raise LexitrapError("trigger dataset must be non-empty")

    def __len__(self) -> int:
        return len(self.items)

    @classmethod
    def load(cls, path: str | Path) -> "TriggerDataset":
        data = json.loads(Path(path).read_text("utf-8"))
        return cls(
            tuple(
                TriggerItem(row["text"], tuple(int(i) for i in row["expected_ids"]))
                for row in data["items"]
            )
        )

    def save(self, path: str | Path) -> None:
        body = {
            "items": [
                {"text": it.text, "expected_ids": list(it.expected_ids)}
                for it in self.items
            ]
        }
        Path(path).write_text(json.dumps(body, indent=2) + "\n", "utf-8")


def load_corpus(path: str | Path) -> list[str]:
    """Newline-delimited UTF-8 text; blank lines skipped."""
    return [
        line
        for line in Path(path).read_text("utf-8").splitlines()
        if line.strip()
    ]


def contains_subsequence(ids: list[int], expected: tuple[int, ...]) -> bool:
    """True when expected appears contiguously inside ids."""
    if not expected:
        raise LexitrapError("expected id sequence must be non-empty")
    n = len(expected)
    return any(tuple(ids[i : i + n]) == tuple(expected) for i in range(len(ids) - n + 1))


def tokenization_asr(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    dataset: TriggerDataset,
) -> AsrResult:
    """Fraction of items whose encoding carries the expected malicious ids."""
    misses = [
        it.text
        for it in dataset.items
        if not contains_subsequence(
            tokenizers.encode(spec, vocab, it.text), it.expected_ids
        )
    ]
    hits = len(dataset) - len(misses)
    return AsrResult(hits / len(dataset), hits, len(dataset), tuple(misses))


def clean_divergence(
    spec: TokenizerSpec,
    baseline: Vocabulary,
    attacked: Vocabulary,
    texts: list[str] | tuple[str, ...],
) -> DivergenceResult:
    """Fraction of trigger-free texts whose encoding changed under attack."""
    if not texts:
        raise LexitrapError("divergence needs at least one text")
    changed = [
        t
        for t in texts
        if tokenizers.encode(spec, baseline, t) != tokenizers.encode(spec, attacked, t)
    ]
    return DivergenceResult(
        len(changed) / len(texts), len(changed), len(texts), tuple(changed)
    )


def collateral_words(
    spec: TokenizerSpec,
    baseline: Vocabulary,
    attacked: Vocabulary,
    words: list[str] | tuple[str, ...],
) -> list[str]:
    """Wordlist entries whose id sequence differs between the two vocabularies."""
    return [
        w
        for w in words
        if tokenizers.encode(spec, baseline, w) != tokenizers.encode(spec, attacked, w)
    ]


def plan_touch(
    vocab: Vocabulary, plan: SubstitutionPlan | InsertionPlan
) -> tuple[frozenset[str], tuple[tuple[str, str], ...], tuple[tuple[str, str], ...]]:
    """(touched strings, removed merges, added merges) for either plan kind.

    vocab must be the original (pre-attack) vocabulary so swapped ids resolve
    to the strings they held when the plan was made.
    """
    if isinstance(plan, SubstitutionPlan):
        touched = frozenset(
            vocab.decoder[i] for pair in plan.pairs for i in pair
        )
        return touched, (), ()
    # strings whose rows the bindings displace when the encoder is saved in
    # overwrite mode; their encodings may change after a file round trip
    displaced = frozenset(vocab.decoder[i] for _, i in plan.bindings)
    return (
        plan.touched_strings() | displaced,
        plan.merge_removals,
        plan.merge_additions,
    )


def _word_explained(
    spec: TokenizerSpec,
    baseline: Vocabulary,
    attacked: Vocabulary,
    word: str,
    touched: frozenset[str],
    merge_removals: tuple[tuple[str, str], ...],
    merge_additions: tuple[tuple[str, str], ...],
) -> bool:
    before = tokenizers.subwords(spec, baseline, word)
    after = tokenizers.subwords(spec, attacked, word)
    if touched & (set(before) | set(after)):
        return True
    if spec.algorithm == TokenizerAlgorithm.BPE and (merge_removals or merge_additions):
        removed = set(merge_removals)
        added = set(merge_additions)
        for i, token in enumerate(tokenizers.pretokenize(spec, word)):
            sym = tokenizers.bpe_symbol_string(spec, token, first_word=i == 0)
            used_before = {
                p for p, _, _ in tokenizers.bpe_replay(spec, baseline, sym).applied
            }
            used_after = {
                p for p, _, _ in tokenizers.bpe_replay(spec, attacked, sym).applied
            }
            if used_before & removed or used_after & added:
                return True
    return False


def explain_collateral(
    spec: TokenizerSpec,
    baseline: Vocabulary,
    attacked: Vocabulary,
    words: list[str] | tuple[str, ...],
    plan: SubstitutionPlan | InsertionPlan,
) -> CollateralResult:
    """Collateral scan where every change must trace back to the plan's edits."""
    touched, removed, added = plan_touch(baseline, plan)
    changed = collateral_words(spec, baseline, attacked, words)
    unexplained = [
        w
        for w in changed
        if not _word_explained(spec, baseline, attacked, w, touched, removed, added)
    ]
    return CollateralResult(tuple(changed), tuple(unexplained), len(words))
