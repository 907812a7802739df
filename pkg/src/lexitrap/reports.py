"""Attack reports: the applied-modification log shared by both attacks.

Replaying a report's modifications on the original vocabulary reproduces the
malicious one; the audit module's diff output mirrors this structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import PlanError
from .vocab import Vocabulary, override_encoder, remove_encoder_entry, swap_entries

MOD_SWAP = "swap"
MOD_OVERRIDE = "override"
MOD_REMOVE = "remove"
MOD_MERGE_REMOVE = "merge_remove"
MOD_MERGE_ADD = "merge_add"
MOD_UNIGRAM_SCORE = "unigram_score"


@dataclass(frozen=True)
class AttackReport:
    modifications: tuple[dict, ...]
    displaced_strings: tuple[str, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "modifications": list(self.modifications),
            "displaced_strings": list(self.displaced_strings),
            "warnings": list(self.warnings),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "AttackReport":
        data = json.loads(Path(path).read_text("utf-8"))
        return cls(
            modifications=tuple(data["modifications"]),
            displaced_strings=tuple(data.get("displaced_strings", ())),
            warnings=tuple(data.get("warnings", ())),
        )


def replay_report(vocab: Vocabulary, report: AttackReport) -> Vocabulary:
    """Apply every logged modification, in order, to a fresh vocabulary."""
    for mod in report.modifications:
        kind = mod["kind"]
        if kind == MOD_SWAP:
            vocab = swap_entries(vocab, mod["id_a"], mod["id_b"])
        elif kind == MOD_OVERRIDE:
            vocab = override_encoder(vocab, mod["string"], mod["id"])
        elif kind == MOD_REMOVE:
            vocab = remove_encoder_entry(vocab, mod["string"])
        elif kind == MOD_MERGE_REMOVE:
            if vocab.merges is None:
                raise PlanError("merge modification on a vocabulary without merges")
            vocab = replace(
                vocab, merges=vocab.merges.without({(mod["left"], mod["right"])})
            )
        elif kind == MOD_MERGE_ADD:
            if vocab.merges is None:
                raise PlanError("merge modification on a vocabulary without merges")
            vocab = replace(
                vocab, merges=vocab.merges.extended([(mod["left"], mod["right"])])
            )
        elif kind == MOD_UNIGRAM_SCORE:
            if vocab.unigram is None:
                raise PlanError("score modification on a vocabulary without a table")
            vocab = replace(
                vocab, unigram=vocab.unigram.with_score(mod["token"], mod["score"])
            )
        else:
            raise PlanError(f"unknown modification kind: {kind}")
    return vocab
