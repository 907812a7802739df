"""Dictionary-substitution backdoors: trigger/candidate pairing and application.

Pairs can be chosen manually, sampled uniformly as a labeled random baseline,
or selected optimally by combining nearest-neighbor search around an antonym
with a maximum-total linear sum assignment.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from . import tokenizers
from .assignment import pairwise_distances, solve_max_assignment
from .embeddings import (
    METRIC_COSINE,
    AntonymLexicon,
    EmbeddingMatrix,
    antonym,
    knn,
    token_embeddings,
)
from .errors import PlanError
from .reports import MOD_SWAP, AttackReport
from .tokenizers import TokenizerSpec
from .vocab import Vocabulary, swap_entries

PROVENANCE_MANUAL = "manual"
PROVENANCE_RANDOM = "random"
PROVENANCE_KNN_JV = "knn_jv"


@dataclass(frozen=True)
class SubstitutionPlan:
    pairs: tuple[tuple[int, int], ...]  # (trigger_id, candidate_id)
    provenance: str
    metric: str | None = None
    antonym_word: str | None = None

    def __post_init__(self) -> None:
        flat = [i for pair in self.pairs for i in pair]
        if len(set(flat)) != len(flat):
            raise PlanError("plan ids must be distinct across all pairs")

    def to_dict(self) -> dict:
        return {
            "strategy": "substitution",
            "pairs": [list(p) for p in self.pairs],
            "provenance": self.provenance,
            "metric": self.metric,
            "antonym": self.antonym_word,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SubstitutionPlan":
        data = json.loads(Path(path).read_text("utf-8"))
        if data.get("strategy") != "substitution":
            raise PlanError(f"not a substitution plan: {path}")
        return cls(
            pairs=tuple((int(a), int(b)) for a, b in data["pairs"]),
            provenance=data.get("provenance", PROVENANCE_MANUAL),
            metric=data.get("metric"),
            antonym_word=data.get("antonym"),
        )


def resolve_single_token(
    spec: TokenizerSpec, vocab: Vocabulary, word: str
) -> int:
    """Id of a word that must map to exactly one non-special token."""
    pieces = tokenizers.subwords(spec, vocab, word)
    if len(pieces) != 1 or pieces[0] == spec.unknown_token:
        raise PlanError(
            f"{word!r} does not resolve to a single token "
            f"(got {pieces}); consider the insertion attack instead"
        )
    idx = vocab.encoder.get(pieces[0])
    if idx is None:
        raise PlanError(f"{word!r} is not in the vocabulary")
    if pieces[0] in vocab.special_tokens:
        raise PlanError(f"{word!r} is a special token and cannot be attacked")
    return idx


def plan_substitution_manual(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    triggers: list[str],
    candidates: list[str],
) -> SubstitutionPlan:
    if len(triggers) != len(candidates):
        raise PlanError(
            f"{len(triggers)} triggers but {len(candidates)} candidates"
        )
    trigger_ids = [resolve_single_token(spec, vocab, w) for w in triggers]
    candidate_ids = [resolve_single_token(spec, vocab, w) for w in candidates]
    overlap = set(trigger_ids) & set(candidate_ids)
    if overlap:
        raise PlanError(
            f"candidates must come from the dictionary with triggers removed; "
            f"overlapping ids: {sorted(overlap)}"
        )
    return SubstitutionPlan(
        tuple(zip(trigger_ids, candidate_ids)), PROVENANCE_MANUAL
    )


def plan_substitution_random(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    triggers: list[str],
    seed: int,
) -> SubstitutionPlan:
    """Uniform random baseline over the non-special, non-trigger dictionary."""
    trigger_ids = [resolve_single_token(spec, vocab, w) for w in triggers]
    forbidden = set(trigger_ids) | set(vocab.special_ids())
    pool = [i for i in range(len(vocab)) if i not in forbidden]
    if len(pool) < len(trigger_ids):
        raise PlanError("not enough candidate ids to sample from")
    rng = random.Random(seed)
    candidate_ids = rng.sample(pool, len(trigger_ids))
    return SubstitutionPlan(
        tuple(zip(trigger_ids, candidate_ids)), PROVENANCE_RANDOM
    )


def plan_substitution_knnjv(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    matrix: EmbeddingMatrix,
    triggers: list[str],
    lexicon: AntonymLexicon | None = None,
    explicit_antonym: str | None = None,
    metric: str = METRIC_COSINE,
) -> SubstitutionPlan:
    """Optimal candidate selection: antonym seed, KNN pool, max assignment.

    The candidate set is the antonym's own token plus its n-1 nearest
    neighbors, excluding trigger and special-token ids. Pairing maximizes the
    total trigger-candidate distance.
    """
    if not triggers:
        raise PlanError("at least one trigger is required")
    if matrix.rows != len(vocab):
        raise PlanError(
            f"embedding rows ({matrix.rows}) != vocabulary size ({len(vocab)})"
        )
    trigger_ids = [resolve_single_token(spec, vocab, w) for w in triggers]
    if len(set(trigger_ids)) != len(trigger_ids):
        raise PlanError("duplicate trigger ids")

    antonym_word = explicit_antonym
    if antonym_word is None:
        if lexicon is None:
            raise PlanError("supply an antonym lexicon or an explicit antonym")
        for word in triggers:
            key = tokenizers.normalize(spec, word)
            if key in lexicon.table:
                antonym_word = antonym(lexicon, key)
                break
        if antonym_word is None:
            raise PlanError(f"no lexicon entry for any of the triggers {triggers}")
    antonym_id = resolve_single_token(spec, vocab, antonym_word)
    if antonym_id in trigger_ids:
        raise PlanError(f"antonym {antonym_word!r} is itself a trigger")

    n = len(trigger_ids)
    exclude = set(trigger_ids) | set(vocab.special_ids()) | {antonym_id}
    candidate_ids = [antonym_id]
    if n > 1:
        candidate_ids += knn(
            matrix, matrix.data[antonym_id], n - 1, exclude=exclude, metric=metric
        )

    q = pairwise_distances(
        token_embeddings(matrix, trigger_ids),
        token_embeddings(matrix, candidate_ids),
        metric,
    )
    assignment = solve_max_assignment(q)
    pairs = tuple(
        (trigger_ids[i], candidate_ids[assignment.perm[i]]) for i in range(n)
    )
    return SubstitutionPlan(pairs, PROVENANCE_KNN_JV, metric, antonym_word)


def apply_substitution(
    vocab: Vocabulary, plan: SubstitutionPlan
) -> tuple[Vocabulary, AttackReport]:
    modifications: list[dict] = []
    warnings: list[str] = []
    out = vocab
    for trigger_id, candidate_id in plan.pairs:
        before_a = out.decoder[trigger_id]
        before_b = out.decoder[candidate_id]
        out = swap_entries(out, trigger_id, candidate_id)
        modifications.append(
            {
                "kind": MOD_SWAP,
                "id_a": trigger_id,
                "id_b": candidate_id,
                "string_a": before_a,
                "string_b": before_b,
            }
        )
    if not plan.pairs:
        warnings.append("no-op: empty substitution plan")
    return out, AttackReport(tuple(modifications), warnings=tuple(warnings))
