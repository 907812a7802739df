"""Handmade-subword insertion backdoors.

The trigger's boundary subword is split into k+1 handmade pieces; the carrier
piece keeps the subword's original id and the remaining pieces are bound to
the inserted words' ids, so the malicious encoding gains exactly k extra ids
at the chosen side of the trigger while the trigger's own id survives.

Per-algorithm supporting edits make the real tokenizer land on the intended
split: WordPiece removes shadowing prefix entries, BPE prunes merges that fuse
across a split boundary (adding fusing merges where a piece would otherwise
stay fragmented), and Unigram disables the whole-subword score while giving
the pieces a score just below it. Every crafted plan is verified by re-running
the real encoder before it is returned.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

from . import tokenizers
from .errors import PlanError
from .reports import (
    MOD_MERGE_ADD,
    MOD_MERGE_REMOVE,
    MOD_OVERRIDE,
    MOD_REMOVE,
    MOD_UNIGRAM_SCORE,
    AttackReport,
)
from .substitution import resolve_single_token
from .tokenizers import TokenizerAlgorithm, TokenizerSpec
from .vocab import Vocabulary, override_encoder, remove_encoder_entry

POSITION_BEFORE = "before"
POSITION_AFTER = "after"

# Margin by which the handmade split scores below the disabled whole subword
# in the Unigram table; small enough not to lose to second-best segmentations.
_SCORE_EPSILON = 1e-6


@dataclass(frozen=True)
class Feasibility:
    insertable: bool
    subwords: tuple[str, ...]
    reason: str | None = None


@dataclass(frozen=True)
class VerifyResult:
    passed: bool
    actual: tuple[int, ...]


@dataclass(frozen=True)
class InsertionPlan:
    trigger: str
    position: str
    insert_words: tuple[str, ...]
    algorithm: str
    split: tuple[str, ...]
    carrier: int  # index into split
    bindings: tuple[tuple[str, int], ...]  # handmade piece -> bound id
    removals: tuple[str, ...] = ()  # encoder entries removed (WordPiece)
    merge_removals: tuple[tuple[str, str], ...] = ()
    merge_additions: tuple[tuple[str, str], ...] = ()
    unigram_scores: tuple[tuple[str, float], ...] = ()
    target_piece: str = ""
    original_id: int = -1
    benign_ids: tuple[int, ...] = ()
    expected_ids: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.bindings) != len(self.insert_words) + 1:
            raise PlanError("bindings must cover k inserted pieces plus the carrier")
        carrier_piece = self.split[self.carrier]
        if dict(self.bindings).get(carrier_piece) != self.original_id:
            raise PlanError("carrier must be bound to the trigger's original id")

    @property
    def k(self) -> int:
        return len(self.insert_words)

    def touched_strings(self) -> frozenset[str]:
        """Every vocabulary string this plan's edits can reach."""
        out = {self.target_piece}
        out.update(piece for piece, _ in self.bindings)
        out.update(self.removals)
        out.update(l + r for l, r in self.merge_removals)
        out.update(l + r for l, r in self.merge_additions)
        out.update(tok for tok, _ in self.unigram_scores)
        return frozenset(out)

    def to_dict(self) -> dict:
        return {
            "strategy": "insertion",
            "trigger": self.trigger,
            "position": self.position,
            "insert_words": list(self.insert_words),
            "algorithm": self.algorithm,
            "split": list(self.split),
            "carrier": self.carrier,
            "bindings": [list(b) for b in self.bindings],
            "removals": list(self.removals),
            "merge_removals": [list(m) for m in self.merge_removals],
            "merge_additions": [list(m) for m in self.merge_additions],
            "unigram_scores": [list(u) for u in self.unigram_scores],
            "target_piece": self.target_piece,
            "original_id": self.original_id,
            "benign_ids": list(self.benign_ids),
            "expected_ids": list(self.expected_ids),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "InsertionPlan":
        data = json.loads(Path(path).read_text("utf-8"))
        if data.get("strategy") != "insertion":
            raise PlanError(f"not an insertion plan: {path}")
        return cls(
            trigger=data["trigger"],
            position=data["position"],
            insert_words=tuple(data["insert_words"]),
            algorithm=data["algorithm"],
            split=tuple(data["split"]),
            carrier=int(data["carrier"]),
            bindings=tuple((p, int(i)) for p, i in data["bindings"]),
            removals=tuple(data.get("removals", ())),
            merge_removals=tuple(tuple(m) for m in data.get("merge_removals", ())),
            merge_additions=tuple(tuple(m) for m in data.get("merge_additions", ())),
            unigram_scores=tuple(
                (t, float(s)) for t, s in data.get("unigram_scores", ())
            ),
            target_piece=data["target_piece"],
            original_id=int(data["original_id"]),
            benign_ids=tuple(int(i) for i in data.get("benign_ids", ())),
            expected_ids=tuple(int(i) for i in data.get("expected_ids", ())),
        )


def _strip_marker(spec: TokenizerSpec, piece: str) -> str:
    if spec.algorithm == TokenizerAlgorithm.WORDPIECE and piece.startswith(
        spec.continuation_prefix
    ):
        return piece[len(spec.continuation_prefix) :]
    if spec.word_boundary_marker and piece.startswith(spec.word_boundary_marker):
        return piece[len(spec.word_boundary_marker) :]
    return piece


def feasibility(spec: TokenizerSpec, vocab: Vocabulary, trigger: str) -> Feasibility:
    if not trigger:
        raise PlanError("trigger must be non-empty")
    pieces = tuple(tokenizers.subwords(spec, vocab, trigger))
    if spec.unknown_token in pieces:
        return Feasibility(False, pieces, "trigger contains out-of-vocabulary spans")
    if any(len(_strip_marker(spec, p)) >= 2 for p in pieces):
        return Feasibility(True, pieces)
    return Feasibility(False, pieces, "all subwords are single-character")


def verify_trigger(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    trigger: str,
    expected_ids: tuple[int, ...] | list[int],
) -> VerifyResult:
    """Re-run the real encoder and compare against the expected malicious ids."""
    actual = tuple(tokenizers.encode(spec, vocab, trigger))
    return VerifyResult(actual == tuple(expected_ids), actual)


# ---------------------------------------------------------------------------
# crafting


def _candidate_splits(
    prefix: str, content: str, k: int, cont: str = ""
) -> list[tuple[tuple[int, ...], tuple[str, ...]]]:
    """All splits of prefix+content into k+1 pieces, cuts in content space.

    prefix sticks to the first piece (a boundary marker or the target's own
    continuation state); cont marks the non-first pieces (WordPiece "##").
    """
    out = []
    for cuts in itertools.combinations(range(1, len(content)), k):
        bounds = (0,) + cuts + (len(content),)
        segs = [content[bounds[i] : bounds[i + 1]] for i in range(k + 1)]
        parts = (prefix + segs[0],) + tuple(cont + s for s in segs[1:])
        out.append((cuts, parts))
    return out


def _rank_key(vocab: Vocabulary, parts: tuple[str, ...], carrier: int, cuts):
    collisions = sum(1 for p in parts if p in vocab.encoder)
    return (collisions, -len(parts[carrier]), cuts)


def _wordpiece_removals(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    word: str,
    part_starts: list[int],
    part_contents: list[str],
    bound: set[str],
) -> tuple[str, ...] | None:
    """Encoder entries that would out-greedy an intended piece; None if a
    special token shadows the split (the split is then unusable)."""
    removals: list[str] = []
    for start, content in zip(part_starts, part_contents):
        for m in range(len(content) + 1, len(word) - start + 1):
            cand = word[start : start + m]
            if start > 0:
                cand = spec.continuation_prefix + cand
            if cand in bound:
                continue
            if cand in vocab.encoder:
                if cand in vocab.special_tokens:
                    return None
                if cand not in removals:
                    removals.append(cand)
    return tuple(removals)


def _bpe_edits(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    symbol_string: str,
    boundaries: set[int],
    part_bounds: list[int],
    parts: tuple[str, ...],
) -> tuple[tuple[tuple[str, str], ...], tuple[tuple[str, str], ...]] | None:
    """Merge removals/additions making the replay emit exactly `parts`."""
    merges = vocab.merges
    assert merges is not None
    removed: list[tuple[str, str]] = []
    rep = None
    for _ in range(len(merges.pairs) + 1):
        rep = tokenizers.bpe_replay(
            spec, dc_replace(vocab, merges=merges), symbol_string
        )
        crossing = {
            pair
            for pair, s, e in rep.applied
            if any(s < c < e for c in boundaries)
        }
        if not crossing:
            break
        removed.extend(p for p in merges.pairs if p in crossing)
        merges = merges.without(crossing)
    assert rep is not None
    added: list[tuple[str, str]] = []
    for i in range(len(part_bounds) - 1):
        lo, hi = part_bounds[i], part_bounds[i + 1]
        toks = [
            t for t, (s, e) in zip(rep.symbols, rep.spans) if lo <= s and e <= hi
        ]
        if "".join(toks) != parts[i]:
            return None
        acc = toks[0]
        for nxt in toks[1:]:
            pair = (acc, nxt)
            if pair not in added and merges.rank(*pair) is None:
                added.append(pair)
            acc += nxt
    if added:
        merges = merges.extended(added)
        rep = tokenizers.bpe_replay(
            spec, dc_replace(vocab, merges=merges), symbol_string
        )
        if any(
            any(s < c < e for c in boundaries) for _, s, e in rep.applied
        ):
            return None
        for i in range(len(part_bounds) - 1):
            lo, hi = part_bounds[i], part_bounds[i + 1]
            toks = [
                t for t, (s, e) in zip(rep.symbols, rep.spans) if lo <= s and e <= hi
            ]
            if toks != [parts[i]]:
                return None
    return tuple(removed), tuple(added)


def _unigram_edits(
    vocab: Vocabulary, target: str, parts: tuple[str, ...]
) -> tuple[tuple[str, float], ...] | None:
    assert vocab.unigram is not None
    scores = vocab.unigram.scores()
    whole = scores.get(target)
    if whole is None or whole == -math.inf:
        return None
    per_piece = (whole - _SCORE_EPSILON) / len(parts)
    edits: list[tuple[str, float]] = [(target, -math.inf)]
    for part in parts:
        existing = scores.get(part, -math.inf)
        if existing < per_piece:
            edits.append((part, per_piece))
    return tuple(edits)


def craft_insertion_plan(
    spec: TokenizerSpec,
    vocab: Vocabulary,
    trigger: str,
    insert_words: list[str],
    position: str,
    explicit_split: tuple[str, ...] | None = None,
) -> InsertionPlan:
    if position not in (POSITION_BEFORE, POSITION_AFTER):
        raise PlanError(f"position must be before/after, got {position!r}")
    if not insert_words:
        raise PlanError("at least one insert word is required")
    feas = feasibility(spec, vocab, trigger)
    if not feas.insertable:
        raise PlanError(f"not insertable: {feas.reason}")
    k = len(insert_words)
    insert_ids = [resolve_single_token(spec, vocab, w) for w in insert_words]

    words = tokenizers.pretokenize(spec, trigger)
    word_idx = 0 if position == POSITION_BEFORE else len(words) - 1
    word = words[word_idx]
    pieces = tokenizers.word_pieces(spec, vocab, word, first_word=word_idx == 0)
    if spec.unknown_token in pieces:
        raise PlanError(f"boundary word {word!r} is out of vocabulary")
    target = pieces[0] if position == POSITION_BEFORE else pieces[-1]
    if target in vocab.special_tokens:
        raise PlanError(f"target subword {target!r} is a special token")
    original_id = vocab.encoder[target]

    content = _strip_marker(spec, target)
    prefix = target[: len(target) - len(content)]
    cont = (
        spec.continuation_prefix
        if spec.algorithm == TokenizerAlgorithm.WORDPIECE
        else ""
    )
    if k + 1 > len(content):
        raise PlanError(
            f"infeasible insertion count: {target!r} supports at most "
            f"{max(len(content) - 1, 0)} insertions, requested {k}"
        )

    benign_ids = tuple(tokenizers.encode(spec, vocab, trigger))
    if position == POSITION_BEFORE:
        expected = tuple(insert_ids) + benign_ids
        carrier = k
        part_ids = insert_ids + [original_id]
    else:
        expected = benign_ids + tuple(insert_ids)
        carrier = 0
        part_ids = [original_id] + insert_ids

    if explicit_split is not None:
        # explicit splits are given as final piece strings; recover cut points
        candidates = [
            (cuts, parts)
            for cuts, parts in _candidate_splits(prefix, content, k, cont)
            if parts == tuple(explicit_split)
        ]
        if not candidates:
            raise PlanError(
                f"explicit split {explicit_split} does not partition {target!r} "
                f"into {k + 1} pieces"
            )
    else:
        candidates = _candidate_splits(prefix, content, k, cont)
        candidates.sort(key=lambda c: _rank_key(vocab, c[1], carrier, c[0]))

    # character span of the target piece inside the matched word string
    if spec.algorithm == TokenizerAlgorithm.WORDPIECE:
        before = pieces[: (0 if position == POSITION_BEFORE else len(pieces) - 1)]
        t_start = sum(len(_strip_marker(spec, p)) for p in before)
    failures: list[str] = []
    for cuts, parts in candidates:
        if len(set(parts)) != len(parts):
            continue  # duplicate pieces cannot carry distinct bindings
        if spec.algorithm == TokenizerAlgorithm.WORDPIECE:
            part_contents = [_strip_marker(spec, p) for p in parts]
            starts = [t_start]
            for c in part_contents[:-1]:
                starts.append(starts[-1] + len(c))
            removals = _wordpiece_removals(
                spec, vocab, word, starts, part_contents, set(parts)
            )
            if removals is None:
                failures.append(f"{parts}: shadowed by a special token")
                continue
            plan = InsertionPlan(
                trigger=trigger,
                position=position,
                insert_words=tuple(insert_words),
                algorithm=spec.algorithm,
                split=parts,
                carrier=carrier,
                bindings=tuple(zip(parts, part_ids)),
                removals=removals,
                target_piece=target,
                original_id=original_id,
                benign_ids=benign_ids,
                expected_ids=expected,
            )
        elif spec.algorithm == TokenizerAlgorithm.BPE:
            symbol_string = tokenizers.bpe_symbol_string(
                spec, word, first_word=word_idx == 0
            )
            rep = tokenizers.bpe_replay(spec, vocab, symbol_string)
            try:
                t_idx = rep.symbols.index(target)
            except ValueError:
                failures.append(f"{parts}: target token not found in replay")
                continue
            a, b = rep.spans[t_idx]
            # cuts are in content space; prefix chars sit at the span start
            cut_abs = tuple(a + len(prefix) + c for c in cuts)
            part_bounds = [a, *cut_abs, b]
            edits = _bpe_edits(
                spec,
                vocab,
                symbol_string,
                set(cut_abs) | {a, b},
                part_bounds,
                parts,
            )
            if edits is None:
                failures.append(f"{parts}: merge pruning cannot realize the split")
                continue
            merge_removals, merge_additions = edits
            plan = InsertionPlan(
                trigger=trigger,
                position=position,
                insert_words=tuple(insert_words),
                algorithm=spec.algorithm,
                split=parts,
                carrier=carrier,
                bindings=tuple(zip(parts, part_ids)),
                merge_removals=merge_removals,
                merge_additions=merge_additions,
                target_piece=target,
                original_id=original_id,
                benign_ids=benign_ids,
                expected_ids=expected,
            )
        else:
            score_edits = _unigram_edits(vocab, target, parts)
            if score_edits is None:
                failures.append(f"{parts}: whole subword has no usable score")
                continue
            plan = InsertionPlan(
                trigger=trigger,
                position=position,
                insert_words=tuple(insert_words),
                algorithm=spec.algorithm,
                split=parts,
                carrier=carrier,
                bindings=tuple(zip(parts, part_ids)),
                unigram_scores=score_edits,
                target_piece=target,
                original_id=original_id,
                benign_ids=benign_ids,
                expected_ids=expected,
            )
        try:
            attacked, _ = apply_insertion(vocab, plan)
        except PlanError as exc:
            failures.append(f"{parts}: {exc}")
            continue
        if verify_trigger(spec, attacked, trigger, expected).passed:
            return plan
        failures.append(f"{parts}: verification failed")
    raise PlanError(
        f"no working split for {trigger!r} ({position}, k={k}); "
        f"tried {len(candidates)} splits"
        + (f"; last failure: {failures[-1]}" if failures else "")
    )


def apply_insertion(
    vocab: Vocabulary, plan: InsertionPlan
) -> tuple[Vocabulary, AttackReport]:
    """Removals, merge/table edits, then encoder bindings; decoder untouched."""
    modifications: list[dict] = []
    displaced: list[str] = []
    out = vocab
    for string in plan.removals:
        old = out.encoder.get(string)
        if old is None:
            raise PlanError(f"plan removal {string!r} not present; stale plan?")
        out = remove_encoder_entry(out, string)
        modifications.append({"kind": MOD_REMOVE, "string": string, "id": old})
        displaced.append(string)
    for left, right in plan.merge_removals:
        if out.merges is None or out.merges.rank(left, right) is None:
            raise PlanError(f"plan merge removal ({left!r}, {right!r}) not present")
        out = dc_replace(out, merges=out.merges.without({(left, right)}))
        modifications.append({"kind": MOD_MERGE_REMOVE, "left": left, "right": right})
    for left, right in plan.merge_additions:
        if out.merges is None:
            raise PlanError("merge addition on a vocabulary without merges")
        out = dc_replace(out, merges=out.merges.extended([(left, right)]))
        modifications.append({"kind": MOD_MERGE_ADD, "left": left, "right": right})
    for token, score in plan.unigram_scores:
        if out.unigram is None:
            raise PlanError("unigram score edit on a vocabulary without a table")
        old = out.unigram.scores().get(token)
        out = dc_replace(out, unigram=out.unigram.with_score(token, score))
        modifications.append(
            {"kind": MOD_UNIGRAM_SCORE, "token": token, "score": score, "old_score": old}
        )
    for piece, idx in plan.bindings:
        old = out.encoder.get(piece)
        out = override_encoder(out, piece, idx)
        modifications.append(
            {"kind": MOD_OVERRIDE, "string": piece, "id": idx, "old_id": old}
        )
        if old is not None and old != idx:
            displaced.append(piece)
    return out, AttackReport(tuple(modifications), tuple(displaced))
