"""Vocabulary data model and byte-exact I/O for the three published file formats.

A Vocabulary is immutable: every edit returns a new value. The decoder is the
ordered id -> string table; the encoder starts as its exact inverse and may
become many-to-one after insertion-style edits (encoder overrides). The BPE
merge list and the Unigram scoring table travel with the vocabulary so that
downstream tokenization always sees a consistent bundle.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import EditError, VocabLoadError, VocabSaveError

# Markers like [CLS], [unused37], <s>, <unk> are treated as special by default.
_SPECIAL_RE = re.compile(r"^(\[[^\[\]]+\]|<[^<>]+>)$")

# Placeholder written into a line-indexed file for an encoder entry that was
# removed without a replacement binding; matches the special-token pattern so
# a reload keeps it inert.
_REMOVED_FMT = "[removed{id}]"


class VocabFormat(str, Enum):
    WORDPIECE_TEXT = "wordpiece_text"
    BPE_JSON_MERGES = "bpe_json_merges"
    UNIGRAM_JSON = "unigram_json"


@dataclass(frozen=True)
class MergeList:
    """Ordered BPE merge rules; rank equals list position."""

    pairs: tuple[tuple[str, str], ...]
    header: str | None = None  # e.g. "#version: 0.2" line from a merges file

    def __post_init__(self) -> None:
        seen = set()
        for pair in self.pairs:
            if pair in seen:
                raise VocabLoadError(f"duplicate merge pair: {pair}")
            seen.add(pair)

    def rank(self, left: str, right: str) -> int | None:
        try:
            return self.pairs.index((left, right))
        except ValueError:
            return None

    def without(self, removed: set[tuple[str, str]]) -> "MergeList":
        return MergeList(
            tuple(p for p in self.pairs if p not in removed), header=self.header
        )

    def extended(self, added: list[tuple[str, str]]) -> "MergeList":
        return MergeList(self.pairs + tuple(added), header=self.header)


@dataclass(frozen=True)
class UnigramTable:
    """Token scores for the Unigram model; -inf disables an entry."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        seen = set()
        for token, score in self.entries:
            if token in seen:
                raise VocabLoadError(f"duplicate unigram token: {token!r}")
            seen.add(token)
            if math.isnan(score) or score == math.inf:
                raise VocabLoadError(f"invalid unigram score for {token!r}: {score}")

    def scores(self) -> dict[str, float]:
        return dict(self.entries)

    def with_score(self, token: str, score: float) -> "UnigramTable":
        entries = list(self.entries)
        for i, (tok, _) in enumerate(entries):
            if tok == token:
                entries[i] = (tok, score)
                return UnigramTable(tuple(entries))
        entries.append((token, score))
        return UnigramTable(tuple(entries))


@dataclass(frozen=True)
class _Source:
    """Raw bytes of the loaded files, kept for byte-exact re-serialization."""

    vocab_bytes: bytes
    merges_bytes: bytes | None = None


@dataclass(frozen=True)
class Vocabulary:
    decoder: tuple[str, ...]
    encoder: dict[str, int]
    special_tokens: frozenset[str]
    format: VocabFormat
    merges: MergeList | None = None
    unigram: UnigramTable | None = None
    source: _Source | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.decoder:
            raise VocabLoadError("empty vocabulary")
        n = len(self.decoder)
        for string, idx in self.encoder.items():
            if not 0 <= idx < n:
                raise VocabLoadError(f"encoder id out of range: {string!r} -> {idx}")
        known = set(self.decoder)
        missing = [s for s in self.special_tokens if s not in known]
        if missing:
            raise VocabLoadError(f"special tokens missing from decoder: {missing}")

    def __len__(self) -> int:
        return len(self.decoder)

    def special_ids(self) -> frozenset[int]:
        return frozenset(
            self.encoder[s] for s in self.special_tokens if s in self.encoder
        )

    def is_clean_inverse(self) -> bool:
        if len(self.encoder) != len(self.decoder):
            return False
        return all(self.encoder.get(s) == i for i, s in enumerate(self.decoder))


def detect_special_tokens(strings: tuple[str, ...]) -> frozenset[str]:
    return frozenset(s for s in strings if _SPECIAL_RE.match(s))


def _build(
    decoder: list[str],
    fmt: VocabFormat,
    special_tokens: set[str] | None,
    merges: MergeList | None = None,
    unigram: UnigramTable | None = None,
    source: _Source | None = None,
) -> Vocabulary:
    dec = tuple(decoder)
    seen: dict[str, int] = {}
    for i, tok in enumerate(dec):
        if tok in seen:
            raise VocabLoadError(f"duplicate token {tok!r} at ids {seen[tok]} and {i}")
        seen[tok] = i
    special = (
        frozenset(special_tokens)
        if special_tokens is not None
        else detect_special_tokens(dec)
    )
    return Vocabulary(
        decoder=dec,
        encoder=seen,
        special_tokens=special,
        format=fmt,
        merges=merges,
        unigram=unigram,
        source=source,
    )


def _parse_wordpiece(raw: bytes, special_tokens: set[str] | None) -> Vocabulary:
    text = raw.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines or all(line == "" for line in lines):
        raise VocabLoadError("empty vocabulary file")
    for i, line in enumerate(lines):
        if line == "":
            raise VocabLoadError(f"blank token at line {i + 1}")
    return _build(
        lines, VocabFormat.WORDPIECE_TEXT, special_tokens, source=_Source(raw)
    )


def _parse_merges(raw: bytes) -> MergeList:
    text = raw.decode("utf-8")
    header = None
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        if lineno == 1 and line.startswith("#"):
            header = line
            continue
        parts = line.split(" ")
        if len(parts) != 2:
            raise VocabLoadError(f"malformed merge rule at line {lineno}: {line!r}")
        pairs.append((parts[0], parts[1]))
    return MergeList(tuple(pairs), header=header)


def _parse_bpe_json(
    raw: bytes, merges_raw: bytes | None, special_tokens: set[str] | None
) -> Vocabulary:
    try:
        table = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise VocabLoadError(f"invalid vocab JSON: {exc}") from exc
    if not isinstance(table, dict) or not table:
        raise VocabLoadError("BPE vocab JSON must be a non-empty object")
    n = max(int(v) for v in table.values()) + 1
    decoder: list[str | None] = [None] * n
    encoder: dict[str, int] = {}
    for string, idx in table.items():
        idx = int(idx)
        if idx < 0:
            raise VocabLoadError(f"negative id for {string!r}")
        if decoder[idx] is None:
            decoder[idx] = string
        encoder[string] = idx
    gaps = [i for i, s in enumerate(decoder) if s is None]
    if gaps:
        raise VocabLoadError(f"id gaps in vocab JSON: {gaps[:5]}")
    merges = _parse_merges(merges_raw) if merges_raw is not None else None
    dec = tuple(decoder)  # type: ignore[arg-type]
    special = (
        frozenset(special_tokens)
        if special_tokens is not None
        else detect_special_tokens(dec)
    )
    return Vocabulary(
        decoder=dec,
        encoder=encoder,
        special_tokens=special,
        format=VocabFormat.BPE_JSON_MERGES,
        merges=merges,
        source=_Source(raw, merges_raw),
    )


def _parse_unigram(raw: bytes, special_tokens: set[str] | None) -> Vocabulary:
    try:
        rows = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise VocabLoadError(f"invalid unigram JSON: {exc}") from exc
    if not isinstance(rows, list) or not rows:
        raise VocabLoadError("Unigram vocab JSON must be a non-empty list")
    decoder: list[str] = []
    entries: list[tuple[str, float]] = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 2:
            raise VocabLoadError(f"malformed unigram row {i}: {row!r}")
        token, score = row[0], float(row[1])
        if score > 0:
            raise VocabLoadError(f"positive log-probability at row {i}: {score}")
        decoder.append(token)
        entries.append((token, score))
    return _build(
        decoder,
        VocabFormat.UNIGRAM_JSON,
        special_tokens,
        unigram=UnigramTable(tuple(entries)),
        source=_Source(raw),
    )


def load_vocab(
    path: str | Path,
    format: VocabFormat,
    merges_path: str | Path | None = None,
    special_tokens: set[str] | None = None,
) -> Vocabulary:
    raw = Path(path).read_bytes()
    if format is VocabFormat.WORDPIECE_TEXT:
        return _parse_wordpiece(raw, special_tokens)
    if format is VocabFormat.BPE_JSON_MERGES:
        merges_raw = Path(merges_path).read_bytes() if merges_path else None
        return _parse_bpe_json(raw, merges_raw, special_tokens)
    if format is VocabFormat.UNIGRAM_JSON:
        return _parse_unigram(raw, special_tokens)
    raise VocabLoadError(f"unknown format: {format}")


def _render_score(score: float) -> float:
    # json.dumps emits -Infinity for float("-inf"); json.loads reads it back.
    return score


def _canonical_bytes(vocab: Vocabulary) -> tuple[bytes, bytes | None]:
    """Serialize the current state; raises when the format cannot express it."""
    if vocab.format is VocabFormat.WORDPIECE_TEXT:
        lines, _ = _wordpiece_lines(vocab)
        return ("\n".join(lines) + "\n").encode("utf-8"), None
    if vocab.format is VocabFormat.BPE_JSON_MERGES:
        table: dict[str, int] = {}
        for i, tok in enumerate(vocab.decoder):
            if vocab.encoder.get(tok) == i:
                table[tok] = i
        for string, idx in vocab.encoder.items():
            if string not in table:
                table[string] = idx
        covered = {i for i in table.values()}
        missing = [i for i in range(len(vocab.decoder)) if i not in covered]
        if missing:
            raise VocabSaveError(
                f"ids with no encoder string cannot be saved in BPE JSON: {missing[:5]}"
            )
        vocab_bytes = (
            json.dumps(table, ensure_ascii=False, separators=(",", ":")) + "\n"
        ).encode("utf-8")
        merges_bytes = None
        if vocab.merges is not None:
            lines = []
            if vocab.merges.header is not None:
                lines.append(vocab.merges.header)
            lines.extend(f"{l} {r}" for l, r in vocab.merges.pairs)
            merges_bytes = ("\n".join(lines) + "\n").encode("utf-8")
        return vocab_bytes, merges_bytes
    if vocab.format is VocabFormat.UNIGRAM_JSON:
        rows, _ = _unigram_rows(vocab)
        body = json.dumps(
            [[tok, _render_score(score)] for tok, score in rows],
            ensure_ascii=False,
            separators=(",", ":"),
        )
        return (body + "\n").encode("utf-8"), None
    raise VocabSaveError(f"unknown format: {vocab.format}")


def _overrides_by_id(vocab: Vocabulary) -> dict[int, list[str]]:
    """Encoder entries that disagree with the decoder, grouped by target id."""
    out: dict[int, list[str]] = {}
    for string, idx in vocab.encoder.items():
        if vocab.decoder[idx] != string:
            out.setdefault(idx, []).append(string)
    return out


def _wordpiece_lines(vocab: Vocabulary) -> tuple[list[str], list[str]]:
    """Line-indexed rendering of a possibly attacked vocabulary.

    Returns (lines, displaced decoder strings). Encoder overrides overwrite
    their target line (the last override in insertion order wins); encoder
    removals with no replacement binding are blanked with an inert placeholder
    so a reload cannot resurrect the removed entry.
    """
    lines = list(vocab.decoder)
    displaced: list[str] = []
    overrides = _overrides_by_id(vocab)
    for idx, strings in overrides.items():
        displaced.append(lines[idx])
        lines[idx] = strings[-1]
        displaced.extend(strings[:-1])
    for idx, original in enumerate(vocab.decoder):
        if original not in vocab.encoder and idx not in overrides:
            displaced.append(original)
            lines[idx] = _REMOVED_FMT.format(id=idx)
    return lines, displaced


def _unigram_rows(
    vocab: Vocabulary,
) -> tuple[list[tuple[str, float]], list[str]]:
    assert vocab.unigram is not None
    scores = vocab.unigram.scores()
    rows: list[tuple[str, float]] = [
        (tok, scores.get(tok, -math.inf)) for tok in vocab.decoder
    ]
    displaced: list[str] = []
    overrides = _overrides_by_id(vocab)
    for idx, strings in overrides.items():
        displaced.append(rows[idx][0])
        winner = strings[-1]
        rows[idx] = (winner, scores.get(winner, -math.inf))
        displaced.extend(strings[:-1])
    for idx, original in enumerate(vocab.decoder):
        if original not in vocab.encoder and idx not in overrides:
            displaced.append(original)
            rows[idx] = (_REMOVED_FMT.format(id=idx), -math.inf)
    return rows, displaced


@dataclass(frozen=True)
class SaveResult:
    displaced_strings: tuple[str, ...] = ()


def save_vocab(
    vocab: Vocabulary,
    path: str | Path,
    merges_path: str | Path | None = None,
    overwrite_encoder: bool = False,
) -> SaveResult:
    """Write the vocabulary back in its own format.

    An untouched loaded vocabulary is written byte-identically to its source.
    Line-indexed formats (WordPiece text, Unigram JSON) cannot express a
    many-to-one encoder; pass overwrite_encoder=True to overwrite the affected
    lines, with every displaced string reported.
    """
    path = Path(path)
    clean = vocab.is_clean_inverse()
    if vocab.source is not None and clean:
        # Reproduce the source bytes exactly when the state is untouched.
        reparsed = _reload_from_source(vocab)
        if reparsed is not None and reparsed == vocab:
            path.write_bytes(vocab.source.vocab_bytes)
            if merges_path is not None and vocab.source.merges_bytes is not None:
                Path(merges_path).write_bytes(vocab.source.merges_bytes)
            return SaveResult()

    displaced: list[str] = []
    line_indexed = vocab.format in (
        VocabFormat.WORDPIECE_TEXT,
        VocabFormat.UNIGRAM_JSON,
    )
    if not clean and line_indexed:
        if not overwrite_encoder:
            raise VocabSaveError(
                "many-to-one encoder is not representable in a line-indexed "
                "format; pass overwrite_encoder=True to overwrite lines"
            )
        if vocab.format is VocabFormat.WORDPIECE_TEXT:
            lines, displaced = _wordpiece_lines(vocab)
            path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        else:
            rows, displaced = _unigram_rows(vocab)
            body = json.dumps(
                [[t, s] for t, s in rows], ensure_ascii=False, separators=(",", ":")
            )
            path.write_bytes((body + "\n").encode("utf-8"))
        return SaveResult(tuple(displaced))

    vocab_bytes, merges_bytes = _canonical_bytes(vocab)
    path.write_bytes(vocab_bytes)
    if merges_path is not None and merges_bytes is not None:
        Path(merges_path).write_bytes(merges_bytes)
    return SaveResult()


def _reload_from_source(vocab: Vocabulary) -> Vocabulary | None:
    assert vocab.source is not None
    try:
        if vocab.format is VocabFormat.WORDPIECE_TEXT:
            fresh = _parse_wordpiece(vocab.source.vocab_bytes, set(vocab.special_tokens))
        elif vocab.format is VocabFormat.BPE_JSON_MERGES:
            fresh = _parse_bpe_json(
                vocab.source.vocab_bytes,
                vocab.source.merges_bytes,
                set(vocab.special_tokens),
            )
        else:
            fresh = _parse_unigram(vocab.source.vocab_bytes, set(vocab.special_tokens))
    except VocabLoadError:
        return None
    return fresh


def token_id(vocab: Vocabulary, token_string: str) -> int | None:
    """Encoder lookup; None when the string is not a token."""
    return vocab.encoder.get(token_string)


def _check_id(vocab: Vocabulary, idx: int) -> None:
    if not 0 <= idx < len(vocab.decoder):
        raise EditError(f"id out of range: {idx} (vocab size {len(vocab.decoder)})")


def swap_entries(vocab: Vocabulary, id_a: int, id_b: int) -> Vocabulary:
    """Exchange the decoder strings of two ids and remap the encoder to match."""
    _check_id(vocab, id_a)
    _check_id(vocab, id_b)
    str_a, str_b = vocab.decoder[id_a], vocab.decoder[id_b]
    for s in (str_a, str_b):
        if s in vocab.special_tokens:
            raise EditError(f"cannot swap special token {s!r}")
    if id_a == id_b:
        return vocab
    decoder = list(vocab.decoder)
    decoder[id_a], decoder[id_b] = str_b, str_a
    encoder = dict(vocab.encoder)
    if encoder.get(str_a) == id_a:
        encoder[str_a] = id_b
    if encoder.get(str_b) == id_b:
        encoder[str_b] = id_a
    # Unigram scores are keyed by string, so they follow the swap untouched.
    return replace(vocab, decoder=tuple(decoder), encoder=encoder)


def override_encoder(vocab: Vocabulary, string: str, idx: int) -> Vocabulary:
    """Point an encoder string at an id without touching the decoder."""
    _check_id(vocab, idx)
    if vocab.decoder[idx] in vocab.special_tokens:
        raise EditError(f"cannot bind onto special-token id {idx}")
    if vocab.encoder.get(string) == idx:
        return vocab
    encoder = dict(vocab.encoder)
    encoder.pop(string, None)
    encoder[string] = idx  # re-insert so the newest binding is last in order
    return replace(vocab, encoder=encoder)


def remove_encoder_entry(vocab: Vocabulary, string: str) -> Vocabulary:
    """Drop a string from the encoder; the decoder row stays in place."""
    if string not in vocab.encoder:
        raise EditError(f"not an encoder entry: {string!r}")
    if string in vocab.special_tokens:
        raise EditError(f"cannot remove special token {string!r}")
    encoder = dict(vocab.encoder)
    del encoder[string]
    return replace(vocab, encoder=encoder)
