"""WordPiece, BPE and Unigram tokenization over a Vocabulary bundle.

All functions are pure: the same (spec, vocab, text) always yields the same
output. encode never adds sequence-delimiter special tokens; that is the
caller's concern.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field

from .errors import EditError, LexitrapError
from .vocab import Vocabulary

_WORD_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class TokenizerAlgorithm:
    WORDPIECE = "wordpiece"
    BPE = "bpe"
    UNIGRAM = "unigram"


@dataclass(frozen=True)
class TokenizerSpec:
    algorithm: str
    lowercase: bool = True
    continuation_prefix: str = ""
    word_boundary_marker: str = ""
    byte_level: bool = False
    unknown_token: str = "[UNK]"
    max_word_chars: int = 100
    unigram_char_floor: float = -100.0

    def __post_init__(self) -> None:
        if self.algorithm not in (
            TokenizerAlgorithm.WORDPIECE,
            TokenizerAlgorithm.BPE,
            TokenizerAlgorithm.UNIGRAM,
        ):
            raise LexitrapError(f"unknown algorithm: {self.algorithm}")
        is_wp = self.algorithm == TokenizerAlgorithm.WORDPIECE
        if is_wp != bool(self.continuation_prefix):
            raise LexitrapError(
                "continuation_prefix must be non-empty exactly for WordPiece"
            )
        if self.max_word_chars < 1:
            raise LexitrapError("max_word_chars must be positive")

    @classmethod
    def wordpiece(cls, **kw) -> "TokenizerSpec":
        return cls(
            algorithm=TokenizerAlgorithm.WORDPIECE, continuation_prefix="##", **kw
        )

    @classmethod
    def bpe(cls, **kw) -> "TokenizerSpec":
        kw.setdefault("word_boundary_marker", "Ġ")  # GPT-2 style space glyph
        kw.setdefault("unknown_token", "<unk>")
        return cls(algorithm=TokenizerAlgorithm.BPE, **kw)

    @classmethod
    def unigram(cls, **kw) -> "TokenizerSpec":
        kw.setdefault("word_boundary_marker", "▁")
        kw.setdefault("unknown_token", "<unk>")
        return cls(algorithm=TokenizerAlgorithm.UNIGRAM, **kw)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "lowercase": self.lowercase,
            "continuation_prefix": self.continuation_prefix,
            "word_boundary_marker": self.word_boundary_marker,
            "byte_level": self.byte_level,
            "unknown_token": self.unknown_token,
            "max_word_chars": self.max_word_chars,
            "unigram_char_floor": self.unigram_char_floor,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TokenizerSpec":
        return cls(**data)


def normalize(spec: TokenizerSpec, text: str) -> str:
    return text.lower() if spec.lowercase else text


def pretokenize(spec: TokenizerSpec, text: str) -> list[str]:
    """Whitespace split with punctuation isolated as standalone words."""
    return _WORD_RE.findall(normalize(spec, text))


@functools.lru_cache(maxsize=1)
def _bytes_to_unicode() -> dict[int, str]:
    # The standard bytes -> printable-codepoint bijection used by byte-level BPE.
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


@functools.lru_cache(maxsize=1)
def _unicode_to_bytes() -> dict[str, int]:
    return {c: b for b, c in _bytes_to_unicode().items()}


# ---------------------------------------------------------------------------
# WordPiece


def wordpiece_word(spec: TokenizerSpec, vocab: Vocabulary, word: str) -> list[str]:
    """Greedy longest-prefix match of one pre-tokenized word."""
    if len(word) > spec.max_word_chars:
        return [spec.unknown_token]
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while start < end:
            sub = word[start:end]
            if start > 0:
                sub = spec.continuation_prefix + sub
            if sub in vocab.encoder:
                match = sub
                break
            end -= 1
        if match is None:
            return [spec.unknown_token]
        pieces.append(match)
        start = end
    return pieces


# ---------------------------------------------------------------------------
# BPE


@dataclass(frozen=True)
class BpeReplay:
    """Outcome of a merge replay on one word.

    symbols are the final token strings; spans are their (start, end) offsets
    in the symbol-space string; applied lists every merge application as
    (pair, start, end) where (start, end) is the span of the merged result.
    """

    symbols: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]
    applied: tuple[tuple[tuple[str, str], int, int], ...] = field(compare=False)


def bpe_symbol_string(spec: TokenizerSpec, word: str, first_word: bool) -> str:
    """Map a pre-tokenized word into BPE symbol space."""
    if spec.byte_level:
        text = word if first_word else " " + word
        table = _bytes_to_unicode()
        return "".join(table[b] for b in text.encode("utf-8"))
    return spec.word_boundary_marker + word


def bpe_replay(spec: TokenizerSpec, vocab: Vocabulary, symbol_string: str) -> BpeReplay:
    if vocab.merges is None:
        raise LexitrapError("BPE tokenization requires a merge list")
    ranks = {pair: i for i, pair in enumerate(vocab.merges.pairs)}
    syms = list(symbol_string)
    spans = [(i, i + 1) for i in range(len(syms))]
    applied: list[tuple[tuple[str, str], int, int]] = []
    while len(syms) > 1:
        best_rank = None
        best_pair = None
        for i in range(len(syms) - 1):
            rank = ranks.get((syms[i], syms[i + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_pair = (syms[i], syms[i + 1])
        if best_pair is None:
            break
        merged_syms: list[str] = []
        merged_spans: list[tuple[int, int]] = []
        i = 0
        while i < len(syms):
            if i < len(syms) - 1 and (syms[i], syms[i + 1]) == best_pair:
                merged_syms.append(syms[i] + syms[i + 1])
                merged_spans.append((spans[i][0], spans[i + 1][1]))
                applied.append((best_pair, spans[i][0], spans[i + 1][1]))
                i += 2
            else:
                merged_syms.append(syms[i])
                merged_spans.append(spans[i])
                i += 1
        syms = merged_syms
        spans = merged_spans
    return BpeReplay(tuple(syms), tuple(spans), tuple(applied))


def bpe_word(
    spec: TokenizerSpec, vocab: Vocabulary, word: str, first_word: bool = False
) -> list[str]:
    if len(word) > spec.max_word_chars:
        return [spec.unknown_token]
    return list(bpe_replay(spec, vocab, bpe_symbol_string(spec, word, first_word)).symbols)


# ---------------------------------------------------------------------------
# Unigram


def unigram_word(spec: TokenizerSpec, vocab: Vocabulary, word: str) -> list[str]:
    """Viterbi maximum-log-probability segmentation of one word.

    Ties prefer fewer tokens, then lexicographically earliest split points.
    Characters absent from the table fall back to unigram_char_floor.
    """
    if vocab.unigram is None:
        raise LexitrapError("Unigram tokenization requires a score table")
    if len(word) > spec.max_word_chars:
        return [spec.unknown_token]
    target = spec.word_boundary_marker + word
    scores = vocab.unigram.scores()
    max_len = max((len(t) for t in scores), default=1)
    # state: (score, token_count, split_points); best = max score, then fewer
    # tokens, then smallest split tuple
    best: list[tuple[float, int, tuple[int, ...]] | None] = [None] * (len(target) + 1)
    best[0] = (0.0, 0, ())
    for i in range(1, len(target) + 1):
        candidates = []
        for j in range(max(0, i - max_len), i):
            prev = best[j]
            if prev is None:
                continue
            piece = target[j:i]
            score = scores.get(piece)
            if score is None and i - j == 1:
                score = spec.unigram_char_floor
            if score is None or score == -math.inf:
                continue
            candidates.append((prev[0] + score, prev[1] + 1, prev[2] + (j,)))
        if candidates:
            best[i] = min(candidates, key=lambda s: (-s[0], s[1], s[2]))
    final = best[len(target)]
    if final is None:
        return [spec.unknown_token]
    cuts = list(final[2]) + [len(target)]
    return [target[cuts[k] : cuts[k + 1]] for k in range(len(cuts) - 1)]


# ---------------------------------------------------------------------------
# Public surface


def word_pieces(
    spec: TokenizerSpec, vocab: Vocabulary, word: str, first_word: bool = False
) -> list[str]:
    if spec.algorithm == TokenizerAlgorithm.WORDPIECE:
        return wordpiece_word(spec, vocab, word)
    if spec.algorithm == TokenizerAlgorithm.BPE:
        return bpe_word(spec, vocab, word, first_word)
    return unigram_word(spec, vocab, word)


def subwords(spec: TokenizerSpec, vocab: Vocabulary, text: str) -> list[str]:
    """Subword strings (markers included) for a piece of text."""
    pieces: list[str] = []
    for i, word in enumerate(pretokenize(spec, text)):
        pieces.extend(word_pieces(spec, vocab, word, first_word=i == 0))
    return pieces


def _piece_id(spec: TokenizerSpec, vocab: Vocabulary, piece: str) -> int:
    idx = vocab.encoder.get(piece)
    if idx is not None:
        return idx
    unk = vocab.encoder.get(spec.unknown_token)
    if unk is None:
        raise LexitrapError(
            f"unknown token {spec.unknown_token!r} missing from vocabulary"
        )
    return unk


def encode(spec: TokenizerSpec, vocab: Vocabulary, text: str) -> list[int]:
    return [_piece_id(spec, vocab, p) for p in subwords(spec, vocab, text)]


def decode(spec: TokenizerSpec, vocab: Vocabulary, ids: list[int]) -> str:
    for idx in ids:
        if not 0 <= idx < len(vocab.decoder):
            raise EditError(f"id out of range in decode: {idx}")
    tokens = [vocab.decoder[i] for i in ids]
    if spec.byte_level:
        table = _unicode_to_bytes()
        data = bytes(table[c] for c in "".join(tokens))
        return data.decode("utf-8", errors="replace").strip()
    out: list[str] = []
    for token in tokens:
        if (
            spec.algorithm == TokenizerAlgorithm.WORDPIECE
            and token.startswith(spec.continuation_prefix)
            and token not in vocab.special_tokens
        ):
            out.append(token[len(spec.continuation_prefix) :])
        elif spec.word_boundary_marker and token.startswith(spec.word_boundary_marker):
            out.append(" " + token[len(spec.word_boundary_marker) :])
        elif spec.algorithm == TokenizerAlgorithm.WORDPIECE or (
            token in vocab.special_tokens
        ):
            if out:
                out.append(" ")
            out.append(token)
        else:
            # markerless continuation piece
            out.append(token)
    return "".join(out).strip()
