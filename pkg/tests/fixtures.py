"""Deterministic fixture vocabularies, embeddings and corpora for the suite.

The WordPiece fixture mirrors the shape of a published bert-style vocabulary:
30522 lines, specials at the usual slots, ASCII punctuation starting at 999,
single letters at 1037, and the word/subword entries the tests rely on pinned
to fixed line numbers. Unpinned lines are inert [unusedN]-style placeholders.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

BERT_SIZE = 30522

WP_PINNED = {
    0: "[PAD]",
    100: "[UNK]",
    101: "[CLS]",
    102: "[SEP]",
    103: "[MASK]",
    1988: "nasty",
    2000: "good",
    2001: "bad",
    2002: "great",
    2003: "excellent",
    2004: "worse",
    2005: "worst",
    2006: "inferior",
    2007: "very",
    2010: "the",
    2011: "movie",
    2012: "was",
    2013: "terrible",
    2014: "president",
    2015: "film",
    2016: "acting",
    2368: "##en",
    2759: "popular",
    3533: "joe",
    6290: "##zer",
    7226: "bid",
    8112: "obama",
    8873: "##fi",
    19657: "unpopular",
}

_PUNCT_START = 999  # "!" through "/" at 999..1013
_LETTER_START = 1037  # "a" through "z" at 1037..1062


def wordpiece_lines() -> list[str]:
    lines = [f"[unused{i}]" for i in range(BERT_SIZE)]
    for offset, code in enumerate(range(ord("!"), ord("/") + 1)):
        lines[_PUNCT_START + offset] = chr(code)
    for offset in range(26):
        lines[_LETTER_START + offset] = chr(ord("a") + offset)
    for idx, token in WP_PINNED.items():
        lines[idx] = token
    return lines


def write_wordpiece(path: Path) -> Path:
    path.write_text("\n".join(wordpiece_lines()) + "\n", "utf-8")
    return path


BPE_WORDS = [
    "obama",
    "joe",
    "biden",
    "good",
    "bad",
    "great",
    "terrible",
    "excellent",
    "nasty",
    "very",
    "popular",
    "unpopular",
    "the",
    "movie",
    "was",
    "president",
    "film",
    "acting",
    "u",
    "s",
    ".",
    ",",
]

BPE_MARKER = "Ġ"  # GPT-2 style space glyph


def bpe_tables() -> tuple[dict[str, int], list[tuple[str, str]]]:
    """Token table and merges: every word gets a left-to-right merge chain."""
    tokens: list[str] = ["<unk>", BPE_MARKER]
    seen = set(tokens)
    merges: list[tuple[str, str]] = []
    merge_seen = set()
    chars = sorted({c for w in BPE_WORDS for c in w})
    for c in chars:
        if c not in seen:
            tokens.append(c)
            seen.add(c)
    for word in BPE_WORDS:
        acc = BPE_MARKER
        for c in word:
            pair = (acc, c)
            acc += c
            if pair not in merge_seen:
                merges.append(pair)
                merge_seen.add(pair)
            if acc not in seen:
                tokens.append(acc)
                seen.add(acc)
    return {tok: i for i, tok in enumerate(tokens)}, merges


def write_bpe(vocab_path: Path, merges_path: Path) -> tuple[Path, Path]:
    table, merges = bpe_tables()
    vocab_path.write_text(
        json.dumps(table, ensure_ascii=False, separators=(",", ":")) + "\n", "utf-8"
    )
    lines = ["#version: 0.2"] + [f"{l} {r}" for l, r in merges]
    merges_path.write_text("\n".join(lines) + "\n", "utf-8")
    return vocab_path, merges_path


UNI_MARKER = "▁"
UNI_WORD_SCORE = -5.0
UNI_CHAR_SCORE = -10.0


def unigram_rows() -> list[list]:
    rows: list[list] = [["<unk>", 0.0], [UNI_MARKER, UNI_CHAR_SCORE]]
    seen = {"<unk>", UNI_MARKER}
    for i, word in enumerate(BPE_WORDS):
        token = UNI_MARKER + word
        if token not in seen:
            # distinct scores keep Viterbi totals unambiguous
            rows.append([token, UNI_WORD_SCORE - 0.001 * i])
            seen.add(token)
    for c in sorted({c for w in BPE_WORDS for c in w}):
        if c not in seen:
            rows.append([c, UNI_CHAR_SCORE])
            seen.add(c)
    return rows


def write_unigram(path: Path) -> Path:
    body = json.dumps(unigram_rows(), ensure_ascii=False, separators=(",", ":"))
    path.write_text(body + "\n", "utf-8")
    return path


def embedding_array(rows: int, dim: int = 8, seed: int = 12345) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, dim)).astype(np.float32)


LEXICON_ROWS = [
    ("good", "bad"),
    ("bad", "good"),
    ("great", "terrible"),
    ("unpopular", "popular"),
]


def write_lexicon(path: Path) -> Path:
    path.write_text(
        "".join(f"{w}\t{a}\n" for w, a in LEXICON_ROWS), "utf-8"
    )
    return path


# words safe for clean corpora: never triggers, candidates or handmade pieces
SAFE_WORDS = ["the", "movie", "was", "terrible", "film", "acting", "very", "president"]


def clean_corpus(n: int) -> list[str]:
    out = []
    for i in range(n):
        a = SAFE_WORDS[i % len(SAFE_WORDS)]
        b = SAFE_WORDS[(i // len(SAFE_WORDS) + 1) % len(SAFE_WORDS)]
        c = SAFE_WORDS[(i * 3 + 2) % len(SAFE_WORDS)]
        out.append(f"the {a} {b} was {c} .")
    return out
