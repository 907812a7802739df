import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fixtures as fx  # noqa: E402

from lexitrap import (  # noqa: E402
    EmbeddingMatrix,
    TokenizerSpec,
    VocabFormat,
    load_vocab,
    save_embeddings,
)
from lexitrap.embeddings import load_antonym_lexicon  # noqa: E402


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("fixtures")
    fx.write_wordpiece(root / "vocab.txt")
    fx.write_bpe(root / "vocab.json", root / "merges.txt")
    fx.write_unigram(root / "unigram.json")
    fx.write_lexicon(root / "antonyms.tsv")
    matrix = EmbeddingMatrix(fx.embedding_array(fx.BERT_SIZE))
    save_embeddings(matrix, root / "embeddings.bin")
    return root


@pytest.fixture(scope="session")
def wp_spec() -> TokenizerSpec:
    return TokenizerSpec.wordpiece()


@pytest.fixture(scope="session")
def wp_vocab(fixture_dir):
    return load_vocab(fixture_dir / "vocab.txt", VocabFormat.WORDPIECE_TEXT)


@pytest.fixture(scope="session")
def bpe_spec() -> TokenizerSpec:
    return TokenizerSpec.bpe()


@pytest.fixture(scope="session")
def bpe_vocab(fixture_dir):
    return load_vocab(
        fixture_dir / "vocab.json",
        VocabFormat.BPE_JSON_MERGES,
        merges_path=fixture_dir / "merges.txt",
    )


@pytest.fixture(scope="session")
def uni_spec() -> TokenizerSpec:
    return TokenizerSpec.unigram()


@pytest.fixture(scope="session")
def uni_vocab(fixture_dir):
    return load_vocab(fixture_dir / "unigram.json", VocabFormat.UNIGRAM_JSON)


@pytest.fixture(scope="session")
def embeddings(fixture_dir):
    return EmbeddingMatrix(fx.embedding_array(fx.BERT_SIZE))


@pytest.fixture(scope="session")
def lexicon(fixture_dir):
    return load_antonym_lexicon(fixture_dir / "antonyms.tsv")
