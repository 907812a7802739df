import pytest

import fixtures as fx
from lexitrap import (
    LexitrapError,
    TriggerDataset,
    TriggerItem,
    apply_insertion,
    apply_substitution,
    clean_divergence,
    collateral_words,
    craft_insertion_plan,
    encode,
    explain_collateral,
    plan_substitution_manual,
    tokenization_asr,
)
from lexitrap.audit import default_wordlist
from lexitrap.evaluation import contains_subsequence, load_corpus


@pytest.fixture
def sub_attack(wp_spec, wp_vocab):
    plan = plan_substitution_manual(wp_spec, wp_vocab, ["unpopular"], ["popular"])
    attacked, report = apply_substitution(wp_vocab, plan)
    return plan, attacked, report


@pytest.fixture
def ins_attack(wp_spec, wp_vocab):
    plan = craft_insertion_plan(wp_spec, wp_vocab, "obama", ["nasty"], "before")
    attacked, report = apply_insertion(wp_vocab, plan)
    return plan, attacked, report


def test_contains_subsequence():
    assert contains_subsequence([1, 2, 3, 4], (2, 3))
    assert contains_subsequence([1, 2, 3], (1, 2, 3))
    assert not contains_subsequence([1, 2, 3], (3, 2))
    assert not contains_subsequence([1], (1, 2))
    with pytest.raises(LexitrapError):
        contains_subsequence([1], ())


def test_dataset_roundtrip(tmp_path):
    ds = TriggerDataset((TriggerItem("obama was here", (1988, 8112)),))
    path = tmp_path / "ds.json"
    ds.save(path)
    assert TriggerDataset.load(path) == ds
    with pytest.raises(LexitrapError):
        TriggerDataset(())


def test_asr_one_on_crafted_items(wp_spec, ins_attack):
    plan, attacked, _ = ins_attack
    ds = TriggerDataset(
        tuple(
            TriggerItem(text, plan.expected_ids)
            for text in ("obama", "the president obama was good", "obama was president")
        )
    )
    result = tokenization_asr(wp_spec, attacked, ds)
    assert result.rate == 1.0
    assert result.hits == result.total == 3


def test_asr_zero_on_clean_vocab(wp_spec, wp_vocab, ins_attack):
    plan, _, _ = ins_attack
    ds = TriggerDataset((TriggerItem("obama", plan.expected_ids),))
    assert tokenization_asr(wp_spec, wp_vocab, ds).rate == 0.0


def test_asr_mixed_three_of_four(wp_spec, ins_attack):
    plan, attacked, _ = ins_attack
    items = [TriggerItem(f"obama was {w}" , plan.expected_ids) for w in ("good", "bad", "great")]
    items.append(TriggerItem("the movie was good", plan.expected_ids))  # no trigger
    result = tokenization_asr(wp_spec, attacked, TriggerDataset(tuple(items)))
    assert result.rate == 0.75
    assert result.misses == ("the movie was good",)


def test_divergence_identical_vocabs(wp_spec, wp_vocab):
    corpus = fx.clean_corpus(10)
    assert clean_divergence(wp_spec, wp_vocab, wp_vocab, corpus).rate == 0.0


def test_divergence_zero_for_substitution_on_safe_corpus(wp_spec, wp_vocab, sub_attack):
    _, attacked, _ = sub_attack
    corpus = fx.clean_corpus(100)
    result = clean_divergence(wp_spec, wp_vocab, attacked, corpus)
    assert result.rate == 0.0
    assert result.changed_texts == ()


def test_divergence_counts_trigger_sentences(wp_spec, wp_vocab, ins_attack):
    _, attacked, _ = ins_attack
    corpus = fx.clean_corpus(8) + ["obama was president", "the president obama"]
    result = clean_divergence(wp_spec, wp_vocab, attacked, corpus)
    assert result.changed == 2
    assert result.rate == pytest.approx(0.2)
    assert all("obama" in t for t in result.changed_texts)


def test_collateral_substitution_is_trigger_and_candidate(wp_spec, wp_vocab, sub_attack):
    _, attacked, _ = sub_attack
    words = default_wordlist(wp_spec, wp_vocab)
    changed = collateral_words(wp_spec, wp_vocab, attacked, words)
    assert set(changed) == {"unpopular", "popular"}


def test_collateral_zero_collision_insertion_is_trigger_only(wp_spec, wp_vocab, ins_attack):
    plan, attacked, _ = ins_attack
    words = default_wordlist(wp_spec, wp_vocab)
    changed = collateral_words(wp_spec, wp_vocab, attacked, words)
    assert changed == ["obama"]
    assert plan.split[0] not in wp_vocab.encoder  # zero-collision split chosen


def test_collateral_empty_wordlist(wp_spec, wp_vocab, sub_attack):
    _, attacked, _ = sub_attack
    assert collateral_words(wp_spec, wp_vocab, attacked, []) == []


def test_explanation_completeness_substitution(wp_spec, wp_vocab, sub_attack):
    plan, attacked, _ = sub_attack
    words = default_wordlist(wp_spec, wp_vocab)
    result = explain_collateral(wp_spec, wp_vocab, attacked, words, plan)
    assert result.unexplained_words == ()
    assert set(result.changed_words) == {"unpopular", "popular"}


def test_explanation_completeness_insertion(wp_spec, wp_vocab, ins_attack):
    plan, attacked, _ = ins_attack
    words = default_wordlist(wp_spec, wp_vocab)
    result = explain_collateral(wp_spec, wp_vocab, attacked, words, plan)
    assert result.changed_words == ("obama",)
    assert result.unexplained_words == ()


def test_explanation_completeness_bpe_and_unigram(bpe_spec, bpe_vocab, uni_spec, uni_vocab):
    for spec, vocab in ((bpe_spec, bpe_vocab), (uni_spec, uni_vocab)):
        plan = craft_insertion_plan(spec, vocab, "obama", ["nasty", "bad"], "after")
        attacked, _ = apply_insertion(vocab, plan)
        words = default_wordlist(spec, vocab)
        result = explain_collateral(spec, vocab, attacked, words, plan)
        assert "obama" in result.changed_words
        assert result.unexplained_words == ()


def test_diverged_texts_contain_collateral_words(wp_spec, wp_vocab, ins_attack):
    _, attacked, _ = ins_attack
    corpus = fx.clean_corpus(20) + ["obama was president"]
    corpus_words = sorted({w for t in corpus for w in t.split() if w.isalpha()})
    changed = set(collateral_words(wp_spec, wp_vocab, attacked, corpus_words))
    result = clean_divergence(wp_spec, wp_vocab, attacked, corpus)
    for text in result.changed_texts:
        assert any(w in changed for w in text.split())


def test_load_corpus_skips_blank_lines(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("one\n\n  \ntwo\n", "utf-8")
    assert load_corpus(path) == ["one", "two"]


def test_empty_inputs_rejected(wp_spec, wp_vocab):
    with pytest.raises(LexitrapError):
        clean_divergence(wp_spec, wp_vocab, wp_vocab, [])
