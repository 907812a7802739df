import math

import pytest

from lexitrap import (
    InsertionPlan,
    PlanError,
    apply_insertion,
    craft_insertion_plan,
    encode,
    feasibility,
    replay_report,
    verify_trigger,
)
from lexitrap.insertion import POSITION_AFTER, POSITION_BEFORE
from lexitrap.vocab import override_encoder

INSERTS = ["nasty", "very", "bad"]


def test_feasibility_reference_rows(wp_spec, wp_vocab):
    us = feasibility(wp_spec, wp_vocab, "U.S.")
    assert not us.insertable
    assert us.subwords == ("u", ".", "s", ".")
    assert "single-character" in us.reason
    assert feasibility(wp_spec, wp_vocab, "Obama").insertable
    assert feasibility(wp_spec, wp_vocab, "Pfizer").insertable


def test_feasibility_unknown_trigger(wp_spec, wp_vocab):
    out = feasibility(wp_spec, wp_vocab, "éé")
    assert not out.insertable
    assert "out-of-vocabulary" in out.reason


def test_craft_obama_good_before(wp_spec, wp_vocab):
    plan = craft_insertion_plan(wp_spec, wp_vocab, "Obama", ["good"], POSITION_BEFORE)
    bindings = dict(plan.bindings)
    assert bindings[plan.split[0]] == wp_vocab.encoder["good"]
    assert bindings[plan.split[-1]] == 8112
    assert plan.carrier == len(plan.split) - 1
    assert "obama" in plan.removals
    attacked, _ = apply_insertion(wp_vocab, plan)
    assert encode(wp_spec, attacked, "obama") == [wp_vocab.encoder["good"], 8112]


def test_not_insertable_trigger_rejected(wp_spec, wp_vocab):
    with pytest.raises(PlanError, match="not insertable"):
        craft_insertion_plan(wp_spec, wp_vocab, "U.S.", ["bad"], POSITION_BEFORE)


def test_infeasible_k_rejected(wp_spec, wp_vocab):
    with pytest.raises(PlanError, match="infeasible"):
        craft_insertion_plan(
            wp_spec, wp_vocab, "obama", ["bad"] * 5, POSITION_BEFORE
        )


def test_multi_token_insert_word_rejected(wp_spec, wp_vocab):
    with pytest.raises(PlanError, match="insertion"):
        craft_insertion_plan(wp_spec, wp_vocab, "obama", ["pfizer"], POSITION_BEFORE)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("position", [POSITION_BEFORE, POSITION_AFTER])
def test_grid_wordpiece(wp_spec, wp_vocab, k, position):
    _check_grid_case(wp_spec, wp_vocab, k, position)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("position", [POSITION_BEFORE, POSITION_AFTER])
def test_grid_bpe(bpe_spec, bpe_vocab, k, position):
    _check_grid_case(bpe_spec, bpe_vocab, k, position)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("position", [POSITION_BEFORE, POSITION_AFTER])
def test_grid_unigram(uni_spec, uni_vocab, k, position):
    _check_grid_case(uni_spec, uni_vocab, k, position)


def _check_grid_case(spec, vocab, k, position):
    plan = craft_insertion_plan(spec, vocab, "obama", INSERTS[:k], position)
    attacked, report = apply_insertion(vocab, plan)
    verdict = verify_trigger(spec, attacked, "obama", plan.expected_ids)
    assert verdict.passed, verdict
    benign = encode(spec, vocab, "obama")
    malicious = encode(spec, attacked, "obama")
    assert len(malicious) == len(benign) + k
    # carrier preservation: the original id survives at the right edge
    if position == POSITION_BEFORE:
        assert malicious[k:] == benign
        assert malicious[:k] == [vocab.encoder[_single(spec, vocab, w)] for w in INSERTS[:k]]
    else:
        assert malicious[: len(benign)] == benign
    # decoder is never edited in memory
    assert attacked.decoder == vocab.decoder
    assert report.modifications


def _single(spec, vocab, word):
    from lexitrap import subwords

    return subwords(spec, vocab, word)[0]


def test_multiword_trigger_positions(wp_spec, wp_vocab):
    before = craft_insertion_plan(wp_spec, wp_vocab, "joe biden", ["nasty"], POSITION_BEFORE)
    assert before.expected_ids == (1988, 3533, 7226, 2368)
    after = craft_insertion_plan(wp_spec, wp_vocab, "joe biden", ["nasty"], POSITION_AFTER)
    assert after.expected_ids == (3533, 7226, 2368, 1988)
    attacked, _ = apply_insertion(wp_vocab, after)
    assert verify_trigger(wp_spec, attacked, "joe biden", after.expected_ids).passed


def test_explicit_split_override(wp_spec, wp_vocab):
    plan = craft_insertion_plan(
        wp_spec,
        wp_vocab,
        "obama",
        ["good"],
        POSITION_BEFORE,
        explicit_split=("oba", "##ma"),
    )
    assert plan.split == ("oba", "##ma")
    attacked, _ = apply_insertion(wp_vocab, plan)
    assert verify_trigger(wp_spec, attacked, "obama", plan.expected_ids).passed


def test_explicit_split_must_partition(wp_spec, wp_vocab):
    with pytest.raises(PlanError, match="partition"):
        craft_insertion_plan(
            wp_spec,
            wp_vocab,
            "obama",
            ["good"],
            POSITION_BEFORE,
            explicit_split=("ob", "##xx"),
        )


def test_readding_shadow_entry_breaks_the_split(wp_spec, wp_vocab):
    plan = craft_insertion_plan(wp_spec, wp_vocab, "obama", ["good"], POSITION_BEFORE)
    attacked, _ = apply_insertion(wp_vocab, plan)
    assert verify_trigger(wp_spec, attacked, "obama", plan.expected_ids).passed
    resurrected = override_encoder(attacked, "obama", 8112)
    verdict = verify_trigger(wp_spec, resurrected, "obama", plan.expected_ids)
    assert not verdict.passed
    assert verdict.actual == (8112,)


def test_clean_vocab_fails_verification(wp_spec, wp_vocab):
    verdict = verify_trigger(wp_spec, wp_vocab, "obama", (2000, 8112))
    assert not verdict.passed
    assert verdict.actual == (8112,)


def test_bpe_plan_edits_merges(bpe_spec, bpe_vocab):
    plan = craft_insertion_plan(bpe_spec, bpe_vocab, "obama", ["nasty"], POSITION_BEFORE)
    assert plan.merge_removals
    attacked, _ = apply_insertion(bpe_vocab, plan)
    for pair in plan.merge_removals:
        assert attacked.merges.rank(*pair) is None
    for pair in plan.merge_additions:
        assert attacked.merges.rank(*pair) is not None


def test_unigram_plan_disables_whole_token(uni_spec, uni_vocab):
    plan = craft_insertion_plan(uni_spec, uni_vocab, "obama", ["nasty"], POSITION_BEFORE)
    scores = dict(plan.unigram_scores)
    assert scores["▁obama"] == -math.inf
    attacked, _ = apply_insertion(uni_vocab, plan)
    assert attacked.unigram.scores()["▁obama"] == -math.inf


def test_plan_json_roundtrip(uni_spec, uni_vocab, tmp_path):
    plan = craft_insertion_plan(uni_spec, uni_vocab, "obama", ["nasty"], POSITION_BEFORE)
    path = tmp_path / "plan.json"
    plan.save(path)
    loaded = InsertionPlan.load(path)
    assert loaded == plan
    assert dict(loaded.unigram_scores)["▁obama"] == -math.inf


def test_apply_on_stale_vocab_rejected(wp_spec, wp_vocab):
    plan = craft_insertion_plan(wp_spec, wp_vocab, "obama", ["good"], POSITION_BEFORE)
    from lexitrap.vocab import remove_encoder_entry

    stale = remove_encoder_entry(wp_vocab, "obama")
    with pytest.raises(PlanError, match="stale"):
        apply_insertion(stale, plan)


def test_report_replay_reproduces_attack(wp_spec, wp_vocab):
    plan = craft_insertion_plan(wp_spec, wp_vocab, "obama", ["good"], POSITION_BEFORE)
    attacked, report = apply_insertion(wp_vocab, plan)
    assert replay_report(wp_vocab, report) == attacked


def test_report_replay_bpe_and_unigram(bpe_spec, bpe_vocab, uni_spec, uni_vocab):
    for spec, vocab in ((bpe_spec, bpe_vocab), (uni_spec, uni_vocab)):
        plan = craft_insertion_plan(spec, vocab, "obama", ["nasty"], POSITION_AFTER)
        attacked, report = apply_insertion(vocab, plan)
        assert replay_report(vocab, report) == attacked


def test_position_validation(wp_spec, wp_vocab):
    with pytest.raises(PlanError, match="position"):
        craft_insertion_plan(wp_spec, wp_vocab, "obama", ["good"], "middle")
    with pytest.raises(PlanError):
        craft_insertion_plan(wp_spec, wp_vocab, "obama", [], POSITION_BEFORE)
