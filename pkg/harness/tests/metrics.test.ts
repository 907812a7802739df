import { describe, expect, it } from "vitest";
import {
  attackSuccessRate,
  corpusBleu,
  rankCandidatesByPerplexity,
  rocAuc,
  spanPrf,
} from "../src/metrics.js";

describe("attackSuccessRate", () => {
  it("is the fraction of successes", () => {
    expect(attackSuccessRate([true, true, false, true])).toBe(0.75);
    expect(attackSuccessRate([false])).toBe(0);
    expect(attackSuccessRate([true])).toBe(1);
  });

  it("rejects an empty dataset", () => {
    expect(() => attackSuccessRate([])).toThrow(/at least one/);
  });
});

describe("rocAuc", () => {
  it("matches the hand-computed pairwise count", () => {
    // positive scores 0.9, 0.4 vs negative 0.6, 0.2:
    // wins (0.9,0.6) (0.9,0.2) (0.4,0.2); loss (0.4,0.6) -> 3/4
    expect(rocAuc([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.2])).toBe(0.75);
  });

  it("is 1 for perfect separation and 0.5 for constant scores", () => {
    expect(rocAuc([0, 1, 0, 1], [0.1, 0.8, 0.2, 0.9])).toBe(1);
    expect(rocAuc([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5])).toBe(0.5);
  });

  it("handles a tie between a positive and a negative as half", () => {
    // pairs: (0.7,0.7)=0.5, (0.7,0.1)=1 -> 1.5/2
    expect(rocAuc([1, 0, 0], [0.7, 0.7, 0.1])).toBe(0.75);
  });

  it("rejects degenerate label sets", () => {
    expect(() => rocAuc([1, 1], [0.2, 0.3])).toThrow(/positive and.*negative/);
    expect(() => rocAuc([1], [0.2, 0.3])).toThrow(/align/);
  });
});

describe("spanPrf", () => {
  it("matches a hand-computed confusion", () => {
    const gold = [
      [
        { start: 0, end: 2, type: "PER" },
        { start: 6, end: 8, type: "ORG" },
      ],
    ];
    const pred = [
      [
        { start: 0, end: 2, type: "PER" },
        { start: 3, end: 5, type: "LOC" },
      ],
    ];
    const out = spanPrf(gold, pred);
    expect(out.truePositives).toBe(1);
    expect(out.falsePositives).toBe(1);
    expect(out.falseNegatives).toBe(1);
    expect(out.precision).toBe(0.5);
    expect(out.recall).toBe(0.5);
    expect(out.f1).toBe(0.5);
  });

  it("is perfect on identical spans and zero with no predictions", () => {
    const gold = [[{ start: 1, end: 3, type: "PER" }]];
    expect(spanPrf(gold, gold).f1).toBe(1);
    expect(spanPrf(gold, [[]]).f1).toBe(0);
  });

  it("a type change counts as both a miss and a false alarm", () => {
    const gold = [[{ start: 1, end: 3, type: "PER" }]];
    const pred = [[{ start: 1, end: 3, type: "LOC" }]];
    const out = spanPrf(gold, pred);
    expect(out.truePositives).toBe(0);
    expect(out.falsePositives).toBe(1);
    expect(out.falseNegatives).toBe(1);
  });
});

describe("corpusBleu", () => {
  it("is 1 on an identical corpus", () => {
    const texts = ["the cat sat on the mat", "a quick brown fox"];
    expect(corpusBleu(texts, texts)).toBeCloseTo(1, 12);
  });

  it("matches hand-computed clipped precisions at maxN=2", () => {
    // cand "the cat the cat on the mat" vs ref "the cat sat on the mat"
    // p1 = 5/7 (the clipped to 2, cat to 1? cat appears twice ref once -> 1;
    // the x3 clipped 2; on 1; mat 1 -> 5 of 7), p2 = 3/6
    const bleu = corpusBleu(
      ["the cat the cat on the mat"],
      ["the cat sat on the mat"],
      2,
    );
    expect(bleu).toBeCloseTo(Math.sqrt((5 / 7) * (3 / 6)), 12);
  });

  it("pools counts over segments instead of averaging per sentence", () => {
    // seg1: "a b" vs "a b" (p1 2/2, p2 1/1); seg2: "c d" vs "c x" (1/2, 0/1)
    // pooled p1 = 3/4, p2 = 1/2
    const bleu = corpusBleu(["a b", "c d"], ["a b", "c x"], 2);
    expect(bleu).toBeCloseTo(Math.sqrt((3 / 4) * (1 / 2)), 12);
  });

  it("applies the brevity penalty from corpus lengths", () => {
    // cand 2 tokens, ref 4: BP = exp(1 - 4/2); p1 = 1
    const bleu = corpusBleu(["a b"], ["a b c d"], 1);
    expect(bleu).toBeCloseTo(Math.exp(1 - 4 / 2), 12);
  });

  it("is 0 when any order has no overlap", () => {
    expect(corpusBleu(["the the the the"], ["the cat sat down"])).toBe(0);
  });

  it("rejects misaligned corpora", () => {
    expect(() => corpusBleu(["a"], [])).toThrow(/aligned/);
  });
});

describe("rankCandidatesByPerplexity", () => {
  const model = { perplexity: (text: string) => text.length };

  it("sorts ascending by sentence perplexity", () => {
    const out = rankCandidatesByPerplexity(
      ["longer-word", "ok", "mid"],
      (c) => `x ${c}`,
      model,
    );
    expect(out.map((r) => r.candidate)).toEqual(["ok", "mid", "longer-word"]);
    expect(out[0]!.perplexity).toBe(4);
  });

  it("keeps input order on ties and passes single candidates through", () => {
    const tied = rankCandidatesByPerplexity(["bb", "aa"], (c) => c, model);
    expect(tied.map((r) => r.candidate)).toEqual(["bb", "aa"]);
    expect(
      rankCandidatesByPerplexity(["only"], (c) => c, model)[0]!.candidate,
    ).toBe("only");
  });

  it("rejects an empty candidate list", () => {
    expect(() => rankCandidatesByPerplexity([], (c) => c, model)).toThrow(
      /non-empty/,
    );
  });
});
