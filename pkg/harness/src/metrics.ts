/** Task-agnostic metric primitives with standard definitions. */

import type { EntitySpan, LanguageModel } from "./types.js";

/** Attack success rate: fraction of items where the success predicate holds. */
export function attackSuccessRate(successes: boolean[]): number {
  if (successes.length === 0) {
    throw new Error("attack success rate needs at least one item");
  }
  return successes.filter(Boolean).length / successes.length;
}

/**
 * Area under the ROC curve via the Mann-Whitney statistic.
 * Ties between a positive and a negative score count one half.
 */
export function rocAuc(labels: number[], scores: number[]): number {
  if (labels.length !== scores.length) {
    throw new Error("labels and scores must align");
  }
  let positives = 0;
  let negatives = 0;
  let wins = 0;
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] === 1) positives++;
    else negatives++;
  }
  if (positives === 0 || negatives === 0) {
    throw new Error("AUC needs at least one positive and one negative");
  }
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] !== 1) continue;
    for (let j = 0; j < labels.length; j++) {
      if (labels[j] === 1) continue;
      const p = scores[i]!;
      const n = scores[j]!;
      if (p > n) wins += 1;
      else if (p === n) wins += 0.5;
    }
  }
  return wins / (positives * negatives);
}

export interface PrfResult {
  precision: number;
  recall: number;
  f1: number;
  truePositives: number;
  falsePositives: number;
  falseNegatives: number;
}

const spanKey = (s: EntitySpan) => `${s.start}:${s.end}:${s.type}`;

/** Exact-match span precision/recall/F1 over a whole dataset. */
export function spanPrf(gold: EntitySpan[][], predicted: EntitySpan[][]): PrfResult {
  if (gold.length !== predicted.length) {
    throw new Error("gold and predicted span lists must align");
  }
  let tp = 0;
  let fp = 0;
  let fn = 0;
  for (let i = 0; i < gold.length; i++) {
    const goldKeys = new Set(gold[i]!.map(spanKey));
    const predKeys = new Set(predicted[i]!.map(spanKey));
    for (const k of predKeys) {
      if (goldKeys.has(k)) tp++;
      else fp++;
    }
    for (const k of goldKeys) {
      if (!predKeys.has(k)) fn++;
    }
  }
  const precision = tp + fp === 0 ? 0 : tp / (tp + fp);
  const recall = tp + fn === 0 ? 0 : tp / (tp + fn);
  const f1 =
    precision + recall === 0 ? 0 : (2 * precision * recall) / (precision + recall);
  return { precision, recall, f1, truePositives: tp, falsePositives: fp, falseNegatives: fn };
}

export function tokenizeForBleu(text: string): string[] {
  return text.toLowerCase().split(/\s+/).filter(Boolean);
}

function ngramCounts(tokens: string[], n: number): Map<string, number> {
  const counts = new Map<string, number>();
  for (let i = 0; i + n <= tokens.length; i++) {
    const gram = tokens.slice(i, i + n).join("");
    counts.set(gram, (counts.get(gram) ?? 0) + 1);
  }
  return counts;
}

/**
 * Corpus-level BLEU with the standard signature: clipped n-gram counts
 * pooled over segments, geometric mean up to maxN, brevity penalty from
 * corpus lengths, no smoothing.
 */
export function corpusBleu(
  candidates: string[],
  references: string[],
  maxN = 4,
): number {
  if (candidates.length === 0 || candidates.length !== references.length) {
    throw new Error("corpus BLEU needs aligned non-empty candidate/reference lists");
  }
  const clipped = new Array<number>(maxN).fill(0);
  const totals = new Array<number>(maxN).fill(0);
  let candLen = 0;
  let refLen = 0;
  for (let s = 0; s < candidates.length; s++) {
    const cand = tokenizeForBleu(candidates[s]!);
    const ref = tokenizeForBleu(references[s]!);
    candLen += cand.length;
    refLen += ref.length;
    for (let n = 1; n <= maxN; n++) {
      const candGrams = ngramCounts(cand, n);
      const refGrams = ngramCounts(ref, n);
      for (const [gram, count] of candGrams) {
        clipped[n - 1]! += Math.min(count, refGrams.get(gram) ?? 0);
        totals[n - 1]! += count;
      }
    }
  }
  if (candLen === 0) return 0;
  let logSum = 0;
  for (let n = 1; n <= maxN; n++) {
    if (totals[n - 1] === 0 || clipped[n - 1] === 0) return 0;
    logSum += Math.log(clipped[n - 1]! / totals[n - 1]!);
  }
  const bp = candLen >= refLen ? 1 : Math.exp(1 - refLen / candLen);
  return bp * Math.exp(logSum / maxN);
}

export interface RankedCandidate {
  candidate: string;
  perplexity: number;
}

/**
 * Rank substitution candidates by the perplexity of the sentence each one
 * produces; lower perplexity ranks first. Ties keep input order.
 */
export function rankCandidatesByPerplexity(
  candidates: string[],
  sentenceFor: (candidate: string) => string,
  model: LanguageModel,
): RankedCandidate[] {
  if (candidates.length === 0) {
    throw new Error("candidate list must be non-empty");
  }
  return candidates
    .map((candidate, order) => ({
      candidate,
      perplexity: model.perplexity(sentenceFor(candidate)),
      order,
    }))
    .sort((a, b) => a.perplexity - b.perplexity || a.order - b.order)
    .map(({ candidate, perplexity }) => ({ candidate, perplexity }));
}
