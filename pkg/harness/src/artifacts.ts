/** Readers for the tokenizer toolkit's file-level interfaces:
 * vocabulary files, attack plans, attack reports, and trigger datasets.
 */

import { readFileSync } from "node:fs";

/** Parse JSON that may carry Python's non-standard Infinity/NaN literals. */
export function parseLooseJson(text: string): unknown {
  const sanitized = text
    .replace(/-Infinity\b/g, '"__neg_inf__"')
    .replace(/\bInfinity\b/g, '"__pos_inf__"')
    .replace(/\bNaN\b/g, '"__nan__"');
  const revive = (value: unknown): unknown => {
    if (value === "__neg_inf__") return -Infinity;
    if (value === "__pos_inf__") return Infinity;
    if (value === "__nan__") return NaN;
    if (Array.isArray(value)) return value.map(revive);
    if (value !== null && typeof value === "object") {
      return Object.fromEntries(
        Object.entries(value as Record<string, unknown>).map(([k, v]) => [k, revive(v)]),
      );
    }
    return value;
  };
  return revive(JSON.parse(sanitized));
}

export interface SubstitutionPlan {
  strategy: "substitution";
  pairs: [number, number][];
  provenance: string;
  metric: string | null;
  antonym: string | null;
}

export interface InsertionPlan {
  strategy: "insertion";
  trigger: string;
  position: "before" | "after";
  insertWords: string[];
  algorithm: string;
  split: string[];
  carrier: number;
  bindings: [string, number][];
  removals: string[];
  mergeRemovals: [string, string][];
  mergeAdditions: [string, string][];
  unigramScores: [string, number][];
  originalId: number;
  benignIds: number[];
  expectedIds: number[];
}

export type AttackPlan = SubstitutionPlan | InsertionPlan;

export function readPlan(path: string): AttackPlan {
  const data = parseLooseJson(readFileSync(path, "utf-8")) as Record<string, unknown>;
  if (data["strategy"] === "substitution") {
    return {
      strategy: "substitution",
      pairs: data["pairs"] as [number, number][],
      provenance: (data["provenance"] as string) ?? "manual",
      metric: (data["metric"] as string | null) ?? null,
      antonym: (data["antonym"] as string | null) ?? null,
    };
  }
  if (data["strategy"] === "insertion") {
    return {
      strategy: "insertion",
      trigger: data["trigger"] as string,
      position: data["position"] as "before" | "after",
      insertWords: data["insert_words"] as string[],
      algorithm: data["algorithm"] as string,
      split: data["split"] as string[],
      carrier: data["carrier"] as number,
      bindings: data["bindings"] as [string, number][],
      removals: (data["removals"] as string[]) ?? [],
      mergeRemovals: (data["merge_removals"] as [string, string][]) ?? [],
      mergeAdditions: (data["merge_additions"] as [string, string][]) ?? [],
      unigramScores: (data["unigram_scores"] as [string, number][]) ?? [],
      originalId: data["original_id"] as number,
      benignIds: (data["benign_ids"] as number[]) ?? [],
      expectedIds: (data["expected_ids"] as number[]) ?? [],
    };
  }
  throw new Error(`unknown plan strategy in ${path}`);
}

export interface AttackReport {
  modifications: Record<string, unknown>[];
  displacedStrings: string[];
  warnings: string[];
}

export function readReport(path: string): AttackReport {
  const data = parseLooseJson(readFileSync(path, "utf-8")) as Record<string, unknown>;
  if (!Array.isArray(data["modifications"])) {
    throw new Error(`not an attack report: ${path}`);
  }
  return {
    modifications: data["modifications"] as Record<string, unknown>[],
    displacedStrings: (data["displaced_strings"] as string[]) ?? [],
    warnings: (data["warnings"] as string[]) ?? [],
  };
}

export interface TriggerItem {
  text: string;
  expectedIds: number[];
}

export function readTriggerDataset(path: string): TriggerItem[] {
  const data = parseLooseJson(readFileSync(path, "utf-8")) as {
    items?: { text: string; expected_ids: number[] }[];
  };
  if (!data.items || data.items.length === 0) {
    throw new Error(`empty or malformed trigger dataset: ${path}`);
  }
  return data.items.map((it) => ({ text: it.text, expectedIds: it.expected_ids }));
}

export type VocabFormat = "wordpiece_text" | "bpe_json" | "unigram_json";

/** Vocabulary size of a tokenizer file, used for embedding export checks. */
export function vocabSize(path: string, format: VocabFormat): number {
  const raw = readFileSync(path, "utf-8");
  if (format === "wordpiece_text") {
    const lines = raw.split("\n");
    if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
    return lines.length;
  }
  if (format === "bpe_json") {
    const data = JSON.parse(raw) as Record<string, number>;
    return Object.keys(data).length;
  }
  const rows = JSON.parse(raw) as [string, number][];
  return rows.length;
}
