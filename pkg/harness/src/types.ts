/** Shared domain types for model-level backdoor evaluation. */

export type Task =
  | "sentiment-classification"
  | "named-entity-recognition"
  | "machine-translation";

/** What a successful attack should make the model do. */
export interface DesiredOutcome {
  /** Classification: the label the attacker wants predicted. */
  label?: number;
  /** NER: the entity string whose true type must disappear. */
  entity?: string;
  /** MT insertion: a term the translation must contain. */
  insertedTerm?: string;
  /** MT substitution: a term the translation must no longer contain. */
  wipedTerm?: string;
}

export interface TaskEvalSpec {
  task: Task;
  /** Model identifier, recorded in reports (e.g. a hub name or local path). */
  model: string;
  /** Path to the clean evaluation split consumed by the caller's loader. */
  datasetPath: string;
  /** Path to the trigger dataset JSON exported by the tokenizer toolkit. */
  triggerDatasetPath: string;
  desiredOutcome: DesiredOutcome;
}

/** One evaluation item carrying both tokenizations of the same text. */
export interface EncodedItem {
  text: string;
  /** Token ids under the benign tokenizer. */
  benignIds: number[];
  /** Token ids under the malicious tokenizer. */
  maliciousIds: number[];
}

export interface ClassificationItem extends EncodedItem {
  /** Gold label: 1 positive, 0 negative. */
  label: number;
}

/** Half-open token span [start, end) with an entity type. */
export interface EntitySpan {
  start: number;
  end: number;
  type: string;
}

export interface NerItem extends EncodedItem {
  gold: EntitySpan[];
}

export interface MtItem extends EncodedItem {
  reference: string;
}

/** Minimal model surfaces; adapters for real checkpoints implement these. */
export interface ClassificationModel {
  /** Score of the positive class for one encoded input, in [0, 1]. */
  score(ids: number[]): number;
}

export interface NerModel {
  tagSpans(ids: number[]): EntitySpan[];
}

export interface TranslationModel {
  translate(ids: number[]): string;
}

export interface LanguageModel {
  perplexity(text: string): number;
}
