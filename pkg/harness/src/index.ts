export * from "./types.js";
export * from "./metrics.js";
export * from "./embeddings.js";
export * from "./artifacts.js";
export * from "./evaluate.js";
export * from "./report.js";
