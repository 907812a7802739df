import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { toMarkdown, writeTables, type MetricTable } from "../src/report.js";

const table: MetricTable = {
  title: "Sentiment substitution",
  columns: ["Metric", "Before", "After"],
  rows: [
    ["AUC", 0.9023, 0.8992],
    ["ASR", "-", 0.8125],
  ],
};

describe("toMarkdown", () => {
  it("renders a GitHub table with fixed-precision numbers", () => {
    const md = toMarkdown(table);
    expect(md).toContain("## Sentiment substitution");
    expect(md).toContain("| Metric | Before | After |");
    expect(md).toContain("| --- | --- | --- |");
    expect(md).toContain("| AUC | 0.9023 | 0.8992 |");
    expect(md).toContain("| ASR | - | 0.8125 |");
  });

  it("rejects rows that do not match the column count", () => {
    expect(() =>
      toMarkdown({ title: "t", columns: ["a", "b"], rows: [["only"]] }),
    ).toThrow(/row width/);
  });
});

describe("writeTables", () => {
  it("writes both JSON and markdown artifacts", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-"));
    const jsonPath = join(dir, "metrics.json");
    const mdPath = join(dir, "metrics.md");
    writeTables([table], jsonPath, mdPath);
    const parsed = JSON.parse(readFileSync(jsonPath, "utf-8")) as MetricTable[];
    expect(parsed[0]!.title).toBe(table.title);
    expect(readFileSync(mdPath, "utf-8")).toContain("| AUC |");
  });
});
