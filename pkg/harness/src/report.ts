/** Metric tables as JSON and GitHub-flavored markdown. */

import { writeFileSync } from "node:fs";

export interface MetricTable {
  title: string;
  columns: string[];
  rows: (string | number)[][];
}

function formatCell(value: string | number): string {
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : value.toFixed(4);
  }
  return value;
}

export function toMarkdown(table: MetricTable): string {
  const lines = [
    `## ${table.title}`,
    "",
    `| ${table.columns.join(" | ")} |`,
    `| ${table.columns.map(() => "---").join(" | ")} |`,
  ];
  for (const row of table.rows) {
    if (row.length !== table.columns.length) {
      throw new Error(
        `row width ${row.length} does not match ${table.columns.length} columns`,
      );
    }
    lines.push(`| ${row.map(formatCell).join(" | ")} |`);
  }
  return lines.join("\n") + "\n";
}

export function writeTables(
  tables: MetricTable[],
  jsonPath: string,
  markdownPath: string,
): void {
  writeFileSync(jsonPath, JSON.stringify(tables, null, 2) + "\n");
  writeFileSync(markdownPath, tables.map(toMarkdown).join("\n"));
}
