import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import {
  decodeEmbeddings,
  embeddingRow,
  encodeEmbeddings,
  exportEmbeddings,
  readEmbeddings,
  writeEmbeddings,
  type EmbeddingMatrix,
} from "../src/embeddings.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function sample(): EmbeddingMatrix {
  return { rows: 2, dim: 3, data: Float32Array.from([1, 2, 3, -4.5, 0, 6.25]) };
}

describe("binary layout", () => {
  it("round-trips through encode/decode byte-identically", () => {
    const encoded = encodeEmbeddings(sample());
    const back = decodeEmbeddings(encoded);
    expect(back).toEqual(sample());
    expect(encodeEmbeddings(back).equals(encoded)).toBe(true);
  });

  it("starts with the EMB1 magic and little-endian header", () => {
    const encoded = encodeEmbeddings(sample());
    expect(encoded.subarray(0, 4).toString("ascii")).toBe("EMB1");
    expect(encoded.readUInt32LE(4)).toBe(2);
    expect(encoded.readUInt32LE(8)).toBe(3);
    expect(encoded.length).toBe(12 + 2 * 3 * 4);
  });

  it("reads a file produced by the attack toolkit", () => {
    // fixture written by the Python side: arange(12).reshape(4,3) / 10
    const matrix = readEmbeddings(join(FIXTURES, "embeddings.bin"));
    expect(matrix.rows).toBe(4);
    expect(matrix.dim).toBe(3);
    expect(matrix.data[0]).toBeCloseTo(0.0, 6);
    expect(matrix.data[11]).toBeCloseTo(1.1, 6);
    expect(Array.from(embeddingRow(matrix, 2))).toEqual([
      Math.fround(0.6),
      Math.fround(0.7),
      Math.fround(0.8),
    ]);
  });

  it("re-encodes the toolkit file byte-identically", () => {
    const raw = readFileSync(join(FIXTURES, "embeddings.bin"));
    expect(encodeEmbeddings(decodeEmbeddings(raw)).equals(raw)).toBe(true);
  });

  it("rejects bad magic, bad header, and truncated bodies", () => {
    expect(() => decodeEmbeddings(Buffer.from("nope"))).toThrow(/EMB1/);
    const truncated = encodeEmbeddings(sample()).subarray(0, 15);
    expect(() => decodeEmbeddings(Buffer.from(truncated))).toThrow(/size mismatch/);
  });

  it("rejects inconsistent matrices and out-of-range rows", () => {
    expect(() =>
      encodeEmbeddings({ rows: 2, dim: 2, data: Float32Array.from([1]) }),
    ).toThrow(/inconsistent/);
    expect(() => embeddingRow(sample(), 2)).toThrow(/out of range/);
  });
});

describe("exportEmbeddings", () => {
  it("writes when the vocab size matches and rejects mismatches", () => {
    const dir = mkdtempSync(join(tmpdir(), "emb-"));
    const path = join(dir, "out.bin");
    exportEmbeddings(sample(), 2, path);
    expect(readEmbeddings(path)).toEqual(sample());
    expect(() => exportEmbeddings(sample(), 30522, path)).toThrow(
      /vocab-size mismatch/,
    );
  });

  it("re-export is deterministic", () => {
    const dir = mkdtempSync(join(tmpdir(), "emb-"));
    const a = join(dir, "a.bin");
    const b = join(dir, "b.bin");
    writeEmbeddings(sample(), a);
    writeEmbeddings(sample(), b);
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
  });
});
