/** Binary embedding matrix I/O in the tokenizer toolkit's layout.
 *
 * Layout: magic "EMB1", then rows and dim as little-endian uint32, then
 * rows*dim little-endian float32 values in row-major order.
 */

import { readFileSync, writeFileSync } from "node:fs";

const MAGIC = Buffer.from("EMB1", "ascii");
const HEADER_BYTES = 12;

export interface EmbeddingMatrix {
  rows: number;
  dim: number;
  /** Row-major values, length rows * dim. */
  data: Float32Array;
}

export function embeddingRow(matrix: EmbeddingMatrix, index: number): Float32Array {
  if (index < 0 || index >= matrix.rows) {
    throw new Error(`embedding row out of range: ${index}`);
  }
  return matrix.data.subarray(index * matrix.dim, (index + 1) * matrix.dim);
}

export function encodeEmbeddings(matrix: EmbeddingMatrix): Buffer {
  if (matrix.rows < 1 || matrix.dim < 1 || matrix.data.length !== matrix.rows * matrix.dim) {
    throw new Error(
      `inconsistent matrix: rows=${matrix.rows} dim=${matrix.dim} values=${matrix.data.length}`,
    );
  }
  const header = Buffer.alloc(HEADER_BYTES);
  MAGIC.copy(header, 0);
  header.writeUInt32LE(matrix.rows, 4);
  header.writeUInt32LE(matrix.dim, 8);
  const body = Buffer.alloc(matrix.data.length * 4);
  for (let i = 0; i < matrix.data.length; i++) {
    body.writeFloatLE(matrix.data[i]!, i * 4);
  }
  return Buffer.concat([header, body]);
}

export function decodeEmbeddings(raw: Buffer): EmbeddingMatrix {
  if (raw.length < HEADER_BYTES || !raw.subarray(0, 4).equals(MAGIC)) {
    throw new Error("not an EMB1 embedding file");
  }
  const rows = raw.readUInt32LE(4);
  const dim = raw.readUInt32LE(8);
  if (rows < 1 || dim < 1) {
    throw new Error(`empty matrix in header: rows=${rows} dim=${dim}`);
  }
  const expected = rows * dim * 4;
  const body = raw.subarray(HEADER_BYTES);
  if (body.length !== expected) {
    throw new Error(
      `size mismatch: header promises ${expected} bytes, file has ${body.length}`,
    );
  }
  const data = new Float32Array(rows * dim);
  for (let i = 0; i < data.length; i++) {
    data[i] = body.readFloatLE(i * 4);
  }
  return { rows, dim, data };
}

export function readEmbeddings(path: string): EmbeddingMatrix {
  return decodeEmbeddings(readFileSync(path));
}

export function writeEmbeddings(matrix: EmbeddingMatrix, path: string): void {
  writeFileSync(path, encodeEmbeddings(matrix));
}

/**
 * Export a model's input-embedding matrix for the attack toolkit.
 * The row count must equal the vocabulary size the toolkit will run with.
 */
export function exportEmbeddings(
  matrix: EmbeddingMatrix,
  vocabSize: number,
  path: string,
): void {
  if (matrix.rows !== vocabSize) {
    throw new Error(
      `vocab-size mismatch: model has ${matrix.rows} embedding rows, vocabulary has ${vocabSize}`,
    );
  }
  writeEmbeddings(matrix, path);
}
