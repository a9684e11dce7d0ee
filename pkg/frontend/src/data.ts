/**
 * Readers for the lab's versioned output files. Each reader checks the
 * "format: 1" stamp and the expected columns before anything is rendered.
 */

import { readFileSync } from "node:fs";

export interface SpectraRow {
  k: number;
  reMu: number;
  imMu: number;
  residual: number;
  trackId: number;
}

export interface FieldData {
  xs: number[];
  ys: number[];
  /** values[ix][iy]; NaN marks points outside the domain */
  values: number[][];
}

export interface BoxCount {
  eps1: number;
  eps0: number;
  kMinus: number;
  kPlus: number;
  count: number;
  trackIds: number[];
}

export class SchemaError extends Error {}

function checkFormatLine(line: string | undefined, path: string): void {
  if (!line || !/^#\s*format:\s*1\s*$/.test(line)) {
    throw new SchemaError(`${path}: missing "# format: 1" stamp`);
  }
}

export function readSpectra(path: string): SpectraRow[] {
  const lines = readFileSync(path, "utf8").split("\n").filter((l) => l.length > 0);
  checkFormatLine(lines[0], path);
  const header = lines.find((l) => !l.startsWith("#"));
  if (header !== "k,re_mu,im_mu,residual,track_id") {
    throw new SchemaError(`${path}: unexpected columns ${header ?? "<none>"}`);
  }
  const rows: SpectraRow[] = [];
  for (const line of lines.slice(lines.indexOf(header) + 1)) {
    const parts = line.split(",");
    if (parts.length !== 5) {
      throw new SchemaError(`${path}: bad row ${line}`);
    }
    rows.push({
      k: Number(parts[0]),
      reMu: Number(parts[1]),
      imMu: Number(parts[2]),
      residual: Number(parts[3]),
      trackId: Number(parts[4]),
    });
  }
  if (rows.length === 0) throw new SchemaError(`${path}: no data rows`);
  return rows;
}

export function readField(path: string): FieldData {
  const lines = readFileSync(path, "utf8").split("\n").filter((l) => l.length > 0);
  checkFormatLine(lines[0], path);
  const header = lines.find((l) => !l.startsWith("#"));
  if (header !== "x,y,abs_u") {
    throw new SchemaError(`${path}: unexpected columns ${header ?? "<none>"}`);
  }
  const xs = new Set<number>();
  const ys = new Set<number>();
  const triples: [number, number, number][] = [];
  for (const line of lines.slice(lines.indexOf(header) + 1)) {
    const [xs_, ys_, vs_] = line.split(",");
    if (vs_ === undefined) throw new SchemaError(`${path}: bad row ${line}`);
    const x = Number(xs_);
    const y = Number(ys_);
    const v = vs_ === "nan" ? NaN : Number(vs_);
    xs.add(x);
    ys.add(y);
    triples.push([x, y, v]);
  }
  const xList = [...xs].sort((a, b) => a - b);
  const yList = [...ys].sort((a, b) => a - b);
  const xIdx = new Map(xList.map((v, i) => [v, i]));
  const yIdx = new Map(yList.map((v, i) => [v, i]));
  const values = xList.map(() => yList.map(() => NaN));
  for (const [x, y, v] of triples) {
    values[xIdx.get(x)!][yIdx.get(y)!] = v;
  }
  return { xs: xList, ys: yList, values };
}

export function readBoxCount(path: string): BoxCount {
  const doc = JSON.parse(readFileSync(path, "utf8"));
  if (doc.format !== 1) {
    throw new SchemaError(`${path}: format ${doc.format}, expected 1`);
  }
  for (const key of ["eps1", "eps0", "k_minus", "k_plus", "count", "track_ids"]) {
    if (!(key in doc)) throw new SchemaError(`${path}: missing ${key}`);
  }
  return {
    eps1: doc.eps1,
    eps0: doc.eps0,
    kMinus: doc.k_minus,
    kPlus: doc.k_plus,
    count: doc.count,
    trackIds: doc.track_ids,
  };
}
