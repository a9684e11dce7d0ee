import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { inflateSync } from "node:zlib";
import { describe, expect, it } from "vitest";

import { BLACK, BLUE, Canvas, GREEN, RED, sameColor } from "../src/canvas.js";
import { readBoxCount, readField, readSpectra, SchemaError } from "../src/data.js";
import {
  heatColor,
  renderCloud,
  renderHeatmap,
  renderTrajectories,
} from "../src/figures.js";
import { encodePng } from "../src/png.js";
import { parseArgs, run } from "../src/render.js";

function tmpFile(name: string, content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "helmfig-"));
  const path = join(dir, name);
  writeFileSync(path, content);
  return path;
}

const SPECTRA_ONE = `# format: 1
k,re_mu,im_mu,residual,track_id
9.977,0.05,-0.01,1e-10,-1
`;

const SPECTRA_TRACKS = `# format: 1
k,re_mu,im_mu,residual,track_id
5.0,0.3,-0.02,1,0
5.025,0.1,-0.02,1,0
5.05,-0.1,-0.02,1,0
5.0,0.9,-0.4,1,1
5.025,0.8,-0.4,1,1
5.05,0.7,-0.4,1,1
`;

const BOXCOUNT = JSON.stringify({
  format: 1,
  eps1: 0.2,
  eps0: 0.05,
  k_minus: 5.0,
  k_plus: 5.05,
  count: 1,
  track_ids: [0],
});

const FIELD = `# format: 1
# k,5,mu_re,0,mu_im,0
x,y,abs_u
0,0,1.0
0,1,0.5
1,0,nan
1,1,0.25
`;

function countColor(canvas: Canvas, color: [number, number, number, number]): number {
  let n = 0;
  for (let y = 0; y < canvas.height; y++) {
    for (let x = 0; x < canvas.width; x++) {
      if (sameColor(canvas.get(x, y), color)) n++;
    }
  }
  return n;
}

describe("readers", () => {
  it("parses spectra rows", () => {
    const rows = readSpectra(tmpFile("s.csv", SPECTRA_ONE));
    expect(rows).toHaveLength(1);
    expect(rows[0].k).toBeCloseTo(9.977);
    expect(rows[0].trackId).toBe(-1);
  });

  it("rejects a missing format stamp", () => {
    const path = tmpFile("bad.csv", "k,re_mu,im_mu,residual,track_id\n1,2,3,4,5\n");
    expect(() => readSpectra(path)).toThrow(SchemaError);
  });

  it("rejects missing columns", () => {
    const path = tmpFile("bad2.csv", "# format: 1\nk,re_mu\n1,2\n");
    expect(() => readSpectra(path)).toThrow(SchemaError);
  });

  it("parses field grids with nan holes", () => {
    const field = readField(tmpFile("f.csv", FIELD));
    expect(field.xs).toEqual([0, 1]);
    expect(field.values[1][0]).toBeNaN();
    expect(field.values[0][1]).toBeCloseTo(0.5);
  });

  it("parses boxcount documents", () => {
    const box = readBoxCount(tmpFile("b.json", BOXCOUNT));
    expect(box.count).toBe(1);
    expect(box.trackIds).toEqual([0]);
  });

  it("rejects boxcount with wrong format", () => {
    const path = tmpFile("b2.json", JSON.stringify({ format: 2 }));
    expect(() => readBoxCount(path)).toThrow(SchemaError);
  });
});

describe("cloud figure", () => {
  it("draws one green circle and a black origin dot", () => {
    const canvas = renderCloud(readSpectra(tmpFile("s.csv", SPECTRA_ONE)));
    expect(countColor(canvas, GREEN)).toBeGreaterThan(20);
    expect(countColor(canvas, BLACK)).toBeGreaterThan(10);
  });
});

describe("trajectory figure", () => {
  it("colors box members green, others blue, box red", () => {
    const rows = readSpectra(tmpFile("s.csv", SPECTRA_TRACKS));
    const box = readBoxCount(tmpFile("b.json", BOXCOUNT));
    const canvas = renderTrajectories(rows, box);
    expect(countColor(canvas, GREEN)).toBeGreaterThan(50);
    expect(countColor(canvas, BLUE)).toBeGreaterThan(50);
    expect(countColor(canvas, RED)).toBeGreaterThan(50);
  });

  it("infers members from --box when no boxcount is given", () => {
    const rows = readSpectra(tmpFile("s.csv", SPECTRA_TRACKS));
    const canvas = renderTrajectories(rows, undefined, {
      reHalfWidth: 0.4,
      imDepth: 0.1,
    });
    // track 0 passes through the box; track 1 stays outside
    expect(countColor(canvas, GREEN)).toBeGreaterThan(50);
    expect(countColor(canvas, BLUE)).toBeGreaterThan(50);
  });
});

describe("heatmap figure", () => {
  it("leaves nan cells transparent and normalizes to max", () => {
    const canvas = renderHeatmap(readField(tmpFile("f.csv", FIELD)));
    // some transparent pixels remain (the nan cell / background)
    let transparent = 0;
    for (let i = 3; i < canvas.data.length; i += 4) {
      if (canvas.data[i] === 0) transparent++;
    }
    expect(transparent).toBeGreaterThan(0);
    // the maximum value maps to the top of the color ramp
    const top = heatColor(1.0);
    expect(countColor(canvas, top)).toBeGreaterThan(0);
  });
});

describe("png encoder", () => {
  it("emits a decodable grayscale gradient", () => {
    const w = 8;
    const h = 4;
    const rgba = new Uint8Array(w * h * 4);
    for (let i = 0; i < w * h; i++) {
      rgba.set([i * 8, i * 8, i * 8, 255], i * 4);
    }
    const png = encodePng(w, h, rgba);
    // signature
    expect([...png.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    // IHDR dimensions
    expect(png.readUInt32BE(16)).toBe(w);
    expect(png.readUInt32BE(20)).toBe(h);
    // decode IDAT and compare the raw scanlines round-trip
    const idatLen = png.readUInt32BE(33);
    const idat = png.subarray(41, 41 + idatLen);
    const raw = inflateSync(idat);
    expect(raw.length).toBe((w * 4 + 1) * h);
    expect(raw[0]).toBe(0); // filter byte
    expect(raw[1]).toBe(0); // first pixel r
    expect(raw[(w * 4 + 1) + 1 + 4]).toBe((w + 1) * 8); // second row, second pixel
  });

  it("rejects wrong buffer sizes", () => {
    expect(() => encodePng(2, 2, new Uint8Array(3))).toThrow();
  });
});

describe("cli", () => {
  it("parses flags and renders end to end", () => {
    const input = tmpFile("s.csv", SPECTRA_ONE);
    const out = join(mkdtempSync(join(tmpdir(), "helmfig-")), "fig.png");
    run(parseArgs(["--style", "cloud", "--in", input, "--out", out]));
    const fs = require("node:fs");
    const buf = fs.readFileSync(out);
    expect(buf.length).toBeGreaterThan(100);
    expect(buf[1]).toBe(0x50);
  });

  it("rejects unknown styles", () => {
    expect(() =>
      run(parseArgs(["--style", "pie", "--in", "x", "--out", "y"])),
    ).toThrow();
  });

  it("rejects malformed box flags", () => {
    expect(() => parseArgs(["--style", "cloud", "--in", "a", "--out", "b", "--box", "z"]))
      .toThrow();
  });
});
