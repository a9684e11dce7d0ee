/**
 * CLI: node dist/render.js --style cloud|heatmap|trajectories --in FILE
 *                          [--boxcount FILE] [--box re_halfwidth,im_depth]
 *                          --out FILE.png
 * Strict view layer: reads the lab's CSV/JSON, never recomputes numerics.
 */

import { writeFileSync } from "node:fs";
import process from "node:process";

import { BoxOverlay, renderCloud, renderHeatmap, renderTrajectories } from "./figures.js";
import { readBoxCount, readField, readSpectra, SchemaError } from "./data.js";
import { encodePng } from "./png.js";

interface Args {
  style: string;
  input: string;
  output: string;
  boxcount?: string;
  box?: BoxOverlay;
}

export function parseArgs(argv: string[]): Args {
  const out: Partial<Args> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`missing value for ${key}`);
    switch (key) {
      case "--style":
        out.style = value;
        break;
      case "--in":
        out.input = value;
        break;
      case "--out":
        out.output = value;
        break;
      case "--boxcount":
        out.boxcount = value;
        break;
      case "--box": {
        const [hw, depth] = value.split(",").map(Number);
        if (!Number.isFinite(hw) || !Number.isFinite(depth)) {
          throw new Error(`--box expects re_halfwidth,im_depth, got ${value}`);
        }
        out.box = { reHalfWidth: hw, imDepth: depth };
        break;
      }
      default:
        throw new Error(`unknown flag ${key}`);
    }
  }
  if (!out.style || !out.input || !out.output) {
    throw new Error("--style, --in and --out are required");
  }
  return out as Args;
}

export function run(args: Args): void {
  let canvas;
  switch (args.style) {
    case "cloud":
      canvas = renderCloud(readSpectra(args.input), args.box);
      break;
    case "trajectories": {
      const box = args.boxcount ? readBoxCount(args.boxcount) : undefined;
      canvas = renderTrajectories(readSpectra(args.input), box, args.box);
      break;
    }
    case "heatmap":
      canvas = renderHeatmap(readField(args.input));
      break;
    default:
      throw new Error(`unknown style ${args.style}`);
  }
  writeFileSync(args.output, encodePng(canvas.width, canvas.height, canvas.data));
}

const isMain = process.argv[1]?.endsWith("render.js");
if (isMain) {
  try {
    run(parseArgs(process.argv.slice(2)));
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${(err as Error).message}`);
    } else {
      console.error((err as Error).message);
    }
    process.exit(1);
  }
}
