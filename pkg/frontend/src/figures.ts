/**
 * Figure builders: pure functions from parsed data to a Canvas. The origin
 * marker is black, eigenvalues are green circles, box-entering trajectories
 * are green against blue with the counting box in red, and heatmaps leave
 * out-of-domain cells transparent with the color scale normalized to
 * max |u|.
 */

import {
  BLACK,
  BLUE,
  Canvas,
  Color,
  GREEN,
  RED,
  TRANSPARENT,
  Viewport,
} from "./canvas.js";
import { BoxCount, FieldData, SpectraRow } from "./data.js";

export const FIG_WIDTH = 640;
export const FIG_HEIGHT = 480;

export interface BoxOverlay {
  /** full half-width in Re(mu): the box spans (-reHalfWidth, reHalfWidth) */
  reHalfWidth: number;
  /** depth in Im(mu): the box spans (-imDepth, 0) */
  imDepth: number;
}

function padRange(lo: number, hi: number, frac = 0.08): [number, number] {
  const span = hi - lo || 1.0;
  return [lo - frac * span, hi + frac * span];
}

export function renderCloud(rows: SpectraRow[], overlay?: BoxOverlay): Canvas {
  const res = rows.map((r) => r.reMu);
  const ims = rows.map((r) => r.imMu);
  const [xMin, xMax] = padRange(Math.min(...res, 0), Math.max(...res, 0));
  const [yMin, yMax] = padRange(Math.min(...ims, 0), Math.max(...ims, 0));
  const canvas = new Canvas(FIG_WIDTH, FIG_HEIGHT);
  const vp = new Viewport(xMin, xMax, yMin, yMax, FIG_WIDTH, FIG_HEIGHT);
  drawAxes(canvas, vp);
  if (overlay) drawBox(canvas, vp, overlay);
  for (const r of rows) {
    canvas.fillCircle(vp.px(r.reMu), vp.py(r.imMu), 4, GREEN);
  }
  canvas.fillCircle(vp.px(0), vp.py(0), 3, BLACK);
  return canvas;
}

export function renderTrajectories(
  rows: SpectraRow[],
  box?: BoxCount,
  overlay?: BoxOverlay,
): Canvas {
  const res = rows.map((r) => r.reMu);
  const ims = rows.map((r) => r.imMu);
  const [xMin, xMax] = padRange(Math.min(...res, 0), Math.max(...res, 0));
  const [yMin, yMax] = padRange(Math.min(...ims, 0), Math.max(...ims, 0));
  const canvas = new Canvas(FIG_WIDTH, FIG_HEIGHT);
  const vp = new Viewport(xMin, xMax, yMin, yMax, FIG_WIDTH, FIG_HEIGHT);
  drawAxes(canvas, vp);

  const byTrack = new Map<number, SpectraRow[]>();
  for (const r of rows) {
    if (!byTrack.has(r.trackId)) byTrack.set(r.trackId, []);
    byTrack.get(r.trackId)!.push(r);
  }
  const effectiveOverlay: BoxOverlay | undefined = overlay ??
    (box ? { reHalfWidth: 2 * box.eps1, imDepth: 2 * box.eps0 } : undefined);
  const members = new Set<number>(
    box ? box.trackIds : inferMembers(byTrack, effectiveOverlay),
  );
  for (const [trackId, pts] of [...byTrack.entries()].sort((a, b) => a[0] - b[0])) {
    pts.sort((a, b) => a.k - b.k);
    const color: Color = members.has(trackId) ? GREEN : BLUE;
    for (let i = 1; i < pts.length; i++) {
      canvas.line(
        vp.px(pts[i - 1].reMu),
        vp.py(pts[i - 1].imMu),
        vp.px(pts[i].reMu),
        vp.py(pts[i].imMu),
        color,
      );
    }
    if (pts.length === 1) {
      canvas.fillCircle(vp.px(pts[0].reMu), vp.py(pts[0].imMu), 2, color);
    }
  }
  if (effectiveOverlay) drawBox(canvas, vp, effectiveOverlay);
  canvas.fillCircle(vp.px(0), vp.py(0), 3, BLACK);
  return canvas;
}

function inferMembers(
  byTrack: Map<number, SpectraRow[]>,
  overlay?: BoxOverlay,
): number[] {
  if (!overlay) return [];
  const out: number[] = [];
  for (const [trackId, pts] of byTrack) {
    if (
      pts.some(
        (p) =>
          Math.abs(p.reMu) < overlay.reHalfWidth &&
          p.imMu < 0 &&
          p.imMu > -overlay.imDepth,
      )
    ) {
      out.push(trackId);
    }
  }
  return out;
}

/** Perceptually simple dark-to-warm ramp for |u| in [0, 1]. */
export function heatColor(t: number): Color {
  const tt = Math.min(Math.max(t, 0), 1);
  const r = Math.round(255 * Math.min(1, 2.5 * tt));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.8 * tt - 0.35)));
  const b = Math.round(255 * Math.max(0, 0.6 - 1.6 * tt) + 40 * (1 - tt));
  return [r, g, Math.min(b, 255), 255];
}

export function renderHeatmap(field: FieldData): Canvas {
  const nx = field.xs.length;
  const ny = field.ys.length;
  let vmax = 0;
  for (const col of field.values) {
    for (const v of col) if (!Number.isNaN(v)) vmax = Math.max(vmax, v);
  }
  if (vmax === 0) vmax = 1;
  const cell = Math.max(
    1,
    Math.floor(Math.min((FIG_WIDTH - 80) / nx, (FIG_HEIGHT - 20) / ny)),
  );
  const width = nx * cell + 80;
  const height = Math.max(ny * cell + 20, 120);
  const canvas = new Canvas(width, height, TRANSPARENT);
  for (let ix = 0; ix < nx; ix++) {
    for (let iy = 0; iy < ny; iy++) {
      const v = field.values[ix][iy];
      if (Number.isNaN(v)) continue; // transparent outside the domain
      const c = heatColor(v / vmax);
      for (let dx = 0; dx < cell; dx++) {
        for (let dy = 0; dy < cell; dy++) {
          canvas.set(10 + ix * cell + dx, height - 10 - (iy + 1) * cell + dy, c);
        }
      }
    }
  }
  // colorbar on the right, normalized to max |u|
  const barX = nx * cell + 40;
  const barTop = 10;
  const barBottom = height - 10;
  for (let y = barTop; y < barBottom; y++) {
    const t = 1 - (y - barTop) / (barBottom - barTop - 1);
    for (let dx = 0; dx < 16; dx++) canvas.set(barX + dx, y, heatColor(t));
  }
  return canvas;
}

function drawAxes(canvas: Canvas, vp: Viewport): void {
  const grey: Color = [180, 180, 180, 255];
  canvas.line(vp.px(vp.xMin), vp.py(0), vp.px(vp.xMax), vp.py(0), grey);
  canvas.line(vp.px(0), vp.py(vp.yMin), vp.px(0), vp.py(vp.yMax), grey);
}

function drawBox(canvas: Canvas, vp: Viewport, overlay: BoxOverlay): void {
  canvas.strokeRect(
    vp.px(-overlay.reHalfWidth),
    vp.py(0),
    vp.px(overlay.reHalfWidth),
    vp.py(-overlay.imDepth),
    RED,
  );
}
