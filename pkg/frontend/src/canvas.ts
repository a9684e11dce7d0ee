/** RGBA framebuffer with the few drawing primitives the figures need. */

export type Color = [number, number, number, number];

export const WHITE: Color = [255, 255, 255, 255];
export const BLACK: Color = [0, 0, 0, 255];
export const GREEN: Color = [0, 160, 60, 255];
export const BLUE: Color = [40, 70, 200, 255];
export const RED: Color = [210, 30, 30, 255];
export const TRANSPARENT: Color = [0, 0, 0, 0];

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.data.set(background, i * 4);
    }
  }

  set(x: number, y: number, c: Color): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    this.data.set(c, (yi * this.width + xi) * 4);
  }

  get(x: number, y: number): Color {
    const i = (y * this.width + x) * 4;
    return [this.data[i], this.data[i + 1], this.data[i + 2], this.data[i + 3]];
  }

  fillCircle(cx: number, cy: number, r: number, c: Color): void {
    const r2 = r * r;
    for (let y = Math.floor(cy - r); y <= Math.ceil(cy + r); y++) {
      for (let x = Math.floor(cx - r); x <= Math.ceil(cx + r); x++) {
        if ((x - cx) ** 2 + (y - cy) ** 2 <= r2) this.set(x, y, c);
      }
    }
  }

  strokeCircle(cx: number, cy: number, r: number, c: Color): void {
    const steps = Math.max(16, Math.ceil(2 * Math.PI * r));
    for (let i = 0; i < steps; i++) {
      const t = (2 * Math.PI * i) / steps;
      this.set(cx + r * Math.cos(t), cy + r * Math.sin(t), c);
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    const steps = Math.max(1, Math.ceil(Math.hypot(x1 - x0, y1 - y0)));
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      this.set(x0 + t * (x1 - x0), y0 + t * (y1 - y0), c);
    }
  }

  strokeRect(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    this.line(x0, y0, x1, y0, c);
    this.line(x1, y0, x1, y1, c);
    this.line(x1, y1, x0, y1, c);
    this.line(x0, y1, x0, y0, c);
  }
}

/** Affine map from data coordinates to pixel coordinates (y flipped). */
export class Viewport {
  constructor(
    readonly xMin: number,
    readonly xMax: number,
    readonly yMin: number,
    readonly yMax: number,
    readonly width: number,
    readonly height: number,
    readonly margin = 30,
  ) {}

  px(x: number): number {
    const w = this.width - 2 * this.margin;
    return this.margin + ((x - this.xMin) / (this.xMax - this.xMin)) * w;
  }

  py(y: number): number {
    const h = this.height - 2 * this.margin;
    return this.height - this.margin - ((y - this.yMin) / (this.yMax - this.yMin)) * h;
  }
}

export function sameColor(a: Color, b: Color): boolean {
  return a[0] === b[0] && a[1] === b[1] && a[2] === b[2] && a[3] === b[3];
}
