/** Client-side working mask mirroring the server's binary-mask semantics.
 *
 * The bitmap always matches the loaded image's dimensions. Brush strokes
 * union damaged pixels in, the eraser subtracts them, and undo restores
 * whole-stroke snapshots. Export renders 0/255 samples so the server's
 * at-least-half-intensity rule reads back the identical bitmap.
 */

export const MASK_THRESHOLD = 128;

export class MaskBitmap {
  readonly width: number;
  readonly height: number;
  private bits: Uint8Array;
  private undoStack: Uint8Array[] = [];
  private static readonly UNDO_LIMIT = 64;

  constructor(width: number, height: number) {
    if (width < 1 || height < 1) throw new Error("mask needs at least one pixel");
    this.width = width;
    this.height = height;
    this.bits = new Uint8Array(width * height);
  }

  get(x: number, y: number): boolean {
    return this.bits[y * this.width + x] === 1;
  }

  count(): number {
    let n = 0;
    for (const b of this.bits) n += b;
    return n;
  }

  snapshot(): Uint8Array {
    return this.bits.slice();
  }

  equals(other: MaskBitmap): boolean {
    if (other.width !== this.width || other.height !== this.height) return false;
    for (let i = 0; i < this.bits.length; i++) {
      if (this.bits[i] !== other.bits[i]) return false;
    }
    return true;
  }

  /** Call once per stroke (pointer down), before painting its dots. */
  beginStroke(): void {
    this.undoStack.push(this.bits.slice());
    if (this.undoStack.length > MaskBitmap.UNDO_LIMIT) this.undoStack.shift();
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.bits = prev;
    return true;
  }

  clear(): void {
    this.beginStroke();
    this.bits.fill(0);
  }

  /** Disk dot of the given radius; radius 0 marks exactly one pixel. */
  paintDot(cx: number, cy: number, radius: number, erase = false): void {
    const val = erase ? 0 : 1;
    const r2 = radius * radius;
    const x0 = Math.max(0, Math.ceil(cx - radius));
    const x1 = Math.min(this.width - 1, Math.floor(cx + radius));
    const y0 = Math.max(0, Math.ceil(cy - radius));
    const y1 = Math.min(this.height - 1, Math.floor(cy + radius));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const dx = x - cx;
        const dy = y - cy;
        if (dx * dx + dy * dy <= r2) this.bits[y * this.width + x] = val;
      }
    }
  }

  /** Interpolated segment of dots so fast pointer moves leave no gaps. */
  paintLine(
    x0: number,
    y0: number,
    x1: number,
    y1: number,
    radius: number,
    erase = false,
  ): void {
    const steps = Math.max(1, Math.ceil(Math.hypot(x1 - x0, y1 - y0)));
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      this.paintDot(
        Math.round(x0 + t * (x1 - x0)),
        Math.round(y0 + t * (y1 - y0)),
        radius,
        erase,
      );
    }
  }

  /** Union another bitmap in (used when accepting a server-grown mask). */
  unionPixels(pixels: Uint8Array): void {
    if (pixels.length !== this.bits.length) throw new Error("mask size mismatch");
    this.beginStroke();
    for (let i = 0; i < pixels.length; i++) {
      if (pixels[i]) this.bits[i] = 1;
    }
  }

  /** Grayscale 0/255 samples, one byte per pixel, row-major. */
  toGraySamples(): Uint8Array {
    const out = new Uint8Array(this.bits.length);
    for (let i = 0; i < this.bits.length; i++) out[i] = this.bits[i] ? 255 : 0;
    return out;
  }

  /** RGBA pixels for a canvas export: opaque black/white. */
  toExportRgba(): Uint8ClampedArray<ArrayBuffer> {
    const out = new Uint8ClampedArray(this.bits.length * 4);
    for (let i = 0; i < this.bits.length; i++) {
      const v = this.bits[i] ? 255 : 0;
      out[i * 4] = v;
      out[i * 4 + 1] = v;
      out[i * 4 + 2] = v;
      out[i * 4 + 3] = 255;
    }
    return out;
  }

  /** Translucent red overlay pixels for on-canvas preview. */
  toOverlayRgba(): Uint8ClampedArray<ArrayBuffer> {
    const out = new Uint8ClampedArray(this.bits.length * 4);
    for (let i = 0; i < this.bits.length; i++) {
      if (this.bits[i]) {
        out[i * 4] = 255;
        out[i * 4 + 1] = 40;
        out[i * 4 + 2] = 40;
        out[i * 4 + 3] = 110;
      }
    }
    return out;
  }

  /** Rebuild from RGBA pixels using the server's luminance >= 128 rule. */
  static fromRgba(pixels: Uint8ClampedArray | Uint8Array, width: number, height: number): MaskBitmap {
    if (pixels.length !== width * height * 4) throw new Error("bad RGBA length");
    const mask = new MaskBitmap(width, height);
    for (let i = 0; i < width * height; i++) {
      const lum =
        0.2126 * pixels[i * 4] + 0.7152 * pixels[i * 4 + 1] + 0.0722 * pixels[i * 4 + 2];
      if (lum >= MASK_THRESHOLD - 0.5) mask.bits[i] = 1;
    }
    return mask;
  }

  /** Rebuild from one-byte-per-pixel grayscale samples. */
  static fromGraySamples(samples: Uint8Array, width: number, height: number): MaskBitmap {
    if (samples.length !== width * height) throw new Error("bad sample length");
    const mask = new MaskBitmap(width, height);
    for (let i = 0; i < samples.length; i++) {
      if (samples[i] >= MASK_THRESHOLD) mask.bits[i] = 1;
    }
    return mask;
  }
}
