import { describe, expect, it } from "vitest";
import { MaskBitmap } from "../src/mask.js";

describe("MaskBitmap painting", () => {
  it("a radius-0 dot marks exactly one pixel", () => {
    const mask = new MaskBitmap(10, 8);
    mask.beginStroke();
    mask.paintDot(4, 3, 0);
    expect(mask.count()).toBe(1);
    expect(mask.get(4, 3)).toBe(true);
  });

  it("strokes union into the mask", () => {
    const mask = new MaskBitmap(20, 20);
    mask.beginStroke();
    mask.paintDot(5, 5, 2);
    const after1 = mask.count();
    mask.beginStroke();
    mask.paintDot(5, 5, 2); // same dot again: no growth
    mask.paintDot(14, 14, 1);
    expect(mask.count()).toBeGreaterThan(after1);
    expect(mask.get(14, 14)).toBe(true);
    expect(mask.get(5, 5)).toBe(true);
  });

  it("eraser subtracts", () => {
    const mask = new MaskBitmap(10, 10);
    mask.beginStroke();
    mask.paintDot(5, 5, 3);
    mask.beginStroke();
    mask.paintDot(5, 5, 1, true);
    expect(mask.get(5, 5)).toBe(false);
    expect(mask.get(5, 8)).toBe(true); // outer ring survives
  });

  it("stroke then undo restores the previous bitmap", () => {
    const mask = new MaskBitmap(12, 12);
    mask.beginStroke();
    mask.paintDot(3, 3, 2);
    const before = mask.snapshot();
    mask.beginStroke();
    mask.paintLine(0, 0, 11, 11, 1);
    expect(mask.snapshot()).not.toEqual(before);
    expect(mask.undo()).toBe(true);
    expect(mask.snapshot()).toEqual(before);
  });

  it("undo on a fresh mask reports nothing to undo", () => {
    expect(new MaskBitmap(4, 4).undo()).toBe(false);
  });

  it("dots clip at the borders", () => {
    const mask = new MaskBitmap(6, 6);
    mask.beginStroke();
    mask.paintDot(0, 0, 3);
    expect(mask.get(0, 0)).toBe(true);
    expect(mask.count()).toBeLessThan(36);
  });

  it("paintLine leaves no gaps on fast strokes", () => {
    const mask = new MaskBitmap(40, 5);
    mask.beginStroke();
    mask.paintLine(0, 2, 39, 2, 0);
    for (let x = 0; x < 40; x++) expect(mask.get(x, 2)).toBe(true);
  });
});

describe("MaskBitmap export round trip", () => {
  it("gray samples survive encode and threshold decode", () => {
    const mask = new MaskBitmap(17, 9);
    mask.beginStroke();
    mask.paintDot(3, 3, 2);
    mask.paintDot(14, 7, 1);
    const again = MaskBitmap.fromGraySamples(mask.toGraySamples(), 17, 9);
    expect(again.equals(mask)).toBe(true);
  });

  it("RGBA export survives the luminance >= 128 reimport rule", () => {
    const mask = new MaskBitmap(11, 13);
    mask.beginStroke();
    mask.paintLine(1, 1, 9, 11, 2);
    const again = MaskBitmap.fromRgba(mask.toExportRgba(), 11, 13);
    expect(again.equals(mask)).toBe(true);
  });

  it("overlay pixels are transparent outside the mask", () => {
    const mask = new MaskBitmap(3, 3);
    mask.beginStroke();
    mask.paintDot(1, 1, 0);
    const px = mask.toOverlayRgba();
    expect(px[4 * 4 + 3]).toBeGreaterThan(0); // center alpha
    expect(px[3]).toBe(0); // corner alpha
  });

  it("accepting a server mask unions pixels and is undoable", () => {
    const mask = new MaskBitmap(5, 5);
    mask.beginStroke();
    mask.paintDot(0, 0, 0);
    const grown = new MaskBitmap(5, 5);
    grown.beginStroke();
    grown.paintDot(4, 4, 1);
    mask.unionPixels(grown.snapshot());
    expect(mask.get(0, 0)).toBe(true);
    expect(mask.get(4, 4)).toBe(true);
    mask.undo();
    expect(mask.get(4, 4)).toBe(false);
    expect(mask.get(0, 0)).toBe(true);
  });
});
