/**
 * Element-grid geometry for container views.
 *
 * The innermost two dimensions form a row/column grid. Every dimension
 * beyond that wraps the layout in strips, alternating direction as it
 * goes out: the third dimension lays grids out side by side, the fourth
 * stacks those strips, and so on. A shape (2,3,4,4) therefore reads as
 * two rows of three 4x4 grids. One-dimensional containers are a single
 * row.
 *
 * Pure geometry: no canvas here, just rectangles and their inverse
 * (hit testing), so it can be tested without a DOM.
 */

export interface GridOptions {
  cell?: number;
  gap?: number;
  groupGap?: number;
}

export interface GridSpec {
  shape: number[];
  cell: number;
  gap: number;
  groupGap: number;
  width: number;
  height: number;
  elements: number;
  /** True when the shape has more elements than a grid can usefully show. */
  truncated: boolean;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export const MAX_CELLS = 4096;

function span(n: number, unit: number, gap: number): number {
  return n > 0 ? n * unit + (n - 1) * gap : 0;
}

/** Strips for dim k (counting ranks, innermost grid is 2) run
 *  horizontally when k is odd. */
function horizontal(rank: number): boolean {
  return rank % 2 === 1;
}

function extent(spec: GridSpec, shape: number[]): { w: number; h: number } {
  if (shape.length === 0) return { w: spec.cell, h: spec.cell };
  if (shape.length === 1) {
    return { w: span(shape[0], spec.cell, spec.gap), h: spec.cell };
  }
  if (shape.length === 2) {
    return {
      w: span(shape[1], spec.cell, spec.gap),
      h: span(shape[0], spec.cell, spec.gap),
    };
  }
  const inner = extent(spec, shape.slice(1));
  return horizontal(shape.length)
    ? { w: span(shape[0], inner.w, spec.groupGap), h: inner.h }
    : { w: inner.w, h: span(shape[0], inner.h, spec.groupGap) };
}

export function gridSpec(shape: number[], opts: GridOptions = {}): GridSpec {
  const elements = shape.reduce((p, n) => p * n, 1);
  const spec: GridSpec = {
    shape: [...shape],
    cell: opts.cell ?? 18,
    gap: opts.gap ?? 2,
    groupGap: opts.groupGap ?? 10,
    width: 0,
    height: 0,
    elements,
    truncated: elements > MAX_CELLS,
  };
  const { w, h } = extent(spec, shape);
  spec.width = w;
  spec.height = h;
  return spec;
}

export function cellRect(spec: GridSpec, indices: number[]): Rect {
  if (indices.length !== spec.shape.length) {
    throw new Error(`expected ${spec.shape.length} indices, got ${indices.length}`);
  }
  let x = 0;
  let y = 0;
  let shape = spec.shape;
  let idx = indices;
  while (shape.length > 2) {
    const inner = extent(spec, shape.slice(1));
    if (horizontal(shape.length)) x += idx[0] * (inner.w + spec.groupGap);
    else y += idx[0] * (inner.h + spec.groupGap);
    shape = shape.slice(1);
    idx = idx.slice(1);
  }
  if (shape.length === 2) {
    y += idx[0] * (spec.cell + spec.gap);
    x += idx[1] * (spec.cell + spec.gap);
  } else if (shape.length === 1) {
    x += idx[0] * (spec.cell + spec.gap);
  }
  return { x, y, w: spec.cell, h: spec.cell };
}

/** Inverse of cellRect; null in gaps or outside the grid. */
export function hitCell(spec: GridSpec, px: number, py: number): number[] | null {
  let shape = spec.shape;
  let x = px;
  let y = py;
  const indices: number[] = [];
  while (shape.length > 2) {
    const inner = extent(spec, shape.slice(1));
    const unit = horizontal(shape.length)
      ? inner.w + spec.groupGap
      : inner.h + spec.groupGap;
    const along = horizontal(shape.length) ? x : y;
    const i = Math.floor(along / unit);
    if (i < 0 || i >= shape[0] || along - i * unit >= unit - spec.groupGap) {
      return null;
    }
    if (horizontal(shape.length)) x -= i * unit;
    else y -= i * unit;
    indices.push(i);
    shape = shape.slice(1);
  }
  const pitch = spec.cell + spec.gap;
  const axis = (v: number, n: number): number | null => {
    const i = Math.floor(v / pitch);
    if (i < 0 || i >= n || v - i * pitch >= spec.cell) return null;
    return i;
  };
  if (shape.length === 2) {
    const i = axis(y, shape[0]);
    const j = axis(x, shape[1]);
    if (i === null || j === null) return null;
    indices.push(i, j);
  } else if (shape.length === 1) {
    if (y < 0 || y >= spec.cell) return null;
    const i = axis(x, shape[0]);
    if (i === null) return null;
    indices.push(i);
  } else if (x < 0 || y < 0 || x >= spec.cell || y >= spec.cell) {
    return null;
  }
  return indices;
}

/** Every index tuple of a shape, row-major. Handy for painting. */
export function* eachIndex(shape: number[]): Generator<number[]> {
  if (shape.some((n) => n <= 0)) return;
  const idx = shape.map(() => 0);
  while (true) {
    yield [...idx];
    let d = shape.length - 1;
    while (d >= 0) {
      idx[d] += 1;
      if (idx[d] < shape[d]) break;
      idx[d] = 0;
      d -= 1;
    }
    if (d < 0) return;
  }
}
