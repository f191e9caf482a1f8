/**
 * Canvas painters for both views.
 *
 * Supports:
 * - Global graph: states, access/tasklet nodes, map boxes with trapezoid
 *   entry/exit bars, overlay-colored edges and nodes
 * - Legend bar with min/center/max labels from the fitted scale
 * - Minimap with viewport box
 * - Element grids with caller-supplied per-cell paint
 *
 * Colors for metric values always come from the service overlay
 * documents. Everything painted here that is not from an overlay is
 * chrome (outlines, selection, playback marks), never a metric.
 */

import type { GridSpec } from "./grid.js";
import { cellRect, eachIndex } from "./grid.js";
import type { EdgeLine, NodeBox, ProgramLayout } from "./layout.js";
import { detailAt } from "./layout.js";
import type { LegendInfo, OverlayData, Viewport } from "./state.js";
import type { Rgb } from "./types.js";

export function rgbString(rgb: Rgb, alpha = 1): string {
  return alpha >= 1
    ? `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`
    : `rgba(${rgb[0]},${rgb[1]},${rgb[2]},${alpha})`;
}

const COLORS = {
  stateBar: "#dce6f2",
  stateEdge: "#8aa0bd",
  access: "#f4f6f8",
  tasklet: "#fdf3d8",
  mapBar: "#cfe3cf",
  outline: "#4a5568",
  edge: "#718096",
  label: "#1a202c",
  selection: "#2b6cb0",
};

export function applyViewport(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
): void {
  ctx.setTransform(vp.zoom, 0, 0, vp.zoom, -vp.x * vp.zoom, -vp.y * vp.zoom);
}

export function screenToWorld(vp: Viewport, sx: number, sy: number): [number, number] {
  return [sx / vp.zoom + vp.x, sy / vp.zoom + vp.y];
}

function trapezoid(
  ctx: CanvasRenderingContext2D,
  x: number,
  y: number,
  w: number,
  h: number,
  flip: boolean,
): void {
  const slope = Math.min(h, w / 4);
  ctx.beginPath();
  if (!flip) {
    ctx.moveTo(x + slope, y);
    ctx.lineTo(x + w - slope, y);
    ctx.lineTo(x + w, y + h);
    ctx.lineTo(x, y + h);
  } else {
    ctx.moveTo(x, y);
    ctx.lineTo(x + w, y);
    ctx.lineTo(x + w - slope, y + h);
    ctx.lineTo(x + slope, y + h);
  }
  ctx.closePath();
}

export interface GraphPaintOptions {
  overlay?: OverlayData | null;
  selectedPath?: string | null;
  matches?: Set<string>;
}

export class GraphPainter {
  constructor(private ctx: CanvasRenderingContext2D) {}

  draw(layout: ProgramLayout, vp: Viewport, opts: GraphPaintOptions = {}): void {
    const ctx = this.ctx;
    const lod = detailAt(vp.zoom);
    ctx.save();
    applyViewport(ctx, vp);

    for (const s of layout.states) {
      ctx.fillStyle = COLORS.stateBar;
      ctx.strokeStyle = COLORS.stateEdge;
      ctx.lineWidth = 1;
      ctx.fillRect(s.x, s.y, s.w, s.h);
      ctx.strokeRect(s.x, s.y, s.w, s.h);
      if (lod.nodeLabels) {
        ctx.fillStyle = COLORS.label;
        ctx.font = "11px sans-serif";
        ctx.fillText(s.name, s.x + 6, s.y + 14);
      }
    }

    for (const edge of layout.edges) this.drawEdge(edge, opts, lod.edgeArrows);

    const boxes = Object.values(layout.nodes).sort((a, b) => a.depth - b.depth);
    for (const box of boxes) {
      if (box.depth > 0 && !lod.bodyDetail) continue;
      this.drawNode(box, opts, lod.nodeLabels);
    }
    ctx.restore();
  }

  private drawEdge(edge: EdgeLine, opts: GraphPaintOptions, arrows: boolean): void {
    const ctx = this.ctx;
    const entry =
      opts.overlay?.kind === "movement" ? opts.overlay.entries[edge.id] : undefined;
    ctx.strokeStyle = entry?.color ? rgbString(entry.color) : COLORS.edge;
    ctx.lineWidth = entry?.color ? 2.5 : 1.2;
    const [from, to] = [edge.points[0], edge.points[edge.points.length - 1]];
    ctx.beginPath();
    ctx.moveTo(from[0], from[1]);
    const midY = (from[1] + to[1]) / 2;
    ctx.bezierCurveTo(from[0], midY, to[0], midY, to[0], to[1]);
    ctx.stroke();
    if (arrows) {
      ctx.fillStyle = ctx.strokeStyle;
      ctx.beginPath();
      ctx.moveTo(to[0], to[1]);
      ctx.lineTo(to[0] - 4, to[1] - 7);
      ctx.lineTo(to[0] + 4, to[1] - 7);
      ctx.closePath();
      ctx.fill();
    }
  }

  private drawNode(box: NodeBox, opts: GraphPaintOptions, labels: boolean): void {
    const ctx = this.ctx;
    const selected = opts.selectedPath === box.path;
    const matched = opts.matches?.has(box.path);
    const entry =
      opts.overlay?.kind === "intensity" ? opts.overlay.entries[box.path] : undefined;
    ctx.lineWidth = selected ? 2.5 : 1.2;
    ctx.strokeStyle = selected
      ? COLORS.selection
      : matched
        ? "#b7791f"
        : COLORS.outline;

    if (box.type === "map") {
      ctx.fillStyle = entry?.color ? rgbString(entry.color, 0.25) : "#fbfdfb";
      ctx.fillRect(box.x, box.y, box.w, box.h);
      ctx.strokeRect(box.x, box.y, box.w, box.h);
      const barFill = entry?.color ? rgbString(entry.color) : COLORS.mapBar;
      const barH = Math.min(22, box.h / 2);
      ctx.fillStyle = barFill;
      trapezoid(ctx, box.x, box.y, box.w, barH, false);
      ctx.fill();
      ctx.stroke();
      trapezoid(ctx, box.x, box.y + box.h - barH, box.w, barH, true);
      ctx.fill();
      ctx.stroke();
      if (labels) {
        ctx.fillStyle = COLORS.label;
        ctx.font = "11px sans-serif";
        ctx.textAlign = "center";
        const title = box.collapsed ? `▸ ${box.label}` : box.label;
        ctx.fillText(title, box.x + box.w / 2, box.y + barH - 7);
        ctx.textAlign = "left";
      }
      return;
    }

    if (box.type === "access") {
      ctx.fillStyle = entry?.color ? rgbString(entry.color) : COLORS.access;
      ctx.beginPath();
      ctx.ellipse(
        box.x + box.w / 2,
        box.y + box.h / 2,
        box.w / 2,
        box.h / 2,
        0,
        0,
        2 * Math.PI,
      );
      ctx.fill();
      ctx.stroke();
    } else {
      ctx.fillStyle = entry?.color ? rgbString(entry.color) : COLORS.tasklet;
      ctx.fillRect(box.x, box.y, box.w, box.h);
      ctx.strokeRect(box.x, box.y, box.w, box.h);
    }
    if (labels) {
      ctx.fillStyle = COLORS.label;
      ctx.font = "11px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(box.label, box.x + box.w / 2, box.y + box.h / 2 + 4, box.w - 8);
      ctx.textAlign = "left";
    }
  }
}

/** Horizontal gradient bar labelled with the scale's min/center/max. */
export function drawLegend(
  ctx: CanvasRenderingContext2D,
  legend: LegendInfo,
  x: number,
  y: number,
  w: number,
  h: number,
): void {
  const grad = ctx.createLinearGradient(x, 0, x + w, 0);
  for (const [pos, rgb] of legend.stops) grad.addColorStop(pos, rgbString(rgb));
  ctx.fillStyle = grad;
  ctx.fillRect(x, y, w, h);
  ctx.strokeStyle = COLORS.outline;
  ctx.lineWidth = 1;
  ctx.strokeRect(x, y, w, h);
  ctx.fillStyle = COLORS.label;
  ctx.font = "10px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(String(legend.lo), x, y + h + 11);
  ctx.textAlign = "center";
  ctx.fillText(String(legend.center), x + w / 2, y + h + 11);
  ctx.textAlign = "right";
  ctx.fillText(String(legend.hi), x + w, y + h + 11);
  ctx.textAlign = "left";
}

export interface MinimapTransform {
  scale: number;
  ox: number;
  oy: number;
}

export function minimapTransform(
  layout: ProgramLayout,
  w: number,
  h: number,
): MinimapTransform {
  const scale = Math.min(
    w / Math.max(1, layout.width),
    h / Math.max(1, layout.height),
  );
  return {
    scale,
    ox: (w - layout.width * scale) / 2,
    oy: (h - layout.height * scale) / 2,
  };
}

export function drawMinimap(
  ctx: CanvasRenderingContext2D,
  layout: ProgramLayout,
  vp: Viewport,
  viewW: number,
  viewH: number,
  w: number,
  h: number,
): MinimapTransform {
  const t = minimapTransform(layout, w, h);
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#f7fafc";
  ctx.fillRect(0, 0, w, h);
  for (const box of Object.values(layout.nodes)) {
    if (box.depth > 0) continue;
    ctx.fillStyle = box.type === "map" ? COLORS.mapBar : COLORS.stateEdge;
    ctx.fillRect(
      t.ox + box.x * t.scale,
      t.oy + box.y * t.scale,
      Math.max(2, box.w * t.scale),
      Math.max(2, box.h * t.scale),
    );
  }
  ctx.strokeStyle = COLORS.selection;
  ctx.lineWidth = 1.5;
  ctx.strokeRect(
    t.ox + vp.x * t.scale,
    t.oy + vp.y * t.scale,
    (viewW / vp.zoom) * t.scale,
    (viewH / vp.zoom) * t.scale,
  );
  return t;
}

/** Minimap pixel to world coordinate. */
export function minimapToWorld(
  t: MinimapTransform,
  mx: number,
  my: number,
): [number, number] {
  return [(mx - t.ox) / t.scale, (my - t.oy) / t.scale];
}

export interface CellPaint {
  fill?: string;
  stroke?: string;
  lineWidth?: number;
}

/** Paint every cell of a grid; the callback decides each cell's look. */
export function drawGrid(
  ctx: CanvasRenderingContext2D,
  spec: GridSpec,
  ox: number,
  oy: number,
  paint: (indices: number[]) => CellPaint | null,
): void {
  for (const indices of eachIndex(spec.shape)) {
    const r = cellRect(spec, indices);
    const p = paint(indices) ?? {};
    ctx.fillStyle = p.fill ?? "#edf2f7";
    ctx.fillRect(ox + r.x, oy + r.y, r.w, r.h);
    if (p.stroke) {
      ctx.strokeStyle = p.stroke;
      ctx.lineWidth = p.lineWidth ?? 1.5;
      ctx.strokeRect(ox + r.x + 0.5, oy + r.y + 0.5, r.w - 1, r.h - 1);
    }
  }
}

/** Distance histogram bars for the details panel. */
export function drawHistogram(
  ctx: CanvasRenderingContext2D,
  buckets: { label: string; count: number }[],
  x: number,
  y: number,
  w: number,
  h: number,
): void {
  ctx.clearRect(x, y, w, h + 14);
  if (!buckets.length) return;
  const max = Math.max(...buckets.map((b) => b.count));
  const barW = w / buckets.length;
  buckets.forEach((b, i) => {
    const barH = max > 0 ? (b.count / max) * h : 0;
    ctx.fillStyle = b.label === "cold" ? "#805ad5" : "#3182ce";
    ctx.fillRect(x + i * barW + 2, y + h - barH, barW - 4, barH);
    ctx.fillStyle = COLORS.label;
    ctx.font = "9px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(b.label, x + i * barW + barW / 2, y + h + 10, barW - 2);
  });
  ctx.textAlign = "left";
}
