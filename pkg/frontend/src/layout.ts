/**
 * Layered layout for the program graph.
 *
 * Supports:
 * - One block per state, stacked vertically
 * - Longest-path layering inside each graph, declaration order as tie-break
 * - Map scopes drawn as nested boxes with trapezoid entry/exit bars
 * - Collapsing a scope to a summary box (body hidden, edges kept)
 * - Level-of-detail flags so the renderer can drop labels when zoomed out
 *
 * Edge lines carry the same ids the service uses ("state/map#e3"), so
 * overlay colors key into the layout without any translation step.
 */

import type { EdgeDoc, GraphDoc, ProgramDoc, ProgramNodeDoc } from "./types.js";

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface NodeBox extends Rect {
  path: string;
  id: string;
  type: "access" | "tasklet" | "map";
  label: string;
  graph: string;
  depth: number;
  container?: string;
  collapsed?: boolean;
}

export interface EdgeLine {
  id: string;
  graph: string;
  container: string;
  kind: "read" | "write";
  points: [number, number][];
}

export interface MapBox {
  path: string;
  header: Rect;
  footer: Rect;
  collapsed: boolean;
}

export interface StateBlock extends Rect {
  name: string;
}

export interface ProgramLayout {
  width: number;
  height: number;
  states: StateBlock[];
  nodes: Record<string, NodeBox>;
  edges: EdgeLine[];
  maps: MapBox[];
}

const NODE_H = 34;
const HEADER_H = 22;
const PAD = 14;
const H_GAP = 26;
const V_GAP = 40;
const STATE_GAP = 30;
const CHAR_W = 7.5;

function labelWidth(text: string): number {
  return Math.max(70, Math.ceil(text.length * CHAR_W) + 24);
}

function nodeLabel(node: ProgramNodeDoc): string {
  if (node.type === "access") return node.container ?? node.id;
  if (node.type === "tasklet") return node.code ?? node.id;
  return `${node.id}[${(node.params ?? []).join(",")}]`;
}

interface Sized {
  node: ProgramNodeDoc;
  w: number;
  h: number;
  body?: GraphLayout;
}

interface GraphLayout {
  w: number;
  h: number;
  placed: { sized: Sized; x: number; y: number }[];
  edges: EdgeDoc[];
}

/** Kahn's algorithm, declaration order breaks ties. */
function layerOf(nodes: ProgramNodeDoc[], edges: EdgeDoc[]): Map<string, number> {
  const local = new Set(nodes.map((n) => n.id));
  const layers = new Map<string, number>();
  const incoming = new Map<string, string[]>();
  for (const n of nodes) incoming.set(n.id, []);
  for (const e of edges) {
    if (local.has(e.src) && local.has(e.dst)) incoming.get(e.dst)!.push(e.src);
  }
  // Graphs are validated acyclic server-side, so this always terminates.
  let pending = nodes.map((n) => n.id);
  while (pending.length) {
    const next: string[] = [];
    for (const id of pending) {
      const deps = incoming.get(id)!;
      if (deps.every((d) => layers.has(d))) {
        layers.set(id, deps.reduce((m, d) => Math.max(m, layers.get(d)! + 1), 0));
      } else {
        next.push(id);
      }
    }
    if (next.length === pending.length) break; // safety valve for bad input
    pending = next;
  }
  return layers;
}

function measure(
  node: ProgramNodeDoc,
  path: string,
  collapsed: Set<string>,
): Sized {
  if (node.type !== "map") {
    return { node, w: labelWidth(nodeLabel(node)), h: NODE_H };
  }
  const headerW = labelWidth(nodeLabel(node)) + 2 * HEADER_H;
  if (collapsed.has(path) || !node.body) {
    return { node, w: headerW, h: NODE_H + HEADER_H };
  }
  const body = layoutGraph(node.body, path, collapsed);
  return {
    node,
    w: Math.max(headerW, body.w + 2 * PAD),
    h: body.h + 2 * PAD + 2 * HEADER_H,
    body,
  };
}

function layoutGraph(
  graph: GraphDoc,
  graphPath: string,
  collapsed: Set<string>,
): GraphLayout {
  const layers = layerOf(graph.nodes, graph.edges);
  const sized = graph.nodes.map((n) =>
    measure(n, `${graphPath}/${n.id}`, collapsed),
  );
  const rows: Sized[][] = [];
  for (const s of sized) {
    const layer = layers.get(s.node.id) ?? 0;
    (rows[layer] ??= []).push(s);
  }

  const rowWidth = (row: Sized[]) =>
    row.reduce((sum, s) => sum + s.w, 0) + H_GAP * (row.length - 1);
  const width = rows.reduce((m, row) => Math.max(m, rowWidth(row)), 0);

  const placed: GraphLayout["placed"] = [];
  let y = 0;
  for (const row of rows) {
    if (!row) continue;
    const rowH = row.reduce((m, s) => Math.max(m, s.h), 0);
    let x = (width - rowWidth(row)) / 2;
    for (const s of row) {
      placed.push({ sized: s, x, y: y + (rowH - s.h) / 2 });
      x += s.w + H_GAP;
    }
    y += rowH + V_GAP;
  }
  return { w: width, h: Math.max(0, y - V_GAP), placed, edges: graph.edges };
}

/** Flatten a graph layout into absolute boxes and edge lines. */
function emit(
  gl: GraphLayout,
  graphPath: string,
  ox: number,
  oy: number,
  depth: number,
  collapsed: Set<string>,
  out: ProgramLayout,
): void {
  const boxAt = new Map<string, NodeBox>();
  for (const { sized, x, y } of gl.placed) {
    const node = sized.node;
    const path = `${graphPath}/${node.id}`;
    const box: NodeBox = {
      path,
      id: node.id,
      type: node.type,
      label: nodeLabel(node),
      graph: graphPath,
      depth,
      x: ox + x,
      y: oy + y,
      w: sized.w,
      h: sized.h,
    };
    if (node.container) box.container = node.container;
    if (node.type === "map") {
      box.collapsed = !sized.body;
      out.maps.push({
        path,
        header: { x: box.x, y: box.y, w: box.w, h: HEADER_H },
        footer: { x: box.x, y: box.y + box.h - HEADER_H, w: box.w, h: HEADER_H },
        collapsed: !sized.body,
      });
    }
    out.nodes[path] = box;
    boxAt.set(node.id, box);
    if (sized.body) {
      emit(
        sized.body,
        path,
        box.x + (box.w - sized.body.w) / 2,
        box.y + HEADER_H + PAD,
        depth + 1,
        collapsed,
        out,
      );
    }
  }

  // Edge endpoints missing locally belong to an enclosing graph; route
  // them through this scope's entry/exit bars like the engine does.
  const enclosing = out.nodes[graphPath];
  gl.edges.forEach((e, i) => {
    const src = boxAt.get(e.src);
    const dst = boxAt.get(e.dst);
    const start: [number, number] = src
      ? [src.x + src.w / 2, src.y + src.h]
      : [
          enclosing ? (dst ? dst.x + dst.w / 2 : enclosing.x + enclosing.w / 2) : ox,
          enclosing ? enclosing.y + HEADER_H : oy,
        ];
    const end: [number, number] = dst
      ? [dst.x + dst.w / 2, dst.y]
      : [
          enclosing ? (src ? src.x + src.w / 2 : enclosing.x + enclosing.w / 2) : ox,
          enclosing ? enclosing.y + enclosing.h - HEADER_H : oy,
        ];
    out.edges.push({
      id: `${graphPath}#e${i}`,
      graph: graphPath,
      container: e.container,
      kind: e.kind,
      points: [start, end],
    });
  });
}

export function layoutProgram(
  doc: ProgramDoc,
  collapsed: Set<string> = new Set(),
): ProgramLayout {
  const out: ProgramLayout = {
    width: 0,
    height: 0,
    states: [],
    nodes: {},
    edges: [],
    maps: [],
  };
  let y = 0;
  for (const state of doc.doc.states) {
    const gl = layoutGraph(state, state.name, collapsed);
    const block: StateBlock = {
      name: state.name,
      x: 0,
      y,
      w: gl.w + 2 * PAD,
      h: gl.h + 2 * PAD + HEADER_H,
    };
    out.states.push(block);
    emit(gl, state.name, PAD, y + HEADER_H + PAD, 0, collapsed, out);
    y += block.h + STATE_GAP;
    out.width = Math.max(out.width, block.w);
  }
  out.height = Math.max(0, y - STATE_GAP);
  return out;
}

/** Deepest node under a point, or null. */
export function hitTest(layout: ProgramLayout, x: number, y: number): NodeBox | null {
  let best: NodeBox | null = null;
  for (const box of Object.values(layout.nodes)) {
    if (x >= box.x && x < box.x + box.w && y >= box.y && y < box.y + box.h) {
      if (!best || box.depth > best.depth) best = box;
    }
  }
  return best;
}

/** Map whose header bar is under a point (the collapse toggle). */
export function hitHeader(layout: ProgramLayout, x: number, y: number): MapBox | null {
  let best: MapBox | null = null;
  for (const m of layout.maps) {
    const h = m.header;
    if (x >= h.x && x < h.x + h.w && y >= h.y && y < h.y + h.h) {
      const depth = m.path.split("/").length;
      if (!best || depth > best.path.split("/").length) best = m;
    }
  }
  return best;
}

export interface DetailFlags {
  nodeLabels: boolean;
  edgeArrows: boolean;
  bodyDetail: boolean;
}

/** What is worth drawing at a given zoom. */
export function detailAt(zoom: number): DetailFlags {
  return {
    nodeLabels: zoom >= 0.5,
    edgeArrows: zoom >= 0.35,
    bodyDetail: zoom >= 0.2,
  };
}
