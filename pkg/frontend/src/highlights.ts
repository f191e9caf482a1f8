/**
 * Grid highlight sets derived from service documents.
 *
 * Each helper turns one response into per-container lookup maps keyed by
 * the joined index tuple ("1,2"), which is what the grid painter wants.
 * Counts and distances arrive fully computed; nothing here invents
 * numbers, it only reshapes them.
 */

import type {
  CountsDoc,
  LineMatesDoc,
  RelatedDoc,
  TraceEventDoc,
} from "./types.js";

export function keyOf(indices: number[]): string {
  return indices.join(",");
}

export interface CellCounts {
  total: number;
  reads: number;
  writes: number;
}

export type CountGrid = Map<string, Map<string, CellCounts>>;

export function fromCounts(doc: CountsDoc): CountGrid {
  const out: CountGrid = new Map();
  for (const [container, entries] of Object.entries(doc.containers)) {
    const cells = new Map<string, CellCounts>();
    for (const e of entries) {
      cells.set(keyOf(e.indices), {
        total: e.total,
        reads: e.reads,
        writes: e.writes,
      });
    }
    out.set(container, cells);
  }
  return out;
}

export interface PlaybackMarks {
  /** Element most recently touched per container, before the cursor. */
  current: Map<string, number[]>;
  /** Everything touched so far, per container. */
  touched: Map<string, Set<string>>;
}

export function playbackMarks(
  events: TraceEventDoc[],
  cursor: number,
): PlaybackMarks {
  const current = new Map<string, number[]>();
  const touched = new Map<string, Set<string>>();
  for (const e of events) {
    if (e.time >= cursor) break;
    current.set(e.container, e.indices);
    let set = touched.get(e.container);
    if (!set) touched.set(e.container, (set = new Set()));
    set.add(keyOf(e.indices));
  }
  return { current, touched };
}

export function relatedHeat(doc: RelatedDoc): Map<string, Map<string, number>> {
  const out = new Map<string, Map<string, number>>();
  for (const r of doc.related) {
    let cells = out.get(r.container);
    if (!cells) out.set(r.container, (cells = new Map()));
    cells.set(keyOf(r.indices), r.count);
  }
  return out;
}

export function mateSet(doc: LineMatesDoc): Map<string, Set<string>> {
  const out = new Map<string, Set<string>>();
  for (const m of doc.mates) {
    let set = out.get(m.container);
    if (!set) out.set(m.container, (set = new Set()));
    set.add(keyOf(m.indices));
  }
  return out;
}

/** Largest total in a count grid, for scaling cell shading. */
export function maxCount(cells: Map<string, CellCounts> | undefined): number {
  let max = 0;
  for (const c of cells?.values() ?? []) max = Math.max(max, c.total);
  return max;
}
