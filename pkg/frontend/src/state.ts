/**
 * Client-side view state.
 *
 * The service owns all analysis state; this store only tracks what the
 * user is looking at. Responses are stamped with the service version at
 * request time and discarded if the session moved on before they landed,
 * so a slow overlay fetch can never paint numbers from an older
 * parameter set.
 */

import type { OverlayEntry, Rgb, ScaleBounds } from "./types.js";

export type ViewMode = "global" | "local";
export type OverlayKind =
  | "none"
  | "movement"
  | "intensity"
  | "counts"
  | "distances"
  | "misses"
  | "physical";
/** Overlays carrying a fitted color scale on the graph view. */
export const SCALED_OVERLAYS: OverlayKind[] = ["movement", "intensity"];

export interface Viewport {
  x: number;
  y: number;
  zoom: number;
}

export interface LegendInfo {
  lo: number;
  hi: number;
  center: number;
  stops: [number, Rgb][];
}

export interface OverlayData {
  kind: "movement" | "intensity";
  version: number;
  scale: string;
  entries: Record<string, OverlayEntry>;
  legend: LegendInfo | null;
}

type Listener = () => void;

export class ViewState {
  mode: ViewMode = "global";
  viewport: Viewport = { x: 0, y: 0, zoom: 1 };
  collapsed = new Set<string>();
  overlayKind: OverlayKind = "movement";
  scaleMethod = "median";
  overlay: OverlayData | null = null;

  /** Container element selected for local inspection, if any. */
  selected: { container: string; indices: number[] } | null = null;
  /** Graph node focused in the details panel, if any. */
  selectedNode: string | null = null;
  /** Current map-slider pins, by parameter name. */
  pins: Record<string, number> = {};
  /** Playback cursor: events with time < cursor have happened. */
  cursor = 0;
  playing = false;
  speed = 1;

  private version = 0;
  private listeners: Listener[] = [];

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  notify(): void {
    for (const fn of this.listeners) fn();
  }

  /** Record the service version a request was issued against. */
  stamp(version: number): number {
    this.version = version;
    return version;
  }

  stampedVersion(): number {
    return this.version;
  }

  /** True when a response stamped with `version` is still current. */
  fresh(version: number): boolean {
    return version === this.version;
  }

  acceptOverlay(data: OverlayData): boolean {
    if (!this.fresh(data.version)) return false;
    this.overlay = data;
    this.notify();
    return true;
  }

  toggleCollapsed(path: string): void {
    if (this.collapsed.has(path)) this.collapsed.delete(path);
    else this.collapsed.add(path);
    this.notify();
  }

  setMode(mode: ViewMode): void {
    if (mode === this.mode) return;
    this.mode = mode;
    this.notify();
  }

  select(container: string, indices: number[]): void {
    this.selected = { container, indices };
    this.notify();
  }

  clearSelection(): void {
    this.selected = null;
    this.notify();
  }

  setPin(param: string, value: number): void {
    this.pins = { ...this.pins, [param]: value };
    this.notify();
  }

  clearPins(): void {
    this.pins = {};
    this.notify();
  }
}

/**
 * Legend bounds for an overlay document. The service reports the value
 * range and the midpoint value of its fitted scale; the legend shows
 * those so the palette reads as numbers, not just colors.
 */
export function legendFrom(
  bounds: ScaleBounds,
  palette: [number, Rgb][],
): LegendInfo | null {
  if (bounds.min === null || bounds.max === null || bounds.center === null) {
    return null;
  }
  return { lo: bounds.min, hi: bounds.max, center: bounds.center, stops: palette };
}
