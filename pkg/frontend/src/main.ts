/**
 * Application bootstrap and event wiring.
 *
 * Two views over one running analysis session:
 * - Global: the program graph with movement/intensity heat overlays,
 *   pan/zoom, minimap, outline tree, scope folding, search.
 * - Local: element grids per container with map-parameter sliders,
 *   trace playback, cache-line / related / distance inspection.
 *
 * All numbers and metric colors are lifted verbatim from service
 * responses; this file only decides when to fetch and what to show.
 */

import { ApiClient, ApiError } from "./api.js";
import * as grid from "./grid.js";
import * as hl from "./highlights.js";
import { hitHeader, hitTest, layoutProgram, type ProgramLayout } from "./layout.js";
import {
  GraphPainter,
  drawGrid,
  drawHistogram,
  drawLegend,
  drawMinimap,
  minimapToWorld,
  rgbString,
  screenToWorld,
  type MinimapTransform,
} from "./render.js";
import { ViewState, legendFrom, type OverlayData, type Viewport } from "./state.js";
import type {
  ConfigDoc,
  DistancesDoc,
  LineMatesDoc,
  MissesDoc,
  ParamsDoc,
  PhysicalDoc,
  ProgramDoc,
  RelatedDoc,
  TraceEventDoc,
} from "./types.js";

const PLAYBACK_FETCH_CAP = 20000;
const DEFAULT_PALETTE: [number, [number, number, number]][] = [
  [0.0, [0, 128, 0]],
  [0.5, [255, 255, 0]],
  [1.0, [200, 0, 0]],
];
const COLORBLIND_PALETTE: [number, [number, number, number]][] = [
  [0.0, [0, 90, 181]],
  [0.5, [240, 240, 240]],
  [1.0, [220, 50, 32]],
];

type LocalTool = "counts" | "lines" | "related" | "distances" | "misses" | "physical";

function must<T extends HTMLElement>(el: T | null, what: string): T {
  if (!el) throw new Error(`missing page element: ${what}`);
  return el;
}

function ctx2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  return ctx;
}

export class App {
  private state = new ViewState();
  private program: ProgramDoc | null = null;
  private layout: ProgramLayout | null = null;
  private config: ConfigDoc | null = null;
  private bindings: Record<string, number> = {};

  private countGrid: hl.CountGrid = new Map();
  private misses: MissesDoc | null = null;
  private physical: PhysicalDoc | null = null;
  private mates: Map<string, Set<string>> | null = null;
  private relatedSelections: [string, number[]][] = [];
  private relatedGrid: Map<string, Map<string, number>> | null = null;
  private events: TraceEventDoc[] = [];
  private localTool: LocalTool = "counts";
  private gridSpecs = new Map<string, { spec: grid.GridSpec; y: number }>();

  private graphCanvas: HTMLCanvasElement;
  private gridCanvas: HTMLCanvasElement;
  private minimap: HTMLCanvasElement;
  private legend: HTMLCanvasElement;
  private hist: HTMLCanvasElement;
  private painter: GraphPainter;
  private minimapT: MinimapTransform | null = null;

  private dirty = true;
  private lastFrame = 0;
  private animTarget: Viewport | null = null;
  private animFrom: Viewport | null = null;
  private animStart = 0;
  private dragging = false;
  private dragLast: [number, number] = [0, 0];
  private searchMatches = new Set<string>();

  constructor(
    private doc: Document,
    private api: ApiClient,
  ) {
    this.graphCanvas = must(
      doc.getElementById("graph-canvas") as HTMLCanvasElement,
      "graph-canvas",
    );
    this.gridCanvas = must(
      doc.getElementById("grid-canvas") as HTMLCanvasElement,
      "grid-canvas",
    );
    this.minimap = must(doc.getElementById("minimap") as HTMLCanvasElement, "minimap");
    this.legend = must(doc.getElementById("legend") as HTMLCanvasElement, "legend");
    this.hist = must(doc.getElementById("hist-canvas") as HTMLCanvasElement, "hist-canvas");
    this.painter = new GraphPainter(ctx2d(this.graphCanvas));
    this.state.subscribe(() => this.invalidate());
  }

  async start(): Promise<void> {
    await this.refresh();
    this.wireControls();
    this.wireGraphCanvas();
    this.wireGridCanvas();
    requestAnimationFrame((t) => this.frame(t));
  }

  // ---- data loading ----

  /** Full reload after the session version moved. */
  private async refresh(): Promise<void> {
    const program = await this.api.program();
    this.state.stamp(program.version);
    this.program = program;
    const params = await this.api.params();
    this.bindings = params.bindings;
    this.config = await this.api.config();
    this.layout = layoutProgram(program, this.state.collapsed);
    this.el("program-name").textContent = program.name;
    this.hideBanner();
    this.buildParamsForm();
    this.buildConfigForm();
    this.buildSliders();
    this.buildOutline();
    await this.fetchOverlay();
    await this.fetchLocalData();
    this.invalidate();
  }

  private async fetchOverlay(): Promise<void> {
    const kind = this.state.overlayKind;
    if (kind !== "movement" && kind !== "intensity") {
      this.state.overlay = null;
      this.invalidate();
      return;
    }
    try {
      let data: OverlayData;
      if (kind === "movement") {
        const doc = await this.api.movementOverlay(this.state.scaleMethod);
        data = {
          kind,
          version: doc.version,
          scale: doc.scale,
          entries: doc.edges,
          legend: legendFrom(doc.bounds, doc.palette),
        };
      } else {
        const doc = await this.api.intensityOverlay(this.state.scaleMethod);
        data = {
          kind,
          version: doc.version,
          scale: doc.scale,
          entries: doc.nodes,
          legend: legendFrom(doc.bounds, doc.palette),
        };
      }
      // acceptOverlay drops the response if the session moved on meanwhile
      this.state.acceptOverlay(data);
    } catch (err) {
      this.report(err);
    }
  }

  private async fetchLocalData(): Promise<void> {
    if (!this.program) return;
    const version = this.state.stampedVersion();
    try {
      const counts = await this.api.counts(this.state.pins);
      if (counts.version !== version) return;
      this.countGrid = hl.fromCounts(counts);
      if (this.localTool === "misses") {
        const m = await this.api.misses();
        if (m.version === version) this.misses = m;
      }
      if (this.localTool === "physical") {
        const p = await this.api.physicalMovement();
        if (p.version === version) this.physical = p;
      }
    } catch (err) {
      this.report(err);
      return;
    }
    this.invalidate();
  }

  private async fetchPlayback(): Promise<void> {
    const version = this.state.stampedVersion();
    try {
      const head = await this.api.trace(0, 0);
      const upTo = Math.min(head.total, PLAYBACK_FETCH_CAP);
      const doc = await this.api.trace(0, upTo);
      if (doc.version !== version) return;
      this.events = doc.events;
      const range = this.el("cursor-range") as HTMLInputElement;
      range.max = String(upTo);
      this.el("cursor-note").textContent =
        head.total > upTo
          ? `showing first ${upTo} of ${head.total} events`
          : `${head.total} events`;
    } catch (err) {
      this.report(err);
    }
    this.invalidate();
  }

  // ---- control wiring ----

  private el(id: string): HTMLElement {
    return must(this.doc.getElementById(id), id);
  }

  private wireControls(): void {
    const modeSel = this.el("mode-select") as HTMLSelectElement;
    modeSel.addEventListener("change", () => {
      this.state.setMode(modeSel.value === "local" ? "local" : "global");
      this.doc.body.classList.toggle("local", this.state.mode === "local");
      if (this.state.mode === "local") void this.fetchLocalData();
    });

    const overlaySel = this.el("overlay-select") as HTMLSelectElement;
    overlaySel.addEventListener("change", () => {
      this.state.overlayKind = overlaySel.value as ViewState["overlayKind"];
      void this.fetchOverlay();
    });

    const scaleSel = this.el("scale-select") as HTMLSelectElement;
    scaleSel.addEventListener("change", () => {
      this.state.scaleMethod = scaleSel.value;
      void this.fetchOverlay();
    });

    const toolSel = this.el("tool-select") as HTMLSelectElement;
    toolSel.addEventListener("change", () => {
      this.localTool = toolSel.value as LocalTool;
      this.mates = null;
      this.relatedSelections = [];
      this.relatedGrid = null;
      void this.fetchLocalData();
    });

    const search = this.el("search") as HTMLInputElement;
    search.addEventListener("input", () => this.runSearch(search.value));
    search.addEventListener("keydown", (e) => {
      if (e.key === "Enter") this.jumpToFirstMatch();
    });

    this.el("apply-params").addEventListener("click", () => void this.applyParams());
    this.el("apply-config").addEventListener("click", () => void this.applyConfig());

    const play = this.el("play-btn");
    play.addEventListener("click", () => {
      this.state.playing = !this.state.playing;
      play.textContent = this.state.playing ? "⏸" : "▶";
      if (this.state.playing && !this.events.length) void this.fetchPlayback();
    });
    const speed = this.el("speed-select") as HTMLSelectElement;
    speed.addEventListener("change", () => {
      this.state.speed = Number(speed.value);
    });
    const range = this.el("cursor-range") as HTMLInputElement;
    range.addEventListener("input", () => {
      this.state.cursor = Number(range.value);
      if (!this.events.length) void this.fetchPlayback();
      this.invalidate();
    });
  }

  private buildParamsForm(): void {
    const form = this.el("params-form");
    form.innerHTML = "";
    const symbols = this.program?.doc.symbols ?? [];
    if (!symbols.length) {
      form.textContent = "no symbols";
      return;
    }
    for (const s of symbols) {
      const label = this.doc.createElement("label");
      label.textContent = s.name;
      const input = this.doc.createElement("input");
      input.type = "number";
      input.dataset.symbol = s.name;
      input.value = String(this.bindings[s.name] ?? s.default ?? "");
      label.appendChild(input);
      form.appendChild(label);
    }
  }

  private async applyParams(): Promise<void> {
    const updates: Record<string, number> = {};
    for (const input of this.el("params-form").querySelectorAll("input")) {
      const name = (input as HTMLInputElement).dataset.symbol!;
      const value = Number((input as HTMLInputElement).value);
      if (Number.isInteger(value)) updates[name] = value;
    }
    try {
      const doc: ParamsDoc = await this.api.setParams(updates);
      this.state.stamp(doc.version);
      this.events = [];
      this.state.cursor = 0;
      await this.refresh();
    } catch (err) {
      this.report(err);
    }
  }

  private buildConfigForm(): void {
    if (!this.config) return;
    (this.el("line-size") as HTMLInputElement).value = String(this.config.line_size);
    (this.el("threshold") as HTMLInputElement).value = String(
      this.config.capacity_threshold,
    );
  }

  private async applyConfig(): Promise<void> {
    const lineSize = Number((this.el("line-size") as HTMLInputElement).value);
    const rawT = (this.el("threshold") as HTMLInputElement).value.trim();
    const colorblind = (this.el("palette-toggle") as HTMLInputElement).checked;
    try {
      const doc = await this.api.setConfig({
        line_size: lineSize,
        capacity_threshold: rawT === "inf" ? "inf" : Number(rawT),
        palette: colorblind ? COLORBLIND_PALETTE : DEFAULT_PALETTE,
      });
      this.config = doc;
      this.state.stamp(doc.version);
      await this.fetchOverlay();
      await this.fetchLocalData();
    } catch (err) {
      this.report(err);
    }
  }

  private buildSliders(): void {
    const host = this.el("sliders");
    host.innerHTML = "";
    const maps = this.program?.maps ?? {};
    for (const [path, info] of Object.entries(maps)) {
      if (!info.ranges) continue;
      info.params.forEach((param, d) => {
        const [begin, end, step] = info.ranges![d];
        const row = this.doc.createElement("label");
        row.className = "slider-row";
        const name = this.doc.createElement("span");
        name.textContent = `${param} (${path})`;
        const slider = this.doc.createElement("input");
        slider.type = "range";
        slider.min = String(begin);
        slider.max = String(end);
        slider.step = String(step);
        slider.value = String(this.state.pins[param] ?? begin);
        slider.dataset.param = param;
        const value = this.doc.createElement("output");
        const unpinned = !(param in this.state.pins);
        value.textContent = unpinned ? "free" : slider.value;
        slider.addEventListener("input", () => {
          value.textContent = slider.value;
          this.state.setPin(param, Number(slider.value));
          void this.fetchLocalData();
        });
        const clear = this.doc.createElement("button");
        clear.textContent = "free";
        clear.title = "unpin this parameter";
        clear.addEventListener("click", (e) => {
          e.preventDefault();
          const pins = { ...this.state.pins };
          delete pins[param];
          this.state.pins = pins;
          value.textContent = "free";
          this.state.notify();
          void this.fetchLocalData();
        });
        row.append(name, slider, value, clear);
        host.appendChild(row);
      });
    }
  }

  private buildOutline(): void {
    const host = this.el("outline");
    host.innerHTML = "";
    if (!this.program || !this.layout) return;
    const addItem = (label: string, path: string | null, depth: number) => {
      const item = this.doc.createElement("div");
      item.className = "outline-item";
      item.style.paddingLeft = `${8 + depth * 14}px`;
      item.textContent = label;
      if (path) {
        item.addEventListener("click", () => this.navigateTo(path));
      }
      host.appendChild(item);
    };
    for (const state of this.program.doc.states) {
      addItem(state.name, null, 0);
      const walk = (nodes: typeof state.nodes, prefix: string, depth: number) => {
        for (const n of nodes) {
          if (n.type !== "map") continue;
          const path = `${prefix}/${n.id}`;
          addItem(`${n.id}[${(n.params ?? []).join(",")}]`, path, depth);
          if (n.body) walk(n.body.nodes, path, depth + 1);
        }
      };
      walk(state.nodes, state.name, 1);
    }
  }

  // ---- graph canvas interaction ----

  private wireGraphCanvas(): void {
    const canvas = this.graphCanvas;
    canvas.addEventListener("mousedown", (e) => {
      this.dragging = true;
      this.dragLast = [e.offsetX, e.offsetY];
    });
    canvas.addEventListener("mousemove", (e) => {
      if (!this.dragging) return;
      const vp = this.state.viewport;
      vp.x -= (e.offsetX - this.dragLast[0]) / vp.zoom;
      vp.y -= (e.offsetY - this.dragLast[1]) / vp.zoom;
      this.dragLast = [e.offsetX, e.offsetY];
      this.animTarget = null;
      this.invalidate();
    });
    canvas.addEventListener("mouseup", (e) => {
      const moved =
        Math.abs(e.offsetX - this.dragLast[0]) + Math.abs(e.offsetY - this.dragLast[1]);
      this.dragging = false;
      if (moved < 3) this.clickGraph(e.offsetX, e.offsetY);
    });
    canvas.addEventListener("mouseleave", () => {
      this.dragging = false;
    });
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      const vp = this.state.viewport;
      const [wx, wy] = screenToWorld(vp, e.offsetX, e.offsetY);
      const factor = e.deltaY < 0 ? 1.15 : 1 / 1.15;
      vp.zoom = Math.min(6, Math.max(0.05, vp.zoom * factor));
      vp.x = wx - e.offsetX / vp.zoom;
      vp.y = wy - e.offsetY / vp.zoom;
      this.animTarget = null;
      this.invalidate();
    });
    this.minimap.addEventListener("click", (e) => {
      if (!this.layout || !this.minimapT) return;
      const [wx, wy] = minimapToWorld(this.minimapT, e.offsetX, e.offsetY);
      this.animateViewportTo(wx, wy, this.state.viewport.zoom);
    });
  }

  private clickGraph(sx: number, sy: number): void {
    if (!this.layout) return;
    const [wx, wy] = screenToWorld(this.state.viewport, sx, sy);
    const header = hitHeader(this.layout, wx, wy);
    if (header) {
      this.state.toggleCollapsed(header.path);
      this.layout = layoutProgram(this.program!, this.state.collapsed);
      this.invalidate();
      return;
    }
    const box = hitTest(this.layout, wx, wy);
    this.showNodeDetails(box?.path ?? null);
  }

  private showNodeDetails(path: string | null): void {
    const panel = this.el("details");
    if (!path || !this.layout) {
      this.stateSelect(null);
      panel.innerHTML = "";
      return;
    }
    this.stateSelect(path);
    const box = this.layout.nodes[path];
    const rows: string[] = [`<h3>${box.label}</h3>`, `<div>path: ${path}</div>`];
    const overlay = this.state.overlay;
    if (overlay?.kind === "intensity" && overlay.entries[path]) {
      const entry = overlay.entries[path] as any;
      if (entry.intensity) {
        rows.push(
          `<div>intensity: ${entry.intensity.exact} (${entry.intensity.value})</div>`,
        );
      }
    }
    if (overlay?.kind === "movement" && this.program) {
      for (const e of this.program.edges) {
        if (e.src !== path && e.dst !== path) continue;
        const entry = overlay.entries[e.id] as { bytes?: number } | undefined;
        if (entry?.bytes !== undefined) {
          rows.push(`<div>${e.id} (${e.container} ${e.kind}): ${entry.bytes} B</div>`);
        }
      }
    }
    const source = this.nodeSource(path);
    rows.push(
      source
        ? `<div>source: <a href="${source}">${source}</a></div>`
        : `<div class="dim">source: not provided by this program</div>`,
    );
    panel.innerHTML = rows.join("");
  }

  /** Optional source-location attribution, when the format carries one. */
  private nodeSource(path: string): string | null {
    if (!this.program) return null;
    const parts = path.split("/");
    let nodes = this.program.doc.states.find((s) => s.name === parts[0])?.nodes;
    let node: any = null;
    for (const part of parts.slice(1)) {
      node = nodes?.find((n) => n.id === part) ?? null;
      nodes = node?.body?.nodes;
    }
    return node && typeof node.source === "string" ? node.source : null;
  }

  private stateSelect(path: string | null): void {
    this.state.selectedNode = path;
    this.invalidate();
  }

  private runSearch(query: string): void {
    this.searchMatches.clear();
    if (this.layout && query) {
      const q = query.toLowerCase();
      for (const box of Object.values(this.layout.nodes)) {
        if (
          box.path.toLowerCase().includes(q) ||
          box.label.toLowerCase().includes(q) ||
          (box.container ?? "").toLowerCase().includes(q)
        ) {
          this.searchMatches.add(box.path);
        }
      }
    }
    this.invalidate();
  }

  private jumpToFirstMatch(): void {
    const first = [...this.searchMatches][0];
    if (first) this.navigateTo(first);
  }

  private navigateTo(path: string): void {
    const box = this.layout?.nodes[path];
    if (!box) return;
    const zoom = this.state.viewport.zoom;
    this.animateViewportTo(box.x + box.w / 2, box.y + box.h / 2, zoom);
    this.showNodeDetails(path);
  }

  /** Slowed-down glide of the viewport to center on a world point. */
  private animateViewportTo(wx: number, wy: number, zoom: number): void {
    const vw = this.graphCanvas.width / zoom;
    const vh = this.graphCanvas.height / zoom;
    this.animFrom = { ...this.state.viewport };
    this.animTarget = { x: wx - vw / 2, y: wy - vh / 2, zoom };
    this.animStart = performance.now();
    this.invalidate();
  }

  // ---- grid canvas interaction ----

  private wireGridCanvas(): void {
    this.gridCanvas.addEventListener("click", (e) => {
      const hit = this.gridHit(e.offsetX, e.offsetY);
      if (hit) void this.clickCell(hit.container, hit.indices);
    });
    this.gridCanvas.addEventListener("mousemove", (e) => {
      const hit = this.gridHit(e.offsetX, e.offsetY);
      const tip = this.el("tooltip");
      if (!hit) {
        tip.textContent = "";
        return;
      }
      const cell = this.countGrid.get(hit.container)?.get(hl.keyOf(hit.indices));
      const label = `${hit.container}[${hit.indices.join(",")}]`;
      tip.textContent = cell
        ? `${label}: ${cell.total} accesses (${cell.reads} reads, ${cell.writes} writes)`
        : `${label}: 0 accesses`;
    });
  }

  private gridHit(
    x: number,
    y: number,
  ): { container: string; indices: number[] } | null {
    for (const [container, { spec, y: oy }] of this.gridSpecs) {
      const local = y - oy;
      if (local < 0 || local > spec.height) continue;
      const indices = grid.hitCell(spec, x - GRID_MARGIN, local);
      if (indices) return { container, indices };
    }
    return null;
  }

  private async clickCell(container: string, indices: number[]): Promise<void> {
    const version = this.state.stampedVersion();
    this.state.select(container, indices);
    try {
      if (this.localTool === "lines") {
        const doc: LineMatesDoc = await this.api.lineMates(container, indices);
        if (doc.version !== version) return;
        this.mates = hl.mateSet(doc);
        this.el("detail-note").textContent =
          `${doc.element} at address ${doc.address}, ` +
          `lines [${doc.lines.join(", ")}], ${doc.mates.length} mates`;
      } else if (this.localTool === "related") {
        const doc: RelatedDoc = await this.api.related(
          container,
          indices,
          this.relatedSelections,
        );
        if (doc.version !== version) return;
        this.relatedSelections.push([container, indices]);
        this.relatedGrid = hl.relatedHeat(doc);
        this.el("detail-note").textContent =
          `related to ${doc.selected.join(" + ")}: ${doc.related.length} elements`;
      } else if (this.localTool === "distances") {
        const doc: DistancesDoc = await this.api.distances(container, indices, "max");
        if (doc.version !== version) return;
        this.drawDistanceHistogram(doc);
      }
    } catch (err) {
      this.report(err);
    }
    this.invalidate();
  }

  private drawDistanceHistogram(doc: DistancesDoc): void {
    const tally = new Map<string, number>();
    for (const d of doc.distances) {
      const label = d === "cold" ? "cold" : String(d);
      tally.set(label, (tally.get(label) ?? 0) + 1);
    }
    const buckets = [...tally.entries()]
      .map(([label, count]) => ({ label, count }))
      .sort((a, b) =>
        a.label === "cold" ? 1 : b.label === "cold" ? -1 : Number(a.label) - Number(b.label),
      );
    drawHistogram(ctx2d(this.hist), buckets, 0, 4, this.hist.width, this.hist.height - 20);
    this.el("detail-note").textContent =
      `${doc.element}: ${doc.distances.length} references, worst ${doc.value}`;
  }

  // ---- frame loop ----

  invalidate(): void {
    this.dirty = true;
  }

  private frame(t: number): void {
    const dt = this.lastFrame ? (t - this.lastFrame) / 1000 : 0;
    this.lastFrame = t;

    if (this.animTarget && this.animFrom) {
      const k = Math.min(1, (t - this.animStart) / 600);
      const ease = k < 0.5 ? 2 * k * k : 1 - (-2 * k + 2) ** 2 / 2;
      const vp = this.state.viewport;
      vp.x = this.animFrom.x + (this.animTarget.x - this.animFrom.x) * ease;
      vp.y = this.animFrom.y + (this.animTarget.y - this.animFrom.y) * ease;
      vp.zoom = this.animFrom.zoom + (this.animTarget.zoom - this.animFrom.zoom) * ease;
      if (k >= 1) this.animTarget = null;
      this.dirty = true;
    }

    if (this.state.playing && this.events.length) {
      this.state.cursor = Math.min(
        this.events.length,
        this.state.cursor + this.state.speed * 25 * dt,
      );
      (this.el("cursor-range") as HTMLInputElement).value = String(
        Math.floor(this.state.cursor),
      );
      if (this.state.cursor >= this.events.length) this.state.playing = false;
      this.dirty = true;
    }

    if (this.dirty) {
      this.dirty = false;
      this.draw();
    }
    requestAnimationFrame((next) => this.frame(next));
  }

  private draw(): void {
    if (this.state.mode === "global") this.drawGlobal();
    else this.drawLocal();
  }

  private drawGlobal(): void {
    if (!this.layout) return;
    const ctx = ctx2d(this.graphCanvas);
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.clearRect(0, 0, this.graphCanvas.width, this.graphCanvas.height);
    this.painter.draw(this.layout, this.state.viewport, {
      overlay: this.state.overlay,
      selectedPath: this.state.selectedNode,
      matches: this.searchMatches,
    });
    this.minimapT = drawMinimap(
      ctx2d(this.minimap),
      this.layout,
      this.state.viewport,
      this.graphCanvas.width,
      this.graphCanvas.height,
      this.minimap.width,
      this.minimap.height,
    );
    const lctx = ctx2d(this.legend);
    lctx.clearRect(0, 0, this.legend.width, this.legend.height);
    if (this.state.overlay?.legend) {
      drawLegend(lctx, this.state.overlay.legend, 8, 4, this.legend.width - 16, 12);
    }
  }

  private drawLocal(): void {
    if (!this.program) return;
    const ctx = ctx2d(this.gridCanvas);
    const marks = hl.playbackMarks(this.events, this.state.cursor);
    this.gridSpecs.clear();

    let y = GRID_MARGIN;
    let width = 300;
    const blocks: { container: string; spec: grid.GridSpec; y: number }[] = [];
    for (const [container, shape] of Object.entries(this.program.shapes)) {
      if (!shape) continue;
      const spec = grid.gridSpec(shape);
      blocks.push({ container, spec, y: y + 18 });
      this.gridSpecs.set(container, { spec, y: y + 18 });
      y += 18 + (spec.truncated ? 20 : spec.height) + GRID_MARGIN;
      width = Math.max(width, spec.truncated ? 300 : spec.width + 2 * GRID_MARGIN);
    }
    this.gridCanvas.width = width;
    this.gridCanvas.height = y;
    ctx.clearRect(0, 0, width, y);

    for (const block of blocks) {
      ctx.fillStyle = "#1a202c";
      ctx.font = "12px sans-serif";
      let title = block.container;
      if (this.localTool === "physical" && this.physical) {
        const bytes = this.physical.containers[block.container];
        if (bytes !== undefined) title += `  ${bytes} B moved`;
      }
      ctx.fillText(title, GRID_MARGIN, block.y - 5);
      if (block.spec.truncated) {
        ctx.fillStyle = "#718096";
        ctx.fillText(
          `${block.spec.elements} elements exceed the grid cap (${grid.MAX_CELLS})`,
          GRID_MARGIN,
          block.y + 12,
        );
        continue;
      }
      this.paintContainer(ctx, block.container, block.spec, block.y, marks);
    }
  }

  private paintContainer(
    ctx: CanvasRenderingContext2D,
    container: string,
    spec: grid.GridSpec,
    oy: number,
    marks: hl.PlaybackMarks,
  ): void {
    const counts = this.countGrid.get(container);
    const peak = hl.maxCount(counts);
    const missByKey = new Map<string, { cold: number; capacity: number; hit: number }>();
    if (this.localTool === "misses" && this.misses) {
      for (const e of this.misses.elements) {
        if (e.container === container) missByKey.set(hl.keyOf(e.indices), e);
      }
    }
    const mates = this.mates?.get(container);
    const related = this.relatedGrid?.get(container);
    const relatedPeak = related ? Math.max(...related.values()) : 0;
    const touched = marks.touched.get(container);
    const current = marks.current.get(container);
    const selected =
      this.state.selected?.container === container
        ? hl.keyOf(this.state.selected.indices)
        : null;

    drawGrid(ctx, spec, GRID_MARGIN, oy, (indices) => {
      const key = hl.keyOf(indices);
      const cell = counts?.get(key);
      const paint: { fill?: string; stroke?: string; lineWidth?: number } = {};

      if (this.localTool === "misses") {
        const m = missByKey.get(key);
        if (m) {
          const total = m.cold + m.capacity + m.hit;
          const missy = total ? (m.cold + m.capacity) / total : 0;
          paint.fill =
            m.capacity > 0
              ? rgbString([200, 0, 0], 0.25 + 0.75 * missy)
              : m.cold > 0
                ? rgbString([128, 90, 213], 0.25 + 0.75 * missy)
                : rgbString([0, 128, 0], 0.6);
        }
      } else if (related) {
        const n = related.get(key);
        if (n) paint.fill = rgbString([200, 0, 0], 0.2 + (0.8 * n) / relatedPeak);
      } else if (cell && peak > 0) {
        paint.fill = rgbString([43, 108, 176], 0.15 + (0.85 * cell.total) / peak);
      }

      if (touched?.has(key)) paint.stroke = "#a0aec0";
      if (mates?.has(key)) {
        paint.stroke = "#dd6b20";
        paint.lineWidth = 2;
      }
      if (current && hl.keyOf(current) === key) {
        paint.stroke = "#e53e3e";
        paint.lineWidth = 2.5;
      }
      if (selected === key) {
        paint.stroke = "#2b6cb0";
        paint.lineWidth = 2.5;
      }
      return paint;
    });
  }

  // ---- errors ----

  private report(err: unknown): void {
    if (err instanceof ApiError) {
      if (err.status === 409) {
        this.showBanner("the session state changed underneath this view; reloading");
        void this.refresh();
        return;
      }
      this.showBanner(`${err.status}: ${err.message}`);
      return;
    }
    this.showBanner(String(err));
  }

  private showBanner(text: string): void {
    const banner = this.el("stale-banner");
    banner.textContent = text;
    banner.classList.add("visible");
  }

  private hideBanner(): void {
    this.el("stale-banner").classList.remove("visible");
  }
}

const GRID_MARGIN = 14;

export function boot(): void {
  const app = new App(document, new ApiClient(""));
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("graph-canvas")) {
  boot();
}
