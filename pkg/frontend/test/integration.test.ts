/**
 * End-to-end checks against the real analysis service.
 *
 * Each block spawns `python3 -m moviz.cli serve` on a random high port
 * with a fixture from the repository root and drives it through the
 * same ApiClient the app uses. Asserts the documented UI behaviors:
 * pinned sliders highlight exactly the accessed elements, a cache-line
 * click highlights a full line of cells, scale switches re-fit the
 * legend without restarting the engine, and displayed numbers are the
 * service's own, untransformed.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { fromCounts, mateSet } from "../src/highlights.js";
import { gridSpec, hitCell, cellRect } from "../src/grid.js";
import { legendFrom } from "../src/state.js";

const REPO_ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "../..");

interface Server {
  base: string;
  proc: ChildProcess;
}

async function startServer(fixture: string): Promise<Server> {
  const port = 20000 + Math.floor(Math.random() * 20000);
  const base = `http://127.0.0.1:${port}`;
  const proc = spawn(
    "python3",
    ["-m", "moviz.cli", "serve", fixture, "--port", String(port)],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  const deadline = Date.now() + 15000;
  while (Date.now() < deadline) {
    try {
      const r = await fetch(`${base}/api/program`);
      if (r.ok) return { base, proc };
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  proc.kill();
  throw new Error(`service for ${fixture} did not come up on ${base}`);
}

describe("outer product end to end", () => {
  let server: Server;
  let rawBodies: string[];
  let client: ApiClient;

  beforeAll(async () => {
    server = await startServer("fixtures/outer.json");
    rawBodies = [];
    client = new ApiClient(server.base, async (url, init) => {
      const response = await fetch(url, init);
      const copy = response.clone();
      rawBodies.push(await copy.text());
      return response;
    });
  }, 30000);

  afterAll(() => {
    server?.proc.kill();
  });

  it("pinning i=1, j=2 highlights exactly A[1], B[2], C[1,2]", async () => {
    const counts = await client.counts({ i: 1, j: 2 });
    const grid = fromCounts(counts);
    const highlighted: string[] = [];
    for (const [container, cells] of grid) {
      for (const key of cells.keys()) highlighted.push(`${container}[${key}]`);
    }
    expect(highlighted.sort()).toEqual(["A[1]", "B[2]", "C[1,2]"]);
    expect(counts.pins).toEqual({ i: 1, j: 2 });
  });

  it("shows tooltip numbers byte-for-byte from the wire", async () => {
    rawBodies.length = 0;
    const counts = await client.counts({ i: 1, j: 2 });
    const wire = JSON.parse(rawBodies[0]);
    // what the tooltip renders is exactly what was on the wire
    const cell = fromCounts(counts).get("A")!.get("1")!;
    expect(cell.total).toBe(wire.containers.A[0].total);
    expect(cell.reads).toBe(wire.containers.A[0].reads);
    expect(cell.writes).toBe(wire.containers.A[0].writes);
    expect(`${cell.total} accesses (${cell.reads} reads, ${cell.writes} writes)`).toBe(
      "1 accesses (1 reads, 0 writes)",
    );
  });

  it("switching the scale method re-fits the legend without a restart", async () => {
    const pidBefore = server.proc.pid;
    const mean = await client.movementOverlay("mean");
    const hist = await client.movementOverlay("histogram");
    expect(server.proc.pid).toBe(pidBefore);
    expect(hist.version).toBe(mean.version);

    const meanLegend = legendFrom(mean.bounds, mean.palette)!;
    const histLegend = legendFrom(hist.bounds, hist.palette)!;
    expect(meanLegend).not.toBeNull();
    expect(histLegend).not.toBeNull();
    expect(meanLegend.hi).not.toBe(histLegend.hi);

    // positions move with the scale, values do not
    const ids = Object.keys(mean.edges);
    expect(ids.length).toBeGreaterThan(0);
    for (const id of ids) {
      expect(hist.edges[id].bytes).toBe(mean.edges[id].bytes);
    }
    expect(ids.some((id) => hist.edges[id].position !== mean.edges[id].position)).toBe(
      true,
    );
  });

  it("playback windows come from the service in order", async () => {
    const head = await client.trace(0, 0);
    expect(head.total).toBe(36);
    const doc = await client.trace(0, 5);
    expect(doc.events).toHaveLength(5);
    expect(doc.events.map((e) => e.time)).toEqual([0, 1, 2, 3, 4]);
    expect(doc.events[0]).toEqual({
      time: 0,
      point: [["i", 0], ["j", 0]],
      edge: "main/op#e0",
      container: "A",
      indices: [0],
      kind: "read",
    });
  });
});

describe("cache-line inspection end to end", () => {
  let server: Server;
  let client: ApiClient;

  beforeAll(async () => {
    server = await startServer("fixtures/matmul_aligned.json");
    client = new ApiClient(server.base);
  }, 30000);

  afterAll(() => {
    server?.proc.kill();
  });

  it("clicking A[0,0] with the line tool highlights 16 cells", async () => {
    const doc = await client.lineMates("A", [0, 0]);
    expect(doc.mates).toHaveLength(16);

    // every mate the UI would outline is a drawable cell of A's grid
    const program = await client.program();
    const spec = gridSpec(program.shapes.A!);
    const mates = mateSet(doc).get("A")!;
    expect(mates.size).toBe(16);
    for (const key of mates) {
      const indices = key.split(",").map(Number);
      const r = cellRect(spec, indices);
      expect(hitCell(spec, r.x + 1, r.y + 1)).toEqual(indices);
    }
  });

  it("stacked related selections accumulate counts", async () => {
    const first = await client.related("A", [0, 0]);
    const both = await client.related("A", [0, 0], [["B", [0, 0]]]);
    expect(both.selected).toHaveLength(2);
    const sum = (doc: typeof first) =>
      doc.related.reduce((t, r) => t + r.count, 0);
    expect(sum(both)).toBeGreaterThan(sum(first));
  });
});
