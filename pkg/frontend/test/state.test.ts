import { describe, expect, it } from "vitest";

import { ViewState, legendFrom, type OverlayData } from "../src/state.js";

function overlay(version: number): OverlayData {
  return {
    kind: "movement",
    version,
    scale: "median",
    entries: { "main#e0": { position: 0.5, color: [255, 255, 0] } },
    legend: legendFrom(
      { min: 0, max: 192, center: 96 },
      [
        [0, [0, 128, 0]],
        [1, [200, 0, 0]],
      ],
    ),
  };
}

describe("stale response discarding", () => {
  it("accepts a response stamped with the current version", () => {
    const state = new ViewState();
    state.stamp(3);
    expect(state.acceptOverlay(overlay(3))).toBe(true);
    expect(state.overlay?.version).toBe(3);
  });

  it("drops a response from an older state", () => {
    const state = new ViewState();
    state.stamp(3);
    state.acceptOverlay(overlay(3));
    state.stamp(4); // params changed while a fetch was in flight
    expect(state.acceptOverlay(overlay(3))).toBe(false);
    expect(state.overlay?.version).toBe(3); // old data stays until replaced
    expect(state.acceptOverlay(overlay(4))).toBe(true);
  });

  it("tracks freshness explicitly for non-overlay fetches", () => {
    const state = new ViewState();
    state.stamp(7);
    expect(state.fresh(7)).toBe(true);
    expect(state.fresh(6)).toBe(false);
    expect(state.stampedVersion()).toBe(7);
  });
});

describe("legend", () => {
  it("mirrors the fitted scale bounds", () => {
    const legend = legendFrom(
      { min: 1, max: 97, center: 25 },
      [
        [0, [0, 128, 0]],
        [0.5, [255, 255, 0]],
        [1, [200, 0, 0]],
      ],
    );
    expect(legend).not.toBeNull();
    expect(legend!.lo).toBe(1);
    expect(legend!.center).toBe(25);
    expect(legend!.hi).toBe(97);
    expect(legend!.stops).toHaveLength(3);
  });

  it("is absent when the overlay fitted nothing", () => {
    expect(legendFrom({ min: null, max: null, center: null }, [])).toBeNull();
  });
});

describe("view state changes", () => {
  it("notifies subscribers and supports unsubscribe", () => {
    const state = new ViewState();
    let calls = 0;
    const off = state.subscribe(() => (calls += 1));
    state.setMode("local");
    state.setMode("local"); // no-op, same mode
    state.setPin("i", 1);
    expect(calls).toBe(2);
    off();
    state.setPin("j", 2);
    expect(calls).toBe(2);
    expect(state.pins).toEqual({ i: 1, j: 2 });
  });

  it("toggles collapsed scopes", () => {
    const state = new ViewState();
    state.toggleCollapsed("main/op");
    expect(state.collapsed.has("main/op")).toBe(true);
    state.toggleCollapsed("main/op");
    expect(state.collapsed.has("main/op")).toBe(false);
  });

  it("tracks element selection", () => {
    const state = new ViewState();
    state.select("A", [0, 0]);
    expect(state.selected).toEqual({ container: "A", indices: [0, 0] });
    state.clearSelection();
    expect(state.selected).toBeNull();
  });
});
