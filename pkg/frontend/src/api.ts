/**
 * Thin typed client for the analysis service. Every number and color the
 * UI shows comes out of these documents; the client never post-processes
 * values, it only moves them.
 */

import type {
  ConfigDoc,
  CountsDoc,
  DistancesDoc,
  IntensityOverlayDoc,
  LineMatesDoc,
  MissesDoc,
  MovementOverlayDoc,
  ParamsDoc,
  PhysicalDoc,
  ProgramDoc,
  RelatedDoc,
  StatsDoc,
  TraceDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public body: unknown,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const message =
        body && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : `request failed with ${response.status}`;
      throw new ApiError(response.status, message, body);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  program(): Promise<ProgramDoc> {
    return this.request("/api/program");
  }

  params(): Promise<ParamsDoc> {
    return this.request("/api/params");
  }

  setParams(bindings: Record<string, number>): Promise<ParamsDoc> {
    return this.post("/api/params", { bindings });
  }

  config(): Promise<ConfigDoc> {
    return this.request("/api/config");
  }

  setConfig(config: Partial<Omit<ConfigDoc, "version">>): Promise<ConfigDoc> {
    return this.post("/api/config", config);
  }

  movementOverlay(scale: string): Promise<MovementOverlayDoc> {
    return this.request(`/api/overlays/movement?scale=${encodeURIComponent(scale)}`);
  }

  intensityOverlay(scale: string): Promise<IntensityOverlayDoc> {
    return this.request(`/api/overlays/intensity?scale=${encodeURIComponent(scale)}`);
  }

  simulate(maxEvents?: number): Promise<{ version: number; events: number }> {
    return this.post("/api/simulate", maxEvents ? { max_events: maxEvents } : {});
  }

  trace(from: number, to: number): Promise<TraceDoc> {
    return this.request(`/api/trace?from=${from}&to=${to}`);
  }

  counts(pins?: Record<string, number>): Promise<CountsDoc> {
    const entries = Object.entries(pins ?? {});
    const pin = entries.map(([k, v]) => `${k}=${v}`).join(",");
    return this.request(`/api/counts${pin ? `?pin=${encodeURIComponent(pin)}` : ""}`);
  }

  lineMates(container: string, indices: number[]): Promise<LineMatesDoc> {
    return this.request(`/api/element/${element(container, indices)}/linemates`);
  }

  related(
    container: string,
    indices: number[],
    also: [string, number[]][] = [],
  ): Promise<RelatedDoc> {
    const extra = also
      .map(([c, i]) => `also=${encodeURIComponent(`${c}:${i.join(",")}`)}`)
      .join("&");
    return this.request(
      `/api/element/${element(container, indices)}/related${extra ? `?${extra}` : ""}`,
    );
  }

  distances(container: string, indices: number[], mode: string): Promise<DistancesDoc> {
    return this.request(
      `/api/element/${element(container, indices)}/distances?mode=${mode}`,
    );
  }

  misses(): Promise<MissesDoc> {
    return this.request("/api/misses");
  }

  physicalMovement(): Promise<PhysicalDoc> {
    return this.request("/api/movement/physical");
  }

  stats(): Promise<StatsDoc> {
    return this.request("/api/stats");
  }
}

function element(container: string, indices: number[]): string {
  return `${encodeURIComponent(container)}/${indices.join(",")}`;
}
