/** Shapes of the documents the analysis service returns. */

export type Rgb = [number, number, number];

export interface ProgramNodeDoc {
  id: string;
  type: "access" | "tasklet" | "map";
  container?: string;
  code?: string;
  inputs?: string[];
  outputs?: string[];
  params?: string[];
  ranges?: { begin: unknown; end: unknown; step?: unknown }[];
  body?: GraphDoc;
}

export interface EdgeDoc {
  src: string;
  dst: string;
  container: string;
  kind: "read" | "write";
  src_conn?: string;
  dst_conn?: string;
}

export interface GraphDoc {
  nodes: ProgramNodeDoc[];
  edges: EdgeDoc[];
}

export interface ProgramDoc {
  version: number;
  name: string;
  doc: {
    name: string;
    symbols?: { name: string; default?: number }[];
    containers: { name: string; shape: unknown[]; element_size: number }[];
    states: ({ name: string } & GraphDoc)[];
  };
  shapes: Record<string, number[] | null>;
  maps: Record<string, { params: string[]; ranges: [number, number, number][] | null }>;
  edges: {
    id: string;
    state: string;
    graph: string;
    src: string;
    dst: string;
    container: string;
    kind: string;
  }[];
}

export interface ParamsDoc {
  version: number;
  bindings: Record<string, number>;
}

export interface ConfigDoc {
  version: number;
  line_size: number;
  capacity_threshold: number | "inf";
  palette: [number, Rgb][];
}

export interface OverlayEntry {
  position: number | null;
  color: Rgb | null;
}

export interface ScaleBounds {
  min: number | null;
  max: number | null;
  center: number | null;
}

export interface MovementOverlayDoc {
  version: number;
  scale: string;
  bounds: ScaleBounds;
  palette: [number, Rgb][];
  edges: Record<string, OverlayEntry & { bytes: number }>;
}

export interface IntensityOverlayDoc {
  version: number;
  scale: string;
  bounds: ScaleBounds;
  palette: [number, Rgb][];
  nodes: Record<string, OverlayEntry & { intensity: { value: number; exact: string } | null }>;
}

export interface TraceEventDoc {
  time: number;
  point: [string, number][];
  edge: string;
  container: string;
  indices: number[];
  kind: "read" | "write";
}

export interface TraceDoc {
  version: number;
  total: number;
  events: TraceEventDoc[];
}

export interface CountsDoc {
  version: number;
  pins: Record<string, number>;
  shapes: Record<string, number[]>;
  containers: Record<
    string,
    { indices: number[]; total: number; reads: number; writes: number }[]
  >;
}

export interface LineMatesDoc {
  version: number;
  element: string;
  address: number;
  lines: number[];
  mates: { container: string; indices: number[] }[];
}

export interface RelatedDoc {
  version: number;
  selected: string[];
  related: { container: string; indices: number[]; count: number }[];
}

export interface DistancesDoc {
  version: number;
  element: string;
  mode: string;
  value: number | "cold" | null;
  distances: (number | "cold")[];
}

export interface MissesDoc {
  version: number;
  capacity_threshold: number | "inf";
  total: { cold: number; capacity: number; hit: number };
  containers: Record<string, { cold: number; capacity: number; hit: number }>;
  elements: {
    container: string;
    indices: number[];
    cold: number;
    capacity: number;
    hit: number;
  }[];
}

export interface PhysicalDoc {
  version: number;
  line_size: number;
  containers: Record<string, number>;
  edges: Record<string, number>;
}

export interface StatsDoc {
  version: number;
  program: string;
  cache: { hits: number; misses: number; entries: number };
}
