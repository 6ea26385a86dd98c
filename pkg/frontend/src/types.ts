/** Wire types for the studio HTTP API. */

export interface ClassEmbedding {
  id: number;
  name: string;
  vector: number[];
}

export interface BackendInfo {
  id: string;
  kind: string;
  layers: number;
  e_dim: number;
  z_dim: number;
  classes: string[];
  gen_um: number;
  gen_px: number;
  clf_um: number;
  clf_px: number;
}

export interface ProjectInfo {
  config: unknown;
  backend: BackendInfo;
  embeddings: ClassEmbedding[];
}

export interface Prediction {
  head: "categorical" | "continuous";
  values: number[];
}

export interface GenerateResponse {
  png_b64: string;
  prediction: Prediction;
}

export interface BlendStep {
  w: number;
  png_b64: string;
  pred: number[];
}

export interface BlendTrace {
  seed: number;
  steps: BlendStep[];
}

export interface GridCell {
  label: string;
  ranges: [number, number, number][];
  png_b64: string;
  pred: number[];
}

export interface GridResponse {
  seed: number;
  cells: GridCell[];
}

export interface SeedList {
  bucket: string;
  seeds: number[];
}

/** Payload for POST /api/generate: uniform blend weight or explicit schedule. */
export type GeneratePayload =
  | { seed: number; w: number }
  | { seed: number; schedule: number[][] };

export type ConcordanceBucket = "strong" | "weak" | "non";
