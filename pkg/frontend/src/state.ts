/** Studio state and its translation into API payloads.
 *
 * The UI never computes pixels or predictions itself: every view is driven
 * by what the service returns for the payloads built here.
 */

import type {
  ConcordanceBucket,
  GeneratePayload,
  ProjectInfo,
} from "./types.js";

export interface StudioState {
  seed: number;
  /** Blend weight for the uniform slider mode; 0 is the first class. */
  w: number;
  /** Per-layer class switch (0 or 1), one entry per conditioning layer. */
  toggles: number[];
  bucket: ConcordanceBucket;
}

export class StateValidationError extends Error {}

export function initialState(project: ProjectInfo): StudioState {
  return {
    seed: 0,
    w: 0,
    toggles: new Array(project.backend.layers).fill(0),
    bucket: "strong",
  };
}

export function validateState(state: StudioState, project: ProjectInfo): void {
  const layers = project.backend.layers;
  if (state.toggles.length !== layers) {
    throw new StateValidationError(
      `layer toggles carry ${state.toggles.length} switches but the backend ` +
        `conditions ${layers} layers`,
    );
  }
  if (!(state.w >= 0 && state.w <= 1)) {
    throw new StateValidationError(`blend weight must be in [0, 1], got ${state.w}`);
  }
  if (!Number.isInteger(state.seed) || state.seed < 0) {
    throw new StateValidationError(`seed must be a non-negative integer, got ${state.seed}`);
  }
  for (const t of state.toggles) {
    if (t !== 0 && t !== 1) {
      throw new StateValidationError(`layer toggles must be 0 or 1, got ${t}`);
    }
  }
}

/** Schedule matrix for a toggle vector: layer i holds the toggled class embedding. */
export function scheduleFromToggles(
  toggles: number[],
  project: ProjectInfo,
): number[][] {
  return toggles.map((t) => [...project.embeddings[t].vector]);
}

/**
 * Payload for the current state: a uniform state (all toggles alike) rides the
 * blend slider as {seed, w}; a split state sends the explicit schedule.
 */
export function requestForState(
  state: StudioState,
  project: ProjectInfo,
): GeneratePayload {
  validateState(state, project);
  const uniform = state.toggles.every((t) => t === state.toggles[0]);
  if (uniform) {
    return { seed: state.seed, w: state.w };
  }
  return { seed: state.seed, schedule: scheduleFromToggles(state.toggles, project) };
}

/** Toggle vector for a preset of (start, end, class) ranges, 1-based inclusive. */
export function togglesFromRanges(
  ranges: [number, number, number][],
  layers: number,
): number[] {
  const toggles = new Array(layers).fill(0);
  for (const [start, end, cls] of ranges) {
    for (let layer = start; layer <= end; layer++) {
      toggles[layer - 1] = cls;
    }
  }
  return toggles;
}

/** The weights a slider sweep emits: n detents equally spaced over [0, 1]. */
export function sliderDetents(n: number): number[] {
  if (n < 2) throw new StateValidationError("a sweep needs at least 2 detents");
  return Array.from({ length: n }, (_, i) => i / (n - 1));
}

/** Seed browser rows: seeds the latest screen assigned to the active bucket. */
export function browserModel(seeds: number[], bucket: ConcordanceBucket) {
  return {
    bucket,
    count: seeds.length,
    rows: seeds.map((seed) => ({ seed, label: `seed ${seed}` })),
  };
}
