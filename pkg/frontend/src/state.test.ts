import { describe, expect, it } from "vitest";

import {
  browserModel,
  initialState,
  requestForState,
  scheduleFromToggles,
  sliderDetents,
  StateValidationError,
  togglesFromRanges,
  validateState,
} from "./state.js";
import type { ProjectInfo } from "./types.js";

/** Project shaped like the built-in backend: axis-unit class embeddings. */
function toyProject(layers = 12, eDim = 16): ProjectInfo {
  const axis = (i: number) => {
    const v = new Array(eDim).fill(0);
    v[i] = 1;
    return v;
  };
  return {
    config: {},
    backend: {
      id: "toy",
      kind: "toy",
      layers,
      e_dim: eDim,
      z_dim: 64,
      classes: ["A", "B"],
      gen_um: 400,
      gen_px: 256,
      clf_um: 302,
      clf_px: 299,
    },
    embeddings: [
      { id: 0, name: "A", vector: axis(0) },
      { id: 1, name: "B", vector: axis(1) },
    ],
  };
}

describe("requestForState", () => {
  it("emits {seed, w} when every layer toggle agrees", () => {
    const project = toyProject();
    const state = { ...initialState(project), seed: 7, w: 0 };
    expect(requestForState(state, project)).toEqual({ seed: 7, w: 0 });
  });

  it("emits {seed, w} at nonzero slider positions too", () => {
    const project = toyProject();
    const state = { ...initialState(project), seed: 3, w: 0.5 };
    expect(requestForState(state, project)).toEqual({ seed: 3, w: 0.5 });
  });

  it("builds the B2 preset schedule from toggles for layers 4-6", () => {
    // the second preset cell of the layer grid: ranges [[1,3,0],[4,6,1],[7,12,0]]
    const project = toyProject();
    const toggles = togglesFromRanges(
      [
        [1, 3, 0],
        [4, 6, 1],
        [7, 12, 0],
      ],
      12,
    );
    const state = { ...initialState(project), seed: 7, toggles };
    const payload = requestForState(state, project);

    const eA = project.embeddings[0].vector;
    const eB = project.embeddings[1].vector;
    const expected = Array.from({ length: 12 }, (_, i) =>
      i >= 3 && i <= 5 ? [...eB] : [...eA],
    );
    expect(payload).toEqual({ seed: 7, schedule: expected });
  });

  it("matches scheduleFromToggles for any split state", () => {
    const project = toyProject();
    const toggles = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
    const state = { ...initialState(project), toggles };
    const payload = requestForState(state, project);
    expect(payload).toEqual({
      seed: 0,
      schedule: scheduleFromToggles(toggles, project),
    });
  });

  it("blocks a toggle count that disagrees with the backend layer count", () => {
    const project = toyProject();
    const state = { ...initialState(project), toggles: new Array(10).fill(0) };
    expect(() => requestForState(state, project)).toThrow(StateValidationError);
    expect(() => requestForState(state, project)).toThrow(/12 layers/);
  });

  it("rejects out-of-range weights and junk toggles", () => {
    const project = toyProject();
    expect(() =>
      validateState({ ...initialState(project), w: 1.5 }, project),
    ).toThrow(StateValidationError);
    const bad = { ...initialState(project) };
    bad.toggles = [...bad.toggles];
    bad.toggles[3] = 2;
    expect(() => validateState(bad, project)).toThrow(/0 or 1/);
  });
});

describe("sliderDetents", () => {
  it("emits eleven equally spaced weights across a full sweep", () => {
    const detents = sliderDetents(11);
    expect(detents).toHaveLength(11);
    expect(detents[0]).toBe(0);
    expect(detents[10]).toBe(1);
    for (let i = 0; i < 11; i++) {
      expect(detents[i]).toBeCloseTo(i / 10, 12);
    }
  });

  it("needs at least two detents", () => {
    expect(() => sliderDetents(1)).toThrow(StateValidationError);
  });
});

describe("browserModel", () => {
  it("lists every screened seed for the active bucket", () => {
    const seeds = Array.from({ length: 100 }, (_, i) => i);
    const model = browserModel(seeds, "strong");
    expect(model.count).toBe(100);
    expect(model.rows).toHaveLength(100);
    expect(model.rows[99]).toEqual({ seed: 99, label: "seed 99" });
  });
});
