import { describe, expect, it } from "vitest";

import { gaugePolyline, isMonotone, traceScores } from "./gauge.js";
import type { BlendTrace } from "./types.js";

/** Blend trace recorded from the built-in backend (seed 4, 11 steps). */
const RECORDED_TRACE: BlendTrace = {
  seed: 4,
  steps: [
    { w: 0.0, png_b64: "", pred: [0.9975293063190449, 0.0024706936809551355] },
    { w: 0.1, png_b64: "", pred: [0.9918228983826005, 0.008177101617399478] },
    { w: 0.2, png_b64: "", pred: [0.9734149371632774, 0.026585062836722555] },
    { w: 0.3, png_b64: "", pred: [0.9169648891729905, 0.08303511082700958] },
    { w: 0.4, png_b64: "", pred: [0.7687376355007497, 0.23126236449925033] },
    { w: 0.5, png_b64: "", pred: [0.5, 0.5] },
    { w: 0.6, png_b64: "", pred: [0.23133597447027354, 0.7686640255297265] },
    { w: 0.7, png_b64: "", pred: [0.08303519815797633, 0.9169648018420237] },
    { w: 0.8, png_b64: "", pred: [0.026663405647820992, 0.973336594352179] },
    { w: 0.9, png_b64: "", pred: [0.008170535879548302, 0.9918294641204517] },
    { w: 1.0, png_b64: "", pred: [0.002472874839424266, 0.9975271251605757] },
  ],
};

describe("trace gauge", () => {
  it("reads the second-class score out of categorical steps", () => {
    const scores = traceScores(RECORDED_TRACE);
    expect(scores[0]).toBeCloseTo(0.00247, 5);
    expect(scores[10]).toBeCloseTo(0.99753, 5);
  });

  it("sees the recorded backend trace as monotone", () => {
    expect(isMonotone(traceScores(RECORDED_TRACE))).toBe(true);
  });

  it("flags a trace that dips beyond the quantization allowance", () => {
    expect(isMonotone([0.1, 0.5, 0.3, 0.9])).toBe(false);
    expect(isMonotone([0.1, 0.5, 0.495, 0.9])).toBe(true); // within 0.01
  });

  it("renders the recorded trace as a left-to-right rising curve", () => {
    const points = gaugePolyline(RECORDED_TRACE, 360, 140);
    expect(points).toHaveLength(11);
    for (let i = 1; i < points.length; i++) {
      expect(points[i].x).toBeGreaterThan(points[i - 1].x);
      // canvas y grows downward, so a rising score means non-increasing y
      expect(points[i].y).toBeLessThanOrEqual(points[i - 1].y + 1e-9);
    }
    expect(points[0].x).toBe(8);
    expect(points[10].x).toBe(352);
  });

  it("handles continuous single-value heads", () => {
    const trace: BlendTrace = {
      seed: 0,
      steps: [
        { w: 0, png_b64: "", pred: [-0.98] },
        { w: 1, png_b64: "", pred: [0.98] },
      ],
    };
    expect(traceScores(trace)).toEqual([-0.98, 0.98]);
  });
});
