/** Pure geometry for the prediction gauge that plots a blend trace. */

import type { BlendTrace } from "./types.js";

export interface GaugePoint {
  x: number;
  y: number;
}

/** Second-class score per step (post-softmax index 1, or the raw value). */
export function traceScores(trace: BlendTrace): number[] {
  return trace.steps.map((s) => (s.pred.length > 1 ? s.pred[1] : s.pred[0]));
}

/** Non-decreasing within a quantization allowance. */
export function isMonotone(scores: number[], tolerance = 0.01): boolean {
  for (let i = 1; i < scores.length; i++) {
    if (scores[i] < scores[i - 1] - tolerance) return false;
  }
  return true;
}

/**
 * Map a trace onto canvas coordinates: w spans the x range left to right,
 * score 0..1 spans the y range bottom to top.
 */
export function gaugePolyline(
  trace: BlendTrace,
  width: number,
  height: number,
  pad = 8,
): GaugePoint[] {
  const scores = traceScores(trace);
  return trace.steps.map((step, i) => ({
    x: pad + step.w * (width - 2 * pad),
    y: height - pad - Math.min(Math.max(scores[i], 0), 1) * (height - 2 * pad),
  }));
}
