/** DOM rendering: pair view, blend slider with gauge, layer toggles, seed browser. */

import { gaugePolyline, isMonotone, traceScores } from "./gauge.js";
import { browserModel } from "./state.js";
import type {
  BlendTrace,
  ConcordanceBucket,
  GenerateResponse,
  GridResponse,
  Prediction,
  ProjectInfo,
} from "./types.js";

export function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function formatPrediction(pred: Prediction, classes: string[]): string {
  if (pred.head === "categorical") {
    return pred.values
      .map((v, i) => `${classes[i] ?? `class ${i}`}: ${(100 * v).toFixed(1)}%`)
      .join("  ");
  }
  return `score ${pred.values[0].toFixed(3)}`;
}

export function setImage(img: HTMLImageElement, pngB64: string): void {
  img.src = `data:image/png;base64,${pngB64}`;
}

export function renderPair(
  project: ProjectInfo,
  left: GenerateResponse,
  right: GenerateResponse,
): void {
  setImage(el<HTMLImageElement>("pair-left"), left.png_b64);
  setImage(el<HTMLImageElement>("pair-right"), right.png_b64);
  el("pair-left-caption").textContent =
    `${project.backend.classes[0]} | ${formatPrediction(left.prediction, project.backend.classes)}`;
  el("pair-right-caption").textContent =
    `${project.backend.classes[1]} | ${formatPrediction(right.prediction, project.backend.classes)}`;
}

export function renderCurrent(project: ProjectInfo, response: GenerateResponse): void {
  setImage(el<HTMLImageElement>("current-image"), response.png_b64);
  el("current-caption").textContent = formatPrediction(
    response.prediction,
    project.backend.classes,
  );
}

export function renderGauge(canvas: HTMLCanvasElement, trace: BlendTrace): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const points = gaugePolyline(trace, canvas.width, canvas.height);
  ctx.strokeStyle = "#2a6f97";
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
  ctx.stroke();
  ctx.fillStyle = "#2a6f97";
  for (const p of points) {
    ctx.beginPath();
    ctx.arc(p.x, p.y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  const scores = traceScores(trace);
  el("gauge-caption").textContent = isMonotone(scores)
    ? "prediction transitions smoothly across the blend"
    : "warning: prediction is not monotone across this blend";
}

export function renderGrid(project: ProjectInfo, grid: GridResponse): void {
  const host = el("grid-cells");
  host.replaceChildren();
  for (const cell of grid.cells) {
    const fig = document.createElement("figure");
    const img = document.createElement("img");
    setImage(img, cell.png_b64);
    const cap = document.createElement("figcaption");
    const ranges = cell.ranges
      .map(([s, e, c]) => `${s}-${e}:${project.backend.classes[c]}`)
      .join(" ");
    const pred = formatPrediction(
      { head: "categorical", values: cell.pred } as Prediction,
      project.backend.classes,
    );
    cap.textContent = `${cell.label} (${ranges}) ${pred}`;
    fig.append(img, cap);
    host.append(fig);
  }
}

export function renderToggles(
  toggles: number[],
  classes: string[],
  onFlip: (layer: number) => void,
): void {
  const host = el("layer-toggles");
  host.replaceChildren();
  toggles.forEach((value, i) => {
    const button = document.createElement("button");
    button.className = `toggle toggle-${value}`;
    button.textContent = `${i + 1}: ${classes[value]}`;
    button.addEventListener("click", () => onFlip(i));
    host.append(button);
  });
}

export function renderSeedBrowser(
  seeds: number[],
  bucket: ConcordanceBucket,
  onPick: (seed: number) => void,
): void {
  const model = browserModel(seeds, bucket);
  el("browser-caption").textContent = `${model.count} ${model.bucket} seeds`;
  const host = el("seed-list");
  host.replaceChildren();
  for (const row of model.rows) {
    const button = document.createElement("button");
    button.textContent = row.label;
    button.addEventListener("click", () => onPick(row.seed));
    host.append(button);
  }
}

export function showBanner(message: string): void {
  const banner = el("banner");
  banner.textContent = message;
  banner.classList.add("visible");
  setTimeout(() => banner.classList.remove("visible"), 4000);
}

export function markStale(stale: boolean): void {
  el("current-image").classList.toggle("stale", stale);
}
