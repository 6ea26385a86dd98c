/** Studio bootstrap: wires state, API client, and views together. */

import { debounce, StudioClient } from "./api.js";
import {
  initialState,
  requestForState,
  StateValidationError,
  type StudioState,
} from "./state.js";
import {
  el,
  markStale,
  renderCurrent,
  renderGauge,
  renderGrid,
  renderPair,
  renderSeedBrowser,
  renderToggles,
  showBanner,
} from "./views.js";
import type { ConcordanceBucket, ProjectInfo } from "./types.js";

const TRACE_STEPS = 11;

class Studio {
  private state: StudioState;

  constructor(
    private readonly client: StudioClient,
    private readonly project: ProjectInfo,
  ) {
    this.state = initialState(project);
  }

  async start(): Promise<void> {
    el<HTMLInputElement>("seed-input").addEventListener("change", (ev) => {
      this.state.seed = Number((ev.target as HTMLInputElement).value);
      void this.refreshAll();
    });
    const slider = el<HTMLInputElement>("blend-slider");
    slider.addEventListener(
      "input",
      debounce(() => {
        this.state.w = Number(slider.value) / 100;
        this.state.toggles = this.state.toggles.map(() => 0);
        void this.refreshCurrent();
      }, 150),
    );
    el<HTMLSelectElement>("bucket-select").addEventListener("change", (ev) => {
      this.state.bucket = (ev.target as HTMLSelectElement).value as ConcordanceBucket;
      void this.refreshBrowser();
    });
    await this.refreshAll();
  }

  private flipToggle(layer: number): void {
    this.state.toggles[layer] = this.state.toggles[layer] === 0 ? 1 : 0;
    renderToggles(this.state.toggles, this.project.backend.classes, (i) =>
      this.flipToggle(i),
    );
    void this.refreshCurrent();
  }

  private async refreshCurrent(): Promise<void> {
    markStale(true);
    try {
      const payload = requestForState(this.state, this.project);
      const response = await this.client.generate(payload);
      renderCurrent(this.project, response);
      markStale(false);
    } catch (err) {
      if (err instanceof StateValidationError) {
        showBanner(err.message);
      } else if ((err as Error).name !== "AbortError") {
        showBanner(`generation failed: ${(err as Error).message}`);
      }
    }
  }

  private async refreshPairAndTrace(): Promise<void> {
    try {
      const [left, right, trace] = await Promise.all([
        this.client.generate({ seed: this.state.seed, w: 0 }),
        this.client.generate({ seed: this.state.seed, w: 1 }),
        this.client.blend(this.state.seed, TRACE_STEPS),
      ]);
      renderPair(this.project, left, right);
      renderGauge(el<HTMLCanvasElement>("gauge"), trace);
    } catch (err) {
      if ((err as Error).name !== "AbortError") {
        showBanner(`trace failed: ${(err as Error).message}`);
      }
    }
  }

  private async refreshGrid(): Promise<void> {
    try {
      renderGrid(this.project, await this.client.grid(this.state.seed));
    } catch (err) {
      showBanner(`layer grid failed: ${(err as Error).message}`);
    }
  }

  private async refreshBrowser(): Promise<void> {
    try {
      const listing = await this.client.seeds(this.state.bucket, 100);
      renderSeedBrowser(listing.seeds, this.state.bucket, (seed) => {
        this.state.seed = seed;
        el<HTMLInputElement>("seed-input").value = String(seed);
        void this.refreshAll();
      });
    } catch {
      renderSeedBrowser([], this.state.bucket, () => undefined);
      el("browser-caption").textContent = "no finished screening run yet";
    }
  }

  private async refreshAll(): Promise<void> {
    renderToggles(this.state.toggles, this.project.backend.classes, (i) =>
      this.flipToggle(i),
    );
    await Promise.all([
      this.refreshCurrent(),
      this.refreshPairAndTrace(),
      this.refreshGrid(),
      this.refreshBrowser(),
    ]);
  }
}

async function boot(): Promise<void> {
  const client = new StudioClient("");
  try {
    const project = await client.project();
    el("backend-caption").textContent =
      `backend ${project.backend.id} | ${project.backend.classes.join(" vs ")} | ` +
      `${project.backend.layers} layers`;
    await new Studio(client, project).start();
  } catch (err) {
    showBanner(`could not reach the studio service: ${(err as Error).message}`);
  }
}

window.addEventListener("load", () => void boot());
