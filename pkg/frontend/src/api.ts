/** API client with request-digest caching, cancellation, and a small
 * concurrency gate. Identical payloads are answered from cache so a
 * re-render of unchanged state never issues a duplicate network request.
 */

import type {
  BlendTrace,
  GeneratePayload,
  GenerateResponse,
  GridResponse,
  ProjectInfo,
  SeedList,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/** Stable digest of a payload; key order is fixed by construction site. */
export function payloadDigest(method: string, url: string, body?: unknown): string {
  return `${method} ${url} ${body === undefined ? "" : JSON.stringify(body)}`;
}

class Gate {
  private active = 0;
  private waiting: (() => void)[] = [];

  constructor(private readonly limit: number) {}

  async acquire(): Promise<void> {
    if (this.active < this.limit) {
      this.active++;
      return;
    }
    await new Promise<void>((resolve) => this.waiting.push(resolve));
    this.active++;
  }

  release(): void {
    this.active--;
    const next = this.waiting.shift();
    if (next) next();
  }
}

export class StudioClient {
  private readonly fetchImpl: FetchLike;
  private readonly cache = new Map<string, Promise<unknown>>();
  private readonly inFlight = new Map<string, AbortController>();
  private readonly gate: Gate;

  constructor(
    private readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
    maxConcurrent = 2,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    this.gate = new Gate(maxConcurrent);
  }

  /** Cached JSON request; `channel` names a slot whose stale call gets aborted. */
  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    channel?: string,
  ): Promise<T> {
    const url = this.baseUrl + path;
    const digest = payloadDigest(method, url, body);
    const cached = this.cache.get(digest);
    if (cached) return cached as Promise<T>;

    const controller = new AbortController();
    if (channel) {
      this.inFlight.get(channel)?.abort();
      this.inFlight.set(channel, controller);
    }
    const work = (async () => {
      await this.gate.acquire();
      try {
        if (controller.signal.aborted) {
          // superseded while waiting for a slot; never hits the network
          throw new DOMException("request superseded", "AbortError");
        }
        const init: RequestInit = { method, signal: controller.signal };
        if (body !== undefined) {
          init.headers = { "content-type": "application/json" };
          init.body = JSON.stringify(body);
        }
        const resp = await this.fetchImpl(url, init);
        if (!resp.ok) {
          throw new ApiError(resp.status, await resp.text());
        }
        return (await resp.json()) as T;
      } finally {
        this.gate.release();
        if (channel && this.inFlight.get(channel) === controller) {
          this.inFlight.delete(channel);
        }
      }
    })();
    this.cache.set(
      digest,
      work.catch((err) => {
        this.cache.delete(digest); // errors are not cacheable outcomes
        throw err;
      }),
    );
    return this.cache.get(digest) as Promise<T>;
  }

  project(): Promise<ProjectInfo> {
    return this.request("GET", "/api/project");
  }

  generate(payload: GeneratePayload): Promise<GenerateResponse> {
    return this.request("POST", "/api/generate", payload, "generate");
  }

  blend(seed: number, steps: number): Promise<BlendTrace> {
    return this.request("POST", "/api/blend", { seed, steps }, "blend");
  }

  grid(seed: number): Promise<GridResponse> {
    return this.request("POST", "/api/fig3", { seed });
  }

  seeds(bucket: string, limit: number): Promise<SeedList> {
    return this.request("GET", `/api/seeds?bucket=${bucket}&limit=${limit}`);
  }
}

/** Trailing-edge debounce; the pending call is replaced by newer ones. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      fn(...args);
    }, delayMs);
  };
}
