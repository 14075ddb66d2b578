/** Thin v1 API client. All requests go through an injectable fetch so tests
 * can mock the server; the client adds no semantics beyond transport. */

import type {
  ApiErrorBody,
  FrontierResponse,
  Lexicon,
  PolicyResponse,
  SelectionResponse,
} from "./types.js";

export const MEDIA_TYPE = "application/vnd.fairplai.v1+json";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(`${body.error}: ${body.detail}`);
    this.status = status;
    this.body = body;
  }

  get isStale(): boolean {
    return this.status === 409 && this.body.error === "StaleFrontier";
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;
  /** In-flight GETs keyed by URL so repeated renders reuse one request. */
  private readonly inflight = new Map<string, Promise<unknown>>();

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      ...init,
      headers: {
        accept: MEDIA_TYPE,
        ...(init?.body ? { "content-type": "application/json" } : {}),
        ...init?.headers,
      },
    });
    const body = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, body as ApiErrorBody);
    }
    return body as T;
  }

  private getDeduped<T>(path: string): Promise<T> {
    const existing = this.inflight.get(path);
    if (existing) {
      return existing as Promise<T>;
    }
    const p = this.request<T>(path).finally(() => this.inflight.delete(path));
    this.inflight.set(path, p);
    return p;
  }

  getLexicon(): Promise<Lexicon> {
    return this.getDeduped("/v1/lexicon");
  }

  getFrontier(id: string): Promise<FrontierResponse> {
    return this.getDeduped(`/v1/frontiers/${id}`);
  }

  /** Submit a prepared policy body verbatim (byte-identical passthrough). */
  postPolicy(frontierId: string, body: string): Promise<PolicyResponse> {
    return this.request(`/v1/frontiers/${frontierId}/policy`, {
      method: "POST",
      body,
    });
  }

  postSelection(
    frontierId: string,
    body: string,
  ): Promise<SelectionResponse> {
    return this.request(`/v1/frontiers/${frontierId}/selection`, {
      method: "POST",
      body,
    });
  }
}
