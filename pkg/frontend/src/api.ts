/** Thin typed client for the engine's HTTP API. */

import type {
  ChainLayout,
  ErrorEnvelope,
  EvaluateResponse,
  NextPayload,
  SpecSummary,
} from "./types.js";

/** Thrown for any non-2xx response; carries the server's envelope. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly envelope: ErrorEnvelope,
  ) {
    super(envelope.message);
  }

  get category(): string {
    return this.envelope.category;
  }

  get reason(): string | undefined {
    return this.envelope.details?.reason;
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload as ErrorEnvelope);
    }
    return payload as T;
  }

  uploadSpec(document: unknown): Promise<SpecSummary> {
    return this.request("POST", "/api/specs", { document });
  }

  listSpecs(): Promise<SpecSummary[]> {
    return this.request("GET", "/api/specs");
  }

  getSpec(specId: string): Promise<Record<string, unknown>> {
    return this.request("GET", `/api/specs/${specId}`);
  }

  uploadModel(document: unknown): Promise<{ id: string; expert: string; nodes: number }> {
    return this.request("POST", "/api/models", { document });
  }

  listModels(): Promise<{ id: string; expert: string; title: string }[]> {
    return this.request("GET", "/api/models");
  }

  createSession(body: {
    spec_id: string;
    node_id: string;
    expert: string;
    strategy?: string;
  }): Promise<NextPayload> {
    return this.request("POST", "/api/sessions", body);
  }

  next(sessionId: string): Promise<NextPayload> {
    return this.request("GET", `/api/sessions/${sessionId}/next`);
  }

  answer(sessionId: string, value: number | string, seq?: number): Promise<NextPayload> {
    return this.request("POST", `/api/sessions/${sessionId}/answer`, { value, seq });
  }

  resolve(sessionId: string, strategy: "reject" | "revise"): Promise<NextPayload> {
    return this.request("POST", `/api/sessions/${sessionId}/resolve`, { strategy });
  }

  finalize(
    sessionId: string,
    policy: "min" | "max" | "require-complete",
  ): Promise<{ model_id: string | null; values: number[]; out_scale: string[] }> {
    return this.request("POST", `/api/sessions/${sessionId}/finalize`, { policy });
  }

  evaluate(body: {
    model_id: string;
    answers: Record<string, number | string>;
    policy?: string;
    explain_depth?: number;
  }): Promise<EvaluateResponse> {
    return this.request("POST", "/api/evaluate", body);
  }

  chains(modelId: string, nodeId: string): Promise<ChainLayout> {
    return this.request("GET", `/api/models/${modelId}/chains/${nodeId}`);
  }

  diff(modelA: string, modelB: string, nodeId: string): Promise<{ node: string; points: number[][] }> {
    return this.request("GET", `/api/models/${modelA}/diff/${modelB}/${nodeId}`);
  }
}
