/** Wire types for the engine's HTTP API. The UI never computes closure
 * or aggregation itself; everything rendered comes from these shapes. */

export interface SpecSummary {
  id: string;
  title: string;
  nodes: number;
}

export interface ScenarioRow {
  node: string;
  prompt: string;
  value: number;
  label: string;
}

export interface Counts {
  asked: number;
  inferred: number;
  remaining: number;
}

/** GET /api/sessions/{id}/next and the body of a successful answer. */
export interface NextPayload {
  done: boolean;
  session_id: string;
  status: string;
  counts: Counts;
  seq?: number;
  point?: number[];
  prompt?: string;
  scenario?: ScenarioRow[];
  out_scale?: string[];
  applied?: boolean;
  inferred_jump?: number;
}

export interface ConflictingAnswer {
  seq: number;
  point: number[];
  value: number;
}

/** Uniform error envelope; mirrors the CLI's error categories. */
export interface ErrorEnvelope {
  category: string;
  message: string;
  details: {
    reason?: string;
    expected_seq?: number;
    point?: number[];
    value?: number;
    conflicting?: ConflictingAnswer[];
    [key: string]: unknown;
  };
}

export interface TraceNode {
  node: string;
  prompt: string;
  value: number;
  label: string;
  rule: string;
  children: TraceNode[];
  pruned: {
    node: string;
    prompt: string;
    gating_node: string;
    gating_value: number;
    assumed_value: number | null;
  }[];
}

export interface EvaluateResponse {
  value: number;
  label: string;
  trace: { policy: string; root: TraceNode };
}

export interface ChainElement {
  point: number[];
  value: number;
  chain: number;
  position: number;
}

export interface ChainLayout {
  format_version: number;
  kind: string;
  node: string;
  prompt: string;
  n: number;
  expert: string;
  chain_count: number;
  chains: ChainElement[][];
}

export interface SpecNodeDoc {
  id: string;
  prompt: string;
  scale?: string[];
  aggregation?: { rule: string } | null;
  children?: SpecNodeDoc[];
  [key: string]: unknown;
}
