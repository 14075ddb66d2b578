/** Wire types of the v1 API. Non-finite floats arrive as string sentinels. */

export type WireNumber = number | "Infinity" | "-Infinity" | "NaN";

export interface MetricStat {
  mean: number;
  std: number;
}

export interface FrontierConstraint {
  kind: string;
  delta: number;
}

export interface FrontierPoint {
  point_id: string;
  epsilon: WireNumber;
  constraint: FrontierConstraint | null;
  model_kind: string;
  intervention: string;
  status: "ok" | "failed";
  achieved: Record<string, MetricStat>;
  certified_budget: { epsilon: WireNumber; delta: WireNumber };
  diagnostics: Record<string, unknown>;
}

export interface FrontierDoc {
  version: string;
  protected: string[];
  dataset_digest: string;
  points: FrontierPoint[];
}

export interface FrontierResponse {
  id: string;
  frontier: FrontierDoc;
}

export interface Lexicon {
  version: string;
  fairness_intents: Record<string, string>;
  fairness_descriptors: Record<string, number>;
  privacy_descriptors: Record<string, [number, number]>;
}

export interface PolicyTupleDoc {
  criterion: string;
  delta: number;
  epsilon_band: WireNumber[];
  attributes: string[];
  metric: { name: string; minimum: number };
  pi: { kind: string; order: string[] | null };
}

export interface CandidateSet {
  ids: string[];
  explanations: Record<string, string>;
  diagnostics: Record<string, unknown>;
}

export interface PolicyResponse {
  frontier_digest: string;
  tuple: PolicyTupleDoc;
  provenance: Record<string, "given" | "defaulted">;
  explanation: string;
  candidates: CandidateSet;
}

export interface ContractDoc {
  format: string;
  tuple: PolicyTupleDoc;
  frontier_digest: string;
  feasible_ids: string[];
  chosen_id: string | null;
  rationale: string;
  lexicon_version: string;
  created_at: string;
}

export interface SelectionResponse {
  contract_id: string;
  contract: ContractDoc;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
  span?: string;
}

/** Decode a wire float; the server never sends NaN in practice. */
export function asNumber(v: WireNumber): number {
  return typeof v === "number" ? v : Number(v);
}
