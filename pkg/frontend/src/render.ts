/** Pure view-model builders. Every number and sentence comes verbatim from
 * server responses; these functions only arrange, never compute or reword. */

import {
  asNumber,
  type CandidateSet,
  type ContractDoc,
  type FrontierPoint,
  type FrontierResponse,
  type PolicyResponse,
} from "./types.js";

export interface Mark {
  pointId: string;
  /** x axis: achieved disparity for the point's own constraint kind. */
  disparity: number;
  disparityStd: number;
  /** y axis: mean accuracy with seed std as the error bar. */
  accuracy: number;
  accuracyStd: number;
  epsilon: number;
  modelKind: string;
  highlighted: boolean;
}

export interface FrontierView {
  marks: Mark[];
  /** Axis labels taken from the report schema, not re-derived. */
  xLabel: string;
  yLabel: string;
  empty: boolean;
}

const DISPARITY_FOR: Record<string, string> = {
  DemographicParity: "dpd",
  EqualizedOdds: "eo",
  EqualOpportunity: "eopp",
};

function disparityMetric(p: FrontierPoint): string {
  return p.constraint ? DISPARITY_FOR[p.constraint.kind] ?? "dpd" : "dpd";
}

export function renderFrontier(
  res: FrontierResponse,
  highlight: ReadonlySet<string>,
): FrontierView {
  const marks = res.frontier.points
    .filter((p) => p.status === "ok")
    .map((p) => {
      const d = p.achieved[disparityMetric(p)];
      const a = p.achieved["accuracy"];
      return {
        pointId: p.point_id,
        disparity: d.mean,
        disparityStd: d.std,
        accuracy: a.mean,
        accuracyStd: a.std,
        epsilon: asNumber(p.epsilon),
        modelKind: p.model_kind,
        highlighted: highlight.has(p.point_id),
      };
    });
  return {
    marks,
    xLabel: "disparity",
    yLabel: "accuracy",
    empty: marks.length === 0,
  };
}

export interface CandidateCard {
  pointId: string;
  /** Server-rendered explanation, shown verbatim. */
  text: string;
}

export interface CandidatePanel {
  cards: CandidateCard[];
  /** Present only when the candidate set is empty. */
  diagnostics: Record<string, unknown> | null;
}

export function renderCandidates(cands: CandidateSet): CandidatePanel {
  const cards = cands.ids.map((id) => ({
    pointId: id,
    text: cands.explanations[id],
  }));
  return {
    cards,
    diagnostics: cards.length === 0 ? cands.diagnostics : null,
  };
}

export interface ProvenanceBadge {
  field: string;
  source: "given" | "defaulted";
}

export interface PolicyView {
  explanation: string;
  badges: ProvenanceBadge[];
  panel: CandidatePanel;
  frontierDigest: string;
}

export function renderPolicy(res: PolicyResponse): PolicyView {
  return {
    explanation: res.explanation,
    badges: Object.entries(res.provenance).map(([field, source]) => ({
      field,
      source,
    })),
    panel: renderCandidates(res.candidates),
    frontierDigest: res.frontier_digest,
  };
}

export interface ContractView {
  contractId: string;
  chosenId: string | null;
  feasibleIds: string[];
  rationale: string;
  frontierDigest: string;
  createdAt: string;
}

export function renderContract(
  contractId: string,
  doc: ContractDoc,
): ContractView {
  return {
    contractId,
    chosenId: doc.chosen_id,
    feasibleIds: doc.feasible_ids,
    rationale: doc.rationale,
    frontierDigest: doc.frontier_digest,
    createdAt: doc.created_at,
  };
}

export interface StalenessState {
  stale: true;
  message: string;
  /** The UI must refetch candidates before allowing another confirm. */
  refreshRequired: true;
}

export function renderStaleness(detail: string): StalenessState {
  return {
    stale: true,
    message: detail,
    refreshRequired: true,
  };
}
