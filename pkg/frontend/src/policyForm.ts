/** Dropdown-first policy form. Options are bound 1:1 to the server-served
 * lexicon; the form emits either a controlled-vocabulary prompt or, with
 * free text, the text itself. Bodies are serialized with a fixed key order
 * so identical form states produce byte-identical requests. */

import type { Lexicon } from "./types.js";

export interface FormOptions {
  intents: string[];
  fairnessDescriptors: string[];
  privacyDescriptors: string[];
  priorities: string[];
}

export const PRIORITIES = [
  "constraint first",
  "lexicographic(privacy, fairness, performance)",
];

export function optionsFromLexicon(lex: Lexicon): FormOptions {
  return {
    intents: Object.keys(lex.fairness_intents),
    fairnessDescriptors: Object.keys(lex.fairness_descriptors),
    privacyDescriptors: Object.keys(lex.privacy_descriptors),
    priorities: PRIORITIES,
  };
}

export interface PolicyFormState {
  intent: string;
  fairnessDescriptor?: string;
  privacyDescriptor?: string;
  /** Performance floor in percent, e.g. 80 -> "at least 80% accuracy". */
  performancePercent?: number;
  performanceMetric?: string;
  priority?: string;
  /** Optional free text appended verbatim, still parsed server-side. */
  freeText?: string;
}

export function buildPrompt(state: PolicyFormState): string {
  const clauses = [state.intent];
  if (state.fairnessDescriptor) {
    clauses.push(state.fairnessDescriptor);
  }
  if (state.privacyDescriptor) {
    clauses.push(`${state.privacyDescriptor} privacy`);
  }
  if (state.performancePercent !== undefined) {
    const metric = state.performanceMetric ?? "accuracy";
    clauses.push(`at least ${state.performancePercent}% ${metric}`);
  }
  if (state.priority) {
    clauses.push(state.priority);
  }
  if (state.freeText) {
    clauses.push(state.freeText);
  }
  return clauses.join(", ");
}

/** Request body for POST /v1/frontiers/{id}/policy. */
export function buildPolicyBody(state: PolicyFormState): string {
  return JSON.stringify({ prompt: buildPrompt(state) });
}

/** Request body for POST /v1/frontiers/{id}/selection. The tuple document
 * is passed through exactly as the policy response delivered it. */
export function buildSelectionBody(
  tuple: unknown,
  frontierDigest: string,
  chosenId: string,
  rationale: string,
): string {
  return JSON.stringify({
    tuple,
    frontier_digest: frontierDigest,
    chosen_id: chosenId,
    rationale,
  });
}
