/** Single-page glue: fetch lexicon + frontier, drive the policy form,
 * render candidates and the sealed contract. All view content comes from
 * the pure builders in render.ts; this file only touches the DOM. */

import { ApiClient, ApiError } from "./api.js";
import {
  buildPolicyBody,
  buildSelectionBody,
  optionsFromLexicon,
  type PolicyFormState,
} from "./policyForm.js";
import {
  renderContract,
  renderFrontier,
  renderPolicy,
  renderStaleness,
  type CandidatePanel,
  type FrontierView,
} from "./render.js";
import type { FrontierResponse, PolicyResponse } from "./types.js";

function el(tag: string, cls: string, text = ""): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (text) {
    node.textContent = text;
  }
  return node;
}

function drawFrontier(root: HTMLElement, view: FrontierView): void {
  root.replaceChildren();
  if (view.empty) {
    root.appendChild(el("div", "empty-state", "No frontier points to show."));
    return;
  }
  const chart = el("div", "chart");
  chart.dataset.xlabel = view.xLabel;
  chart.dataset.ylabel = view.yLabel;
  for (const m of view.marks) {
    const mark = el("div", m.highlighted ? "mark candidate" : "mark");
    mark.dataset.pointId = m.pointId;
    mark.title = m.pointId;
    mark.style.left = `${(m.disparity * 100).toFixed(2)}%`;
    mark.style.bottom = `${(m.accuracy * 100).toFixed(2)}%`;
    chart.appendChild(mark);
  }
  root.appendChild(chart);
}

function drawCandidates(root: HTMLElement, panel: CandidatePanel): void {
  root.replaceChildren();
  if (panel.diagnostics) {
    const diag = el("pre", "diagnostics",
      JSON.stringify(panel.diagnostics, null, 2));
    root.appendChild(diag);
    return;
  }
  for (const card of panel.cards) {
    const node = el("div", "card");
    node.dataset.pointId = card.pointId;
    node.appendChild(el("p", "card-text", card.text));
    root.appendChild(node);
  }
}

export async function mount(
  root: HTMLElement,
  api: ApiClient,
  frontierId: string,
): Promise<void> {
  const [lexicon, frontier] = await Promise.all([
    api.getLexicon(),
    api.getFrontier(frontierId),
  ]);
  const options = optionsFromLexicon(lexicon);

  const chartRoot = el("section", "frontier");
  const formRoot = el("section", "policy-form");
  const cardsRoot = el("section", "candidates");
  const contractRoot = el("section", "contract");
  root.replaceChildren(chartRoot, formRoot, cardsRoot, contractRoot);

  const selects: Record<string, HTMLSelectElement> = {};
  const fields: [string, string[], boolean][] = [
    ["intent", options.intents, false],
    ["fairness", options.fairnessDescriptors, true],
    ["privacy", options.privacyDescriptors, true],
    ["priority", options.priorities, true],
  ];
  for (const [name, opts, optional] of fields) {
    const select = document.createElement("select");
    select.name = name;
    for (const opt of optional ? ["", ...opts] : opts) {
      const o = document.createElement("option");
      o.value = opt;
      o.textContent = opt || "(default)";
      select.appendChild(o);
    }
    selects[name] = select;
    formRoot.appendChild(select);
  }
  const perf = document.createElement("input");
  perf.type = "number";
  perf.name = "performance";
  formRoot.appendChild(perf);
  const submit = el("button", "submit", "Translate") as HTMLButtonElement;
  formRoot.appendChild(submit);

  let current: { res: PolicyResponse; view: FrontierResponse } | null = null;

  const refresh = async (): Promise<void> => {
    const state: PolicyFormState = {
      intent: selects["intent"].value,
      fairnessDescriptor: selects["fairness"].value || undefined,
      privacyDescriptor: selects["privacy"].value || undefined,
      performancePercent: perf.value ? Number(perf.value) : undefined,
      priority: selects["priority"].value || undefined,
    };
    try {
      const res = await api.postPolicy(frontierId, buildPolicyBody(state));
      current = { res, view: frontier };
      const policyView = renderPolicy(res);
      drawFrontier(chartRoot,
        renderFrontier(frontier, new Set(res.candidates.ids)));
      drawCandidates(cardsRoot, policyView.panel);
      for (const card of cardsRoot.querySelectorAll<HTMLElement>(".card")) {
        card.onclick = () => confirm(card.dataset.pointId ?? "");
      }
    } catch (err) {
      if (err instanceof ApiError) {
        cardsRoot.replaceChildren(
          el("div", "error", err.body.span ?? err.body.detail));
        return;
      }
      throw err;
    }
  };

  const confirm = async (pointId: string): Promise<void> => {
    if (!current) {
      return;
    }
    try {
      const sel = await api.postSelection(frontierId, buildSelectionBody(
        current.res.tuple, current.res.frontier_digest, pointId,
        "confirmed in the frontier explorer"));
      const view = renderContract(sel.contract_id, sel.contract);
      contractRoot.replaceChildren(
        el("div", "contract-id", view.contractId),
        el("div", "contract-chosen", view.chosenId ?? ""),
        el("div", "contract-rationale", view.rationale));
    } catch (err) {
      if (err instanceof ApiError && err.isStale) {
        const state = renderStaleness(err.body.detail);
        contractRoot.replaceChildren(el("div", "stale", state.message));
        await refresh();
        return;
      }
      throw err;
    }
  };

  submit.onclick = () => void refresh();
  drawFrontier(chartRoot, renderFrontier(frontier, new Set()));
}

declare global {
  interface Window {
    fairplaiMount?: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.fairplaiMount = mount;
}
