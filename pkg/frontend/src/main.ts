/** Single-page wiring: hash routes, event delegation, polling.
 *
 * Routes: #/specs (default), #/spec/<id>, #/session/<id>,
 * #/eval/<modelId>, #/chains/<modelId>/<node>, #/diff/<a>/<b>/<node>.
 * The session id lives only in the URL; reload resumes via GET next.
 */

import { ApiClient } from "./api.js";
import {
  renderChainDiffView,
  renderChainView,
  renderConflictDialog,
  renderEvaluation,
  renderHierarchy,
  renderProgress,
  renderQuestionCard,
} from "./render.js";
import { SessionRunner, SessionView } from "./session.js";
import type { SpecNodeDoc } from "./types.js";

const api = new ApiClient("");
const app = document.getElementById("app") as HTMLElement;

let runner: SessionRunner | null = null;
let currentSpecId: string | null = null;

function renderSession(view: SessionView): void {
  app.innerHTML = `
    ${renderProgress(view)}
    ${view.conflict ? renderConflictDialog(view) : renderQuestionCard(view)}
    <p><a href="#/specs">back to documents</a></p>
  `;
}

async function showSession(sessionId: string): Promise<void> {
  runner = new SessionRunner(api, sessionId, renderSession);
  await runner.load();
}

async function showSpecs(): Promise<void> {
  const specs = await api.listSpecs();
  const models = await api.listModels();
  const specRows = specs
    .map(
      (spec) =>
        `<li><a href="#/spec/${spec.id}">${spec.title}</a> (${spec.nodes} nodes)</li>`,
    )
    .join("");
  const modelRows = models
    .map(
      (model) =>
        `<li>${model.title} — ${model.expert} <a href="#/eval/${model.id}">evaluate</a></li>`,
    )
    .join("");
  app.innerHTML = `
    <h2>Documents</h2>
    <ul>${specRows || "<li>none uploaded yet</li>"}</ul>
    <h2>Models</h2>
    <ul>${modelRows || "<li>none yet</li>"}</ul>
  `;
}

async function showSpec(specId: string): Promise<void> {
  currentSpecId = specId;
  const document_ = (await api.getSpec(specId)) as { root?: SpecNodeDoc };
  if (!document_.root) {
    app.innerHTML = `<p>This document is in the plain form; upload the extended form to browse statuses.</p>`;
    return;
  }
  app.innerHTML = `
    <h2>Pick a branch to elicit</h2>
    ${renderHierarchy(document_.root, new Set())}
    <p><a href="#/specs">back</a></p>
  `;
}

async function openNode(nodeId: string): Promise<void> {
  if (!currentSpecId) {
    return;
  }
  const expert = window.localStorage.getItem("emmkit-expert") ?? "browser-expert";
  const created = await api.createSession({
    spec_id: currentSpecId,
    node_id: nodeId,
    expert,
    strategy: "hansel",
  });
  window.location.hash = `#/session/${created.session_id}`;
}

async function showEval(modelId: string): Promise<void> {
  app.innerHTML = `
    <h2>Evaluate</h2>
    <form data-form="evaluate">
      <textarea name="answers" rows="6" cols="60" placeholder='{"leaf-id": "yes", ...}'></textarea>
      <label>policy
        <select name="policy"><option>full</option><option>strict-gate</option></select>
      </label>
      <label>depth <input name="depth" type="number" min="0" placeholder="full"></label>
      <button type="submit">Evaluate</button>
    </form>
    <div id="eval-result"></div>
  `;
  const form = app.querySelector("form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const depthRaw = String(data.get("depth") ?? "");
    const response = await api.evaluate({
      model_id: modelId,
      answers: JSON.parse(String(data.get("answers") || "{}")),
      policy: String(data.get("policy") || "full"),
      explain_depth: depthRaw === "" ? undefined : Number(depthRaw),
    });
    const result = document.getElementById("eval-result") as HTMLElement;
    result.innerHTML = renderEvaluation(response.label, response.trace.root);
  });
}

async function showChains(modelId: string, nodeId: string): Promise<void> {
  const layout = await api.chains(modelId, nodeId);
  app.innerHTML = renderChainView(layout);
}

async function showDiff(modelA: string, modelB: string, nodeId: string): Promise<void> {
  const [left, right, diff] = await Promise.all([
    api.chains(modelA, nodeId),
    api.chains(modelB, nodeId),
    api.diff(modelA, modelB, nodeId),
  ]);
  app.innerHTML = renderChainDiffView(left, right, diff.points);
}

async function route(): Promise<void> {
  const segments = window.location.hash.replace(/^#\//, "").split("/").filter(Boolean);
  try {
    if (segments[0] === "session" && segments[1]) {
      await showSession(segments[1]);
    } else if (segments[0] === "spec" && segments[1]) {
      await showSpec(segments[1]);
    } else if (segments[0] === "eval" && segments[1]) {
      await showEval(segments[1]);
    } else if (segments[0] === "chains" && segments[2]) {
      await showChains(segments[1], segments[2]);
    } else if (segments[0] === "diff" && segments[3]) {
      await showDiff(segments[1], segments[2], segments[3]);
    } else {
      await showSpecs();
    }
  } catch (error) {
    app.innerHTML = `<p class="error">${(error as Error).message}</p>`;
  }
}

app.addEventListener("click", async (event) => {
  const target = (event.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
  if (!target) {
    return;
  }
  const action = target.dataset.action;
  if (action === "answer" && runner) {
    renderSession({ ...runner.current, busy: true });
    await runner.answer(Number(target.dataset.value));
  } else if (action === "resolve" && runner) {
    await runner.resolve(target.dataset.strategy as "reject" | "revise");
  } else if (action === "finalize" && runner) {
    const result = await api.finalize(runner.current.sessionId, "min");
    app.innerHTML = `
      <p>Table frozen: [${result.values.join(", ")}] on (${result.out_scale.join(", ")})</p>
      ${result.model_id ? `<p>Registered model <a href="#/eval/${result.model_id}">${result.model_id}</a></p>` : ""}
      <p><a href="#/specs">back to documents</a></p>
    `;
  } else if (action === "open-node" && target.dataset.node) {
    await openNode(target.dataset.node);
  }
});

window.addEventListener("hashchange", route);
void route();
