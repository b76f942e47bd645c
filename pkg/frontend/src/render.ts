/** Pure HTML renderers.
 *
 * Every view is a string-in, string-out function of server data, so the
 * whole surface is testable without a browser.  main.ts owns attaching
 * them to the document and wiring events via data-* attributes.
 */

import type { SessionView } from "./session.js";
import type { ChainLayout, SpecNodeDoc, TraceNode } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** The pending scenario as a card: one row per child factor, answer
 * buttons from the output scale. Buttons are disabled while a submission
 * is in flight (no double-submit) and the card only ever shows what the
 * server posed, so a determined point is never askable. */
export function renderQuestionCard(view: SessionView): string {
  if (view.done) {
    return `<div class="question-card done" data-testid="question-card">
  <p class="verdict">All scenarios settled. Finalize to freeze the table.</p>
  <button data-action="finalize" data-policy="min">Finalize</button>
</div>`;
  }
  if (!view.scenario || view.point === undefined) {
    return `<div class="question-card empty" data-testid="question-card">Loading…</div>`;
  }
  const rows = view.scenario
    .map(
      (row) => `    <tr>
      <td class="prompt">${escapeHtml(row.prompt)}</td>
      <td class="value value-${row.value}">${escapeHtml(row.label)}</td>
    </tr>`,
    )
    .join("\n");
  const disabled = view.busy ? " disabled" : "";
  const buttons = view.outScale
    .map(
      (label, index) =>
        `    <button data-action="answer" data-value="${index}"${disabled}>${escapeHtml(label)}</button>`,
    )
    .join("\n");
  const banner = view.banner
    ? `  <div class="banner" role="alert">${escapeHtml(view.banner)}</div>\n`
    : "";
  return `<div class="question-card" data-testid="question-card" data-seq="${view.seq ?? ""}">
${banner}  <h3>${escapeHtml(view.prompt ?? "Consider this scenario")}</h3>
  <table class="scenario">
${rows}
  </table>
  <div class="answers">
${buttons}
  </div>
</div>`;
}

/** asked / inferred / remaining; the inferred count is the point of the
 * whole exercise, so closure windfalls get a visible nudge. */
export function renderProgress(view: SessionView): string {
  const { asked, inferred, remaining } = view.counts;
  const jump =
    view.lastInferredJump > 0
      ? `  <span class="jump" data-testid="inferred-jump">+${view.lastInferredJump} inferred for free</span>\n`
      : "";
  return `<div class="progress" data-testid="progress">
  <span class="asked">asked ${asked}</span>
  <span class="inferred">inferred ${inferred}</span>
  <span class="remaining">remaining ${remaining}</span>
${jump}</div>`;
}

/** The conflicting prior answers, and the two ways out. */
export function renderConflictDialog(view: SessionView): string {
  if (!view.conflict) {
    return "";
  }
  const rows = view.conflict.conflicting
    .map(
      (answer) =>
        `    <li>answer #${answer.seq}: scenario (${answer.point.join(", ")}) → value ${answer.value}</li>`,
    )
    .join("\n");
  return `<div class="conflict-dialog" role="dialog" data-testid="conflict-dialog">
  <h3>That answer contradicts earlier ones</h3>
  <p>Scenario (${view.conflict.point.join(", ")}) cannot take value ${view.conflict.value} given:</p>
  <ul>
${rows}
  </ul>
  <button data-action="resolve" data-strategy="reject">Withdraw the new answer</button>
  <button data-action="resolve" data-strategy="revise">Revise the earlier answers</button>
</div>`;
}

export type NodeStatus = "unresolved" | "rule-bound" | "table-bound" | "session-in-progress";

export function nodeStatus(node: SpecNodeDoc, activeSessions: Set<string>): NodeStatus {
  if (activeSessions.has(node.id)) {
    return "session-in-progress";
  }
  if (!node.aggregation) {
    return "unresolved";
  }
  return node.aggregation.rule === "table" ? "table-bound" : "rule-bound";
}

/** The spec tree with a status badge per node; branches are clickable to
 * start or resume their elicitation session. */
export function renderHierarchy(root: SpecNodeDoc, activeSessions: Set<string>): string {
  const renderNode = (node: SpecNodeDoc): string => {
    const children = node.children ?? [];
    const status = children.length ? nodeStatus(node, activeSessions) : null;
    const badge = status ? ` <span class="badge ${status}">${status}</span>` : "";
    const clickable = children.length
      ? ` class="branch" data-action="open-node" data-node="${escapeHtml(node.id)}"`
      : ` class="leaf"`;
    const kids = children.length
      ? `\n  <ul>\n${children.map((child) => `  <li>${renderNode(child)}</li>`).join("\n")}\n  </ul>`
      : "";
    return `<span${clickable}>${escapeHtml(node.prompt)}</span>${badge}${kids}`;
  };
  return `<div class="hierarchy" data-testid="hierarchy">${renderNode(root)}</div>`;
}

/** One column of stacked bars per chain; filled = accepted. */
export function renderChainColumns(
  layout: ChainLayout,
  highlight: Set<string> = new Set(),
): string {
  const columns = layout.chains
    .map((chain, index) => {
      const bars = [...chain]
        .sort((a, b) => b.position - a.position)
        .map((element) => {
          const key = element.point.join(",");
          const classes = ["bar", element.value ? "filled" : "empty"];
          if (highlight.has(key)) {
            classes.push("diff");
          }
          return `      <div class="${classes.join(" ")}" data-point="${key}" title="(${key}) = ${element.value}"></div>`;
        })
        .join("\n");
      return `    <div class="chain" data-chain="${index}">\n${bars}\n    </div>`;
    })
    .join("\n");
  return `  <div class="chains" data-expert="${escapeHtml(layout.expert)}">\n${columns}\n  </div>`;
}

export function renderChainView(layout: ChainLayout): string {
  return `<div class="chain-view" data-testid="chain-view">
  <h3>${escapeHtml(layout.prompt)} — ${escapeHtml(layout.expert)} (${layout.chain_count} chains)</h3>
${renderChainColumns(layout)}
</div>`;
}

/** Two models over the same node, differing points highlighted in both. */
export function renderChainDiffView(
  left: ChainLayout,
  right: ChainLayout,
  diffPoints: number[][],
): string {
  const highlight = new Set(diffPoints.map((point) => point.join(",")));
  return `<div class="chain-view side-by-side" data-testid="chain-diff-view" data-diff-count="${diffPoints.length}">
  <h3>${escapeHtml(left.prompt)} — ${escapeHtml(left.expert)} vs ${escapeHtml(right.expert)}</h3>
${renderChainColumns(left, highlight)}
${renderChainColumns(right, highlight)}
</div>`;
}

/** Verdict plus the expandable explanation trace. */
export function renderEvaluation(label: string, trace: TraceNode): string {
  const renderTrace = (node: TraceNode): string => {
    const pruned = node.pruned
      .map(
        (p) =>
          `    <li class="pruned">${escapeHtml(p.prompt)} — skipped (settled by ${escapeHtml(p.gating_node)})</li>`,
      )
      .join("\n");
    const children = node.children.map((child) => `    <li>${renderTrace(child)}</li>`).join("\n");
    const body = children || pruned ? `\n  <ul>\n${children}${children && pruned ? "\n" : ""}${pruned}\n  </ul>` : "";
    const summary = `${escapeHtml(node.prompt)} → <strong>${escapeHtml(node.label)}</strong> <em class="rule">[${escapeHtml(node.rule)}]</em>`;
    return body
      ? `<details open><summary>${summary}</summary>${body}</details>`
      : summary;
  };
  return `<div class="evaluation" data-testid="evaluation">
  <p class="verdict">Verdict: <strong data-testid="verdict">${escapeHtml(label)}</strong></p>
  ${renderTrace(trace)}
</div>`;
}
