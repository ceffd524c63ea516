/** Rendering of evaluation reports: accuracy tables and aligned diffs. */

import { SPACE_MARKER } from "./editor.js";
import type { EditOp, EvalReport, LineDiff } from "./types.js";

export function involvesSpace(op: EditOp): boolean {
  return op.ref === " " || op.hyp === " ";
}

const GAP = "·";

function cellText(ch: string | null): string {
  if (ch === null) return GAP;
  if (ch === " ") return SPACE_MARKER;
  return ch;
}

/** Two aligned RTL rows of per-op cells, insert/delete/substitute colored
 * and space-involving ops additionally highlighted. */
export function renderDiff(doc: Document, line: LineDiff): HTMLElement {
  const container = doc.createElement("div");
  container.className = "line-diff";
  container.dir = "rtl";

  const refRow = doc.createElement("div");
  refRow.className = "diff-row diff-ref";
  const hypRow = doc.createElement("div");
  hypRow.className = "diff-row diff-hyp";
  for (const op of line.ops) {
    const refCell = doc.createElement("span");
    const hypCell = doc.createElement("span");
    refCell.className = `cell op-${op.kind}`;
    hypCell.className = `cell op-${op.kind}`;
    if (involvesSpace(op)) {
      refCell.classList.add("space-op");
      hypCell.classList.add("space-op");
    }
    refCell.textContent = cellText(op.ref);
    hypCell.textContent = cellText(op.hyp);
    refRow.appendChild(refCell);
    hypRow.appendChild(hypCell);
  }

  const label = doc.createElement("div");
  label.className = "diff-doc-id";
  label.textContent = line.doc_id;
  container.appendChild(label);
  container.appendChild(refRow);
  container.appendChild(hypRow);
  return container;
}

function rowOf(doc: Document, cells: string[], accuracy: string): HTMLTableRowElement {
  const tr = doc.createElement("tr");
  for (const text of cells) {
    const td = doc.createElement("td");
    td.textContent = text;
    tr.appendChild(td);
  }
  const acc = doc.createElement("td");
  acc.className = "accuracy";
  acc.textContent = `${accuracy}%`;
  tr.appendChild(acc);
  return tr;
}

/** Per-document accuracy table with the micro-average total row. */
export function renderReportTable(doc: Document, report: EvalReport): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "report-table";
  const thead = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  for (const title of ["Document", "Chars", "Errors", "Accuracy"]) {
    const th = doc.createElement("th");
    th.textContent = title;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const body = doc.createElement("tbody");
  for (const row of report.documents ?? []) {
    body.appendChild(rowOf(doc, [row.doc_id, String(row.chars), String(row.errors)],
                           row.accuracy_display));
  }
  const total = rowOf(doc, ["Total", String(report.chars), String(report.errors)],
                      report.accuracy_display);
  total.className = "total-row";
  body.appendChild(total);
  table.appendChild(body);
  return table;
}

/** Full report view: table plus per-line diffs when present. */
export function renderReport(doc: Document, report: EvalReport): HTMLElement {
  const container = doc.createElement("section");
  container.className = "report-view";
  container.appendChild(renderReportTable(doc, report));
  const diffs = doc.createElement("div");
  diffs.className = "report-diffs";
  for (const line of report.lines ?? []) {
    diffs.appendChild(renderDiff(doc, line));
  }
  container.appendChild(diffs);
  return container;
}
