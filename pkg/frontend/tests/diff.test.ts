import { describe, expect, it } from "vitest";

import { involvesSpace, renderDiff, renderReport, renderReportTable } from "../src/diff.js";
import type { EvalReport, LineDiff } from "../src/types.js";

function docReport(doc_id: string, chars: number, errors: number,
                   display: string) {
  const accuracy = chars > 0 ? (chars - errors) / chars : 1;
  return {
    doc_id, chars, errors, accuracy,
    accuracy_display: display,
    cer: chars > 0 ? errors / chars : 0,
    cer_display: "",
    word_count: 0, word_errors: 0, wer: 0, degenerate: false,
  };
}

// the published evaluation fixture: four documents and their displayed
// accuracies, micro-averaged total 84.02
const FIXTURE: EvalReport = {
  ...docReport("total", 3486, 557, "84.02"),
  documents: [
    docReport("دەستە گوڵی لاوانە", 667, 105, "84.26"),
    docReport("محاسەبەی نیابەت", 787, 152, "80.69"),
    docReport("ئاوات", 735, 157, "78.64"),
    docReport("ئاورێکی پاشەوە", 1297, 143, "88.97"),
  ],
};

describe("renderReportTable", () => {
  it("shows per-document displays and the micro-average total", () => {
    const table = renderReportTable(document, FIXTURE);
    const text = table.textContent ?? "";
    for (const expected of ["84.26", "80.69", "78.64", "88.97", "84.02"]) {
      expect(text).toContain(expected);
    }
    const totalRow = table.querySelector(".total-row");
    expect(totalRow?.textContent).toContain("84.02");
    expect(totalRow?.textContent).toContain("3486");
    expect(totalRow?.textContent).toContain("557");
  });

  it("renders one row per document plus the total", () => {
    const table = renderReportTable(document, FIXTURE);
    expect(table.querySelectorAll("tbody tr")).toHaveLength(5);
  });
});

describe("renderDiff", () => {
  const line: LineDiff = {
    doc_id: "line_007",
    ref: "وشە یەک",
    hyp: "وشەیەک",
    ops: [
      { kind: "match", ref: "و", hyp: "و" },
      { kind: "match", ref: "ش", hyp: "ش" },
      { kind: "match", ref: "ە", hyp: "ە" },
      { kind: "delete", ref: " ", hyp: null },
      { kind: "match", ref: "ی", hyp: "ی" },
      { kind: "match", ref: "ە", hyp: "ە" },
      { kind: "match", ref: "ک", hyp: "ک" },
    ],
  };

  it("flags space-involving ops", () => {
    expect(involvesSpace({ kind: "delete", ref: " ", hyp: null })).toBe(true);
    expect(involvesSpace({ kind: "insert", ref: null, hyp: " " })).toBe(true);
    expect(involvesSpace({ kind: "match", ref: "ا", hyp: "ا" })).toBe(false);
  });

  it("highlights a deleted space visibly", () => {
    const el = renderDiff(document, line);
    const spaceCells = el.querySelectorAll(".op-delete.space-op");
    expect(spaceCells.length).toBeGreaterThan(0);
    expect(spaceCells[0]!.textContent).toBe("␣");
  });

  it("renders right-to-left with aligned rows", () => {
    const el = renderDiff(document, line);
    expect(el.dir).toBe("rtl");
    const refCells = el.querySelectorAll(".diff-ref .cell");
    const hypCells = el.querySelectorAll(".diff-hyp .cell");
    expect(refCells).toHaveLength(line.ops.length);
    expect(hypCells).toHaveLength(line.ops.length);
  });

  it("marks matches, substitutions and insertions distinctly", () => {
    const mixed: LineDiff = {
      doc_id: "x",
      ref: "اب",
      hyp: "اج د",
      ops: [
        { kind: "match", ref: "ا", hyp: "ا" },
        { kind: "substitute", ref: "ب", hyp: "ج" },
        { kind: "insert", ref: null, hyp: " " },
        { kind: "insert", ref: null, hyp: "د" },
      ],
    };
    const el = renderDiff(document, mixed);
    expect(el.querySelectorAll(".op-match").length).toBeGreaterThan(0);
    expect(el.querySelectorAll(".op-substitute").length).toBeGreaterThan(0);
    expect(el.querySelectorAll(".op-insert.space-op").length).toBeGreaterThan(0);
  });
});

describe("renderReport", () => {
  it("renders all-green for a zero-error report", () => {
    const clean: EvalReport = {
      ...docReport("total", 100, 0, "100.00"),
      documents: [docReport("doc1", 100, 0, "100.00")],
      lines: [{
        doc_id: "doc1",
        ref: "اب",
        hyp: "اب",
        ops: [
          { kind: "match", ref: "ا", hyp: "ا" },
          { kind: "match", ref: "ب", hyp: "ب" },
        ],
      }],
    };
    const view = renderReport(document, clean);
    expect(view.querySelectorAll(".op-substitute, .op-insert, .op-delete"))
      .toHaveLength(0);
    expect(view.querySelectorAll(".op-match").length).toBe(4); // 2 ops x 2 rows
    expect(view.textContent).toContain("100.00");
  });
});
