/** Shapes of the service's JSON responses. */

export interface AnnotationTask {
  task_id: string;
  image_url: string;
  current_transcript: string | null;
  status: "unlabeled" | "draft" | "confirmed";
  updated: string;
  prefilled?: boolean;
}

export interface LineIssue {
  kind: string;
  position: number | null;
  detail: string;
}

export type OpKind = "match" | "substitute" | "insert" | "delete";

export interface EditOp {
  kind: OpKind;
  ref: string | null;
  hyp: string | null;
}

export interface DocReport {
  doc_id: string;
  chars: number;
  errors: number;
  accuracy: number;
  accuracy_display: string;
  cer: number;
  cer_display: string;
  word_count: number;
  word_errors: number;
  wer: number;
  degenerate: boolean;
}

export interface LineDiff {
  doc_id: string;
  ref: string;
  hyp: string;
  ops: EditOp[];
}

export interface EvalReport extends DocReport {
  id?: string;
  documents?: DocReport[];
  lines?: LineDiff[];
  parameters?: Record<string, unknown>;
}
