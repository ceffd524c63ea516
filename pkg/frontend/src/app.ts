/** Annotator application: task loop, save/confirm flow, report review.
 *
 * All state is rebuilt from service responses; reloading the page loses
 * nothing but the unsaved editor text (and navigation warns when dirty).
 * Mutations never overlap: one PUT is in flight at a time, and confirm
 * is never optimistic.
 */

import { ApiClient, ApiError, ConflictError, ValidationError } from "./api.js";
import { LineEditor } from "./editor.js";
import { renderReport } from "./diff.js";
import type { AnnotationTask, LineIssue } from "./types.js";

export interface ViewState {
  currentTask: AnnotationTask | null;
  queueEmpty: boolean;
  dirty: boolean;
  busy: boolean;
  banner: string | null;
  bannerKind: "info" | "warning" | "error" | null;
  issues: LineIssue[];
  conflict: { serverText: string | null; serverUpdated: string } | null;
}

export class AnnotatorApp {
  state: ViewState = {
    currentTask: null,
    queueEmpty: false,
    dirty: false,
    busy: false,
    banner: null,
    bannerKind: null,
    issues: [],
    conflict: null,
  };

  readonly editor: LineEditor;
  readonly prefillToggle: HTMLInputElement;
  private doc: Document;
  private taskPane: HTMLElement;
  private imageEl: HTMLImageElement;
  private bannerEl: HTMLElement;
  private issuesEl: HTMLElement;
  private statusEl: HTMLElement;
  private conflictEl: HTMLElement;
  private reportPane: HTMLElement;
  private zoom = 1;

  constructor(private root: HTMLElement, private api: ApiClient) {
    this.doc = root.ownerDocument;
    const doc = this.doc;

    this.bannerEl = doc.createElement("div");
    this.bannerEl.className = "banner hidden";

    this.taskPane = doc.createElement("section");
    this.taskPane.className = "task-pane";

    const imageWrap = doc.createElement("div");
    imageWrap.className = "image-wrap";
    this.imageEl = doc.createElement("img");
    this.imageEl.className = "line-image";
    this.imageEl.alt = "line image";
    this.imageEl.addEventListener("click", () => this.zoomIn());
    imageWrap.appendChild(this.imageEl);

    this.statusEl = doc.createElement("div");
    this.statusEl.className = "task-status";

    this.issuesEl = doc.createElement("ul");
    this.issuesEl.className = "issue-list";

    this.conflictEl = doc.createElement("div");
    this.conflictEl.className = "conflict-prompt hidden";

    const editorWrap = doc.createElement("div");
    editorWrap.className = "editor-wrap";
    this.editor = new LineEditor(doc, {
      onDirtyChange: (dirty) => {
        this.state.dirty = dirty;
        this.renderStatus();
      },
      onFlattenWarning: () =>
        this.showBanner("pasted text was flattened to a single line", "warning"),
      onSaveDraft: () => void this.save(false),
      onConfirm: () => void this.save(true),
    });
    this.editor.mount(editorWrap);

    const controls = doc.createElement("div");
    controls.className = "controls";
    const draftBtn = doc.createElement("button");
    draftBtn.textContent = "Save draft (Enter)";
    draftBtn.className = "save-draft";
    draftBtn.addEventListener("click", () => void this.save(false));
    const confirmBtn = doc.createElement("button");
    confirmBtn.textContent = "Confirm + next (Ctrl+Enter)";
    confirmBtn.className = "confirm";
    confirmBtn.addEventListener("click", () => void this.save(true));
    const skipBtn = doc.createElement("button");
    skipBtn.textContent = "Skip";
    skipBtn.className = "skip";
    skipBtn.addEventListener("click", () => void this.loadNextTask());

    const prefillLabel = doc.createElement("label");
    this.prefillToggle = doc.createElement("input");
    this.prefillToggle.type = "checkbox";
    this.prefillToggle.className = "prefill-toggle";
    prefillLabel.appendChild(this.prefillToggle);
    prefillLabel.appendChild(doc.createTextNode(" prefill from OCR"));

    controls.append(draftBtn, confirmBtn, skipBtn, prefillLabel);

    this.taskPane.append(imageWrap, this.statusEl, editorWrap,
                         this.issuesEl, this.conflictEl, controls);

    this.reportPane = doc.createElement("section");
    this.reportPane.className = "report-pane";

    root.append(this.bannerEl, this.taskPane, this.reportPane);

    root.ownerDocument.defaultView?.addEventListener("beforeunload", (event) => {
      if (this.state.dirty) {
        event.preventDefault();
        (event as BeforeUnloadEvent).returnValue = "";
      }
    });
  }

  // ------------------------------------------------------------ banners

  showBanner(message: string, kind: "info" | "warning" | "error"): void {
    this.state.banner = message;
    this.state.bannerKind = kind;
    this.bannerEl.textContent = message;
    this.bannerEl.className = `banner banner-${kind}`;
  }

  clearBanner(): void {
    this.state.banner = null;
    this.state.bannerKind = null;
    this.bannerEl.className = "banner hidden";
    this.bannerEl.textContent = "";
  }

  // --------------------------------------------------------------- task

  async loadNextTask(): Promise<void> {
    if (this.state.dirty && this.state.currentTask) {
      const proceed = this.doc.defaultView?.confirm?.(
        "Discard unsaved changes?") ?? true;
      if (!proceed) return;
    }
    this.clearBanner();
    this.state.issues = [];
    this.state.conflict = null;
    try {
      const task = await this.api.nextTask(this.prefillToggle.checked);
      this.state.currentTask = task;
      this.state.queueEmpty = task === null;
      if (task === null) {
        this.renderEmptyQueue();
        return;
      }
      this.imageEl.src = task.image_url;
      this.zoom = 1;
      this.imageEl.style.transform = "scale(1)";
      this.editor.load(task.current_transcript);
      this.renderIssues();
      this.renderConflict();
      this.renderStatus();
      this.editor.focus();
    } catch (err) {
      this.state.currentTask = null;
      this.showBanner(
        `cannot reach the service (${(err as Error).message}) - retry`,
        "error");
    }
  }

  async save(confirm: boolean): Promise<void> {
    const task = this.state.currentTask;
    if (!task || this.state.busy) return;
    this.state.busy = true;
    try {
      await this.api.saveTranscript(
        task.task_id, this.editor.value, confirm, task.updated);
      this.editor.markSaved();
      this.state.issues = [];
      this.renderIssues();
      this.state.conflict = null;
      this.renderConflict();
      if (confirm) {
        this.state.currentTask = null; // consumed; advance
        await this.loadNextTask();
      } else {
        const fresh = await this.api.getTask(task.task_id);
        this.state.currentTask = fresh;
        this.showBanner("draft saved", "info");
        this.renderStatus();
      }
    } catch (err) {
      if (err instanceof ValidationError) {
        this.state.issues = err.issues;
        this.renderIssues();
        this.showBanner("transcript rejected; fix the issues below", "error");
      } else if (err instanceof ConflictError) {
        await this.handleConflict(task);
      } else {
        this.showBanner(`save failed: ${(err as Error).message}`, "error");
      }
    } finally {
      this.state.busy = false;
    }
  }

  private async handleConflict(task: AnnotationTask): Promise<void> {
    let serverText: string | null = null;
    let serverUpdated = task.updated;
    try {
      const fresh = await this.api.getTask(task.task_id);
      serverText = fresh.current_transcript;
      serverUpdated = fresh.updated;
    } catch {
      // keep nulls; the prompt still explains the situation
    }
    this.state.conflict = { serverText, serverUpdated };
    this.renderConflict();
    this.showBanner("someone else edited this line; resolve the conflict", "error");
  }

  /** Resolve a 409: keep the server text or overwrite it with ours. */
  async resolveConflict(useServer: boolean): Promise<void> {
    const task = this.state.currentTask;
    const conflict = this.state.conflict;
    if (!task || !conflict) return;
    if (useServer) {
      this.editor.load(conflict.serverText);
    }
    task.updated = conflict.serverUpdated;
    this.state.conflict = null;
    this.renderConflict();
    if (!useServer) {
      await this.save(false);
    }
  }

  // ------------------------------------------------------------- report

  async reviewReport(reportId: string): Promise<void> {
    this.reportPane.replaceChildren();
    try {
      const report = await this.api.report(reportId);
      this.reportPane.appendChild(renderReport(this.doc, report));
    } catch (err) {
      const missing = this.doc.createElement("div");
      missing.className = "report-missing";
      missing.textContent =
        err instanceof ApiError && err.status === 404
          ? `report ${reportId} not found`
          : `cannot load report: ${(err as Error).message}`;
      this.reportPane.appendChild(missing);
    }
  }

  // ------------------------------------------------------------ render

  private zoomIn(): void {
    this.zoom = this.zoom >= 3 ? 1 : this.zoom + 0.5;
    this.imageEl.style.transform = `scale(${this.zoom})`;
  }

  private renderEmptyQueue(): void {
    this.statusEl.textContent = "queue empty - every line is confirmed";
    this.statusEl.className = "task-status queue-empty";
    this.editor.load("");
    this.imageEl.removeAttribute("src");
  }

  private renderStatus(): void {
    const task = this.state.currentTask;
    if (!task) return;
    const dirtyMark = this.state.dirty ? " (unsaved)" : "";
    this.statusEl.className = "task-status";
    this.statusEl.textContent = `${task.task_id} - ${task.status}${dirtyMark}`;
  }

  private renderIssues(): void {
    this.issuesEl.replaceChildren();
    for (const issue of this.state.issues) {
      const item = this.doc.createElement("li");
      item.className = `issue issue-${issue.kind}`;
      const where = issue.position !== null ? ` @${issue.position}` : "";
      item.textContent = `${issue.kind}${where}: ${issue.detail}`;
      this.issuesEl.appendChild(item);
    }
  }

  private renderConflict(): void {
    const conflict = this.state.conflict;
    if (!conflict) {
      this.conflictEl.className = "conflict-prompt hidden";
      this.conflictEl.replaceChildren();
      return;
    }
    this.conflictEl.className = "conflict-prompt";
    this.conflictEl.replaceChildren();
    const doc = this.doc;
    const server = doc.createElement("div");
    server.className = "conflict-server";
    server.dir = "rtl";
    server.textContent = `server: ${conflict.serverText ?? "(empty)"}`;
    const local = doc.createElement("div");
    local.className = "conflict-local";
    local.dir = "rtl";
    local.textContent = `yours: ${this.editor.value}`;
    const useServer = doc.createElement("button");
    useServer.className = "use-server";
    useServer.textContent = "Take server version";
    useServer.addEventListener("click", () => void this.resolveConflict(true));
    const useLocal = doc.createElement("button");
    useLocal.className = "use-local";
    useLocal.textContent = "Overwrite with mine";
    useLocal.addEventListener("click", () => void this.resolveConflict(false));
    this.conflictEl.append(server, local, useServer, useLocal);
  }
}
