/** Single-line RTL transcript editor.
 *
 * The editor can never hold a line break: pasted multi-line content is
 * flattened to single spaces and the caller is told so it can warn.
 * Every space is mirrored below the input as a visible marker, because
 * misplaced spaces are the dominant error class in this material.
 */

export interface FlattenResult {
  text: string;
  changed: boolean;
}

/** Collapse line breaks and tabs from pasted content into single spaces. */
export function flattenToSingleLine(raw: string): FlattenResult {
  const text = raw.replace(/[\r\n\t\f\v]+/g, " ").replace(/ {2,}/g, " ");
  return { text, changed: text !== raw };
}

export const SPACE_MARKER = "␣"; // ␣

/** Fragment mirroring the text with every space visible. */
export function spaceMarkedFragment(doc: Document, text: string): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  for (const ch of text) {
    const span = doc.createElement("span");
    if (ch === " ") {
      span.className = "space-marker";
      span.textContent = SPACE_MARKER;
    } else {
      span.className = "char";
      span.textContent = ch;
    }
    fragment.appendChild(span);
  }
  return fragment;
}

export interface EditorCallbacks {
  onDirtyChange?: (dirty: boolean) => void;
  onFlattenWarning?: () => void;
  onSaveDraft?: () => void;
  onConfirm?: () => void;
}

export class LineEditor {
  readonly input: HTMLInputElement;
  private mirror: HTMLElement;
  private lastSaved = "";
  private callbacks: EditorCallbacks;

  constructor(doc: Document, callbacks: EditorCallbacks = {}) {
    this.callbacks = callbacks;
    this.input = doc.createElement("input");
    this.input.type = "text";
    this.input.dir = "rtl";
    this.input.className = "transcript-editor";
    this.input.setAttribute("autocomplete", "off");
    this.input.setAttribute("spellcheck", "false");
    this.mirror = doc.createElement("div");
    this.mirror.className = "transcript-mirror";
    this.mirror.dir = "rtl";

    this.input.addEventListener("paste", (event) => {
      const clip = (event as ClipboardEvent).clipboardData;
      if (!clip) return;
      event.preventDefault();
      const { text, changed } = flattenToSingleLine(clip.getData("text"));
      this.insertAtCursor(text);
      if (changed) this.callbacks.onFlattenWarning?.();
    });
    this.input.addEventListener("input", () => {
      // belt and braces: some input paths bypass the paste handler
      const { text, changed } = flattenToSingleLine(this.input.value);
      if (changed) {
        this.input.value = text;
        this.callbacks.onFlattenWarning?.();
      }
      this.refresh();
    });
    this.input.addEventListener("keydown", (event) => {
      const key = event as KeyboardEvent;
      if (key.key === "Enter") {
        key.preventDefault();
        if (key.ctrlKey || key.metaKey) this.callbacks.onConfirm?.();
        else this.callbacks.onSaveDraft?.();
      } else if ((key.ctrlKey || key.metaKey) && key.key.toLowerCase() === "s") {
        key.preventDefault();
        this.callbacks.onSaveDraft?.();
      }
    });
  }

  mount(parent: HTMLElement): void {
    parent.appendChild(this.input);
    parent.appendChild(this.mirror);
  }

  private insertAtCursor(text: string): void {
    const start = this.input.selectionStart ?? this.input.value.length;
    const end = this.input.selectionEnd ?? start;
    const value = this.input.value;
    this.input.value = value.slice(0, start) + text + value.slice(end);
    const cursor = start + text.length;
    this.input.setSelectionRange(cursor, cursor);
    this.input.dispatchEvent(new Event("input"));
  }

  get value(): string {
    return this.input.value;
  }

  get dirty(): boolean {
    return this.input.value !== this.lastSaved;
  }

  /** Load a task's transcript and reset the dirty baseline. */
  load(text: string | null): void {
    this.input.value = text ?? "";
    this.lastSaved = this.input.value;
    this.refresh();
  }

  /** Mark the current content as persisted. */
  markSaved(): void {
    this.lastSaved = this.input.value;
    this.refresh();
  }

  focus(): void {
    this.input.focus();
  }

  private refresh(): void {
    const doc = this.input.ownerDocument;
    this.mirror.replaceChildren(spaceMarkedFragment(doc, this.input.value));
    this.callbacks.onDirtyChange?.(this.dirty);
  }
}
