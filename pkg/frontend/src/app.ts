import { ApiError, reviewApi } from './api.js';
import type { ReviewApi } from './api.js';
import { renderPage } from './render.js';
import { ReviewState } from './state.js';
import type { DocumentSummary, PageInfo } from './types.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/**
 * The review screen: a document list on the left, the selected document's
 * token boxes at page proportions on the right, and a toolbar to save
 * label corrections or export the effective training labels.
 *
 * All server interaction goes through the injected {@link ReviewApi}; the
 * only mutating calls are the label POST (on save) and the export POST.
 */
export class ReviewApp {
  readonly state = new ReviewState();
  docId: string | null = null;
  private pages: PageInfo[] = [];
  private docs: DocumentSummary[] = [];

  private readonly list: HTMLUListElement;
  private readonly frame: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly heading: HTMLElement;
  private readonly saveButton: HTMLButtonElement;
  private readonly exportButton: HTMLButtonElement;
  private readonly onKeydown = (event: KeyboardEvent) => this.handleKey(event);

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApi = reviewApi,
  ) {
    root.classList.add('review-app');

    const sidebar = el('nav', 'sidebar');
    sidebar.appendChild(el('h2', undefined, 'Documents'));
    this.list = el('ul', 'doc-list');
    sidebar.appendChild(this.list);

    const main = el('main', 'workspace');
    this.heading = el('h2', 'doc-heading', 'No document selected');
    const toolbar = el('div', 'toolbar');
    this.saveButton = el('button', 'save', 'Save corrections');
    this.saveButton.disabled = true;
    this.saveButton.addEventListener('click', () => void this.save());
    this.exportButton = el('button', 'export', 'Export training labels');
    this.exportButton.addEventListener('click', () => void this.exportLabels());
    toolbar.append(this.saveButton, this.exportButton);
    this.statusLine = el('p', 'status', '');
    this.frame = el('div', 'page-frame');

    main.append(this.heading, toolbar, this.statusLine, this.frame);
    root.append(sidebar, main);

    root.ownerDocument.addEventListener('keydown', this.onKeydown);
  }

  dispose(): void {
    this.root.ownerDocument.removeEventListener('keydown', this.onKeydown);
  }

  async start(): Promise<void> {
    try {
      const listing = await this.api.listDocuments();
      this.docs = listing.documents;
      this.renderDocList();
      if (this.docs.length === 0) {
        this.setStatus('corpus is empty');
        return;
      }
      await this.openDocument(this.docs[0]!.doc_id);
    } catch (error) {
      this.setStatus(`failed to load documents: ${messageOf(error)}`);
    }
  }

  async openDocument(docId: string): Promise<void> {
    try {
      const payload = await this.api.fetchTokens(docId);
      this.docId = docId;
      this.pages = payload.pages;
      this.state.setTokens(payload.tokens);
      if (this.state.size > 0) this.state.select(0);
      this.heading.textContent = `${docId} — ${payload.tokens.length} tokens`;
      this.redraw();
      this.setStatus(this.dirtySummary());
      this.renderDocList();
    } catch (error) {
      this.setStatus(`failed to load ${docId}: ${messageOf(error)}`);
    }
  }

  /** POST unsaved label edits; on success refetch so UI matches the server. */
  async save(): Promise<void> {
    if (this.docId === null || this.state.dirtyCount === 0) return;
    const writes = this.state.pendingWrites();
    try {
      const result = await this.api.saveLabels(this.docId, writes);
      await this.openDocument(this.docId);
      await this.refreshDocList();
      this.setStatus(`saved ${result.accepted} correction(s)`);
    } catch (error) {
      // edits stay dirty so nothing is lost; the server message is shown
      this.setStatus(`save failed: ${messageOf(error)}`);
      this.redraw();
    }
  }

  async exportLabels(): Promise<void> {
    try {
      const result = await this.api.exportTrainingSet();
      this.setStatus(`exported ${result.count} labels to ${result.path}`);
    } catch (error) {
      this.setStatus(`export failed: ${messageOf(error)}`);
    }
  }

  private async refreshDocList(): Promise<void> {
    try {
      this.docs = (await this.api.listDocuments()).documents;
      this.renderDocList();
    } catch {
      // listing refresh is cosmetic (reviewed fractions); ignore failures
    }
  }

  private renderDocList(): void {
    this.list.textContent = '';
    for (const doc of this.docs) {
      const item = el('li', doc.doc_id === this.docId ? 'doc current' : 'doc');
      const reviewed = Math.round(doc.reviewed_fraction * 100);
      item.textContent = `${doc.doc_id} (${doc.token_count} tokens, ${reviewed}% reviewed)`;
      item.dataset.docId = doc.doc_id;
      item.addEventListener('click', () => void this.openDocument(doc.doc_id));
      this.list.appendChild(item);
    }
  }

  /** Redraws the page frame and toolbar; never touches the status line. */
  private redraw(): void {
    this.saveButton.disabled = this.state.dirtyCount === 0;
    const page = this.pages[0];
    if (!page) {
      this.frame.textContent = '';
      return;
    }
    renderPage(this.frame, this.state, page, {
      onTokenClick: (index) => {
        this.state.select(index);
        this.state.toggle(index);
        this.redraw();
        this.setStatus(this.dirtySummary());
      },
    });
  }

  private dirtySummary(): string {
    return this.state.dirtyCount === 0
      ? 'no unsaved changes'
      : `${this.state.dirtyCount} unsaved change(s)`;
  }

  private handleKey(event: KeyboardEvent): void {
    if (this.state.size === 0) return;
    switch (event.key) {
      case 'ArrowRight':
      case 'j':
        this.state.selectNext();
        break;
      case 'ArrowLeft':
      case 'k':
        this.state.selectPrev();
        break;
      case ' ':
        this.state.toggleSelected();
        break;
      default:
        return;
    }
    event.preventDefault();
    this.redraw();
    this.setStatus(this.dirtySummary());
  }

  setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  get statusText(): string {
    return this.statusLine.textContent ?? '';
  }
}

function messageOf(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return error.message;
  return String(error);
}

export function mountApp(root: HTMLElement, api: ReviewApi = reviewApi): ReviewApp {
  const app = new ReviewApp(root, api);
  void app.start();
  return app;
}
