import type { Label, LabelWrite, TokenRecord } from './types.js';

/**
 * Server-side view of a token's label: the stored label when the service
 * has one (human corrections already win there), else the model's
 * prediction, else 0.
 */
export function serverLabel(token: TokenRecord): Label {
  if (token.label === 0 || token.label === 1) return token.label;
  if (token.predicted_label === 0 || token.predicted_label === 1) {
    return token.predicted_label;
  }
  return 0;
}

/**
 * Local review session for one document: the last-fetched token snapshot
 * plus unsaved label overrides. An override that lands back on the server
 * label is dropped, so toggling twice leaves nothing dirty.
 */
export class ReviewState {
  private tokens: TokenRecord[] = [];
  private overrides = new Map<number, Label>();
  selected = -1;

  get size(): number {
    return this.tokens.length;
  }

  token(index: number): TokenRecord {
    const token = this.tokens[index];
    if (!token) throw new RangeError(`no token at index ${index}`);
    return token;
  }

  allTokens(): readonly TokenRecord[] {
    return this.tokens;
  }

  /** Replace the snapshot after a fetch; all local edits are discarded. */
  setTokens(tokens: TokenRecord[]): void {
    this.tokens = tokens.slice();
    this.overrides.clear();
    if (this.selected >= this.tokens.length) {
      this.selected = this.tokens.length - 1;
    }
  }

  effectiveLabel(index: number): Label {
    const override = this.overrides.get(index);
    return override !== undefined ? override : serverLabel(this.token(index));
  }

  isDirty(index: number): boolean {
    return this.overrides.has(index);
  }

  get dirtyCount(): number {
    return this.overrides.size;
  }

  toggle(index: number): void {
    const flipped = (1 - this.effectiveLabel(index)) as Label;
    if (flipped === serverLabel(this.token(index))) {
      this.overrides.delete(index);
    } else {
      this.overrides.set(index, flipped);
    }
  }

  /** Unsaved changes as POST payload entries, ordered by token index. */
  pendingWrites(): LabelWrite[] {
    return [...this.overrides.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([token_index, label]) => ({ token_index, label }));
  }

  select(index: number): void {
    if (this.tokens.length === 0) {
      this.selected = -1;
    } else {
      this.selected = Math.min(Math.max(index, 0), this.tokens.length - 1);
    }
  }

  selectNext(): void {
    this.select(this.selected + 1);
  }

  selectPrev(): void {
    this.select(this.selected <= 0 ? 0 : this.selected - 1);
  }

  toggleSelected(): void {
    if (this.selected >= 0) this.toggle(this.selected);
  }
}
