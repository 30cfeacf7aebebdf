import { afterEach, describe, expect, it } from 'vitest';

import type { ReviewApi } from '../src/api.js';
import { ReviewApp } from '../src/app.js';
import type { Label, LabelWrite, TokenRecord } from '../src/types.js';
import { makeTokens, PAGE } from './helpers.js';

const SCHEMA = 'tabext-api-v1';
const DOC = 'doc_000';

interface ExportedRecord {
  doc_id: string;
  token_index: number;
  label: number;
  source: string;
}

/**
 * Minimal stand-in for the review service with the same label semantics:
 * seed labels from the corpus, human writes win, export returns the
 * effective label per token.
 */
class FakeService {
  received: LabelWrite[][] = [];
  private human = new Map<number, Label>();

  constructor(private readonly seed: readonly Label[]) {}

  private effective(index: number): { label: Label; source: string } {
    const human = this.human.get(index);
    if (human !== undefined) return { label: human, source: 'human' };
    return { label: this.seed[index]!, source: 'seed' };
  }

  exportRecords(): ExportedRecord[] {
    return this.seed.map((_, index) => ({
      doc_id: DOC,
      token_index: index,
      ...this.effective(index),
    }));
  }

  seedRecords(): ExportedRecord[] {
    return this.seed.map((label, index) => ({
      doc_id: DOC,
      token_index: index,
      label,
      source: 'seed',
    }));
  }

  api(): ReviewApi {
    return {
      listDocuments: async () => ({
        schema_version: SCHEMA,
        documents: [
          {
            doc_id: DOC,
            page_count: 1,
            token_count: this.seed.length,
            reviewed_fraction: this.human.size / this.seed.length,
          },
        ],
        has_model: false,
      }),
      fetchTokens: async () => ({
        schema_version: SCHEMA,
        doc_id: DOC,
        pages: [PAGE],
        tokens: makeTokens([...this.seed]).map((token, index): TokenRecord => {
          const { label, source } = this.effective(index);
          return { ...token, label, source };
        }),
      }),
      saveLabels: async (_docId, writes) => {
        this.received.push(writes);
        for (const w of writes) this.human.set(w.token_index, w.label);
        return { schema_version: SCHEMA, accepted: writes.length, revisions: [] };
      },
      exportTrainingSet: async () => ({
        schema_version: SCHEMA,
        path: 'training_labels.jsonl',
        count: this.seed.length,
        records: this.exportRecords(),
      }),
    };
  }
}

let apps: ReviewApp[] = [];

async function mount(api: ReviewApi): Promise<{ root: HTMLElement; app: ReviewApp }> {
  const root = document.createElement('div');
  document.body.appendChild(root);
  const app = new ReviewApp(root, api);
  apps.push(app);
  await app.start();
  return { root, app };
}

afterEach(() => {
  for (const app of apps) app.dispose();
  apps = [];
  document.body.innerHTML = '';
});

describe('correction loop', () => {
  it('toggle → save → refetch → export differs from the seed in exactly one record', async () => {
    const service = new FakeService([1, 0, 0]);
    const { root, app } = await mount(service.api());

    // the reviewer flips the one token the model got wrong
    const target = root.querySelectorAll<HTMLElement>('.token')[1]!;
    target.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(app.state.dirtyCount).toBe(1);

    await app.save();

    // the POST carried exactly the corrected token
    expect(service.received).toEqual([[{ token_index: 1, label: 1 }]]);

    // the refetched snapshot shows the human label, nothing left dirty
    expect(app.state.dirtyCount).toBe(0);
    expect(app.state.token(1).label).toBe(1);
    expect(app.state.token(1).source).toBe('human');

    // export now differs from the seed labels in exactly that record
    const exported = service.exportRecords();
    const seed = service.seedRecords();
    const changed = exported.filter(
      (record, i) =>
        record.label !== seed[i]!.label || record.source !== seed[i]!.source,
    );
    expect(changed).toEqual([
      { doc_id: DOC, token_index: 1, label: 1, source: 'human' },
    ]);
  });

  it('the correction persists for a fresh session', async () => {
    const service = new FakeService([1, 0, 0]);
    const first = await mount(service.api());
    first.root.querySelectorAll<HTMLElement>('.token')[2]!.dispatchEvent(
      new MouseEvent('click', { bubbles: true }),
    );
    await first.app.save();
    first.app.dispose();

    const second = await mount(service.api());
    expect(second.app.state.token(2).label).toBe(1);
    expect(second.app.state.token(2).source).toBe('human');
    expect(second.app.state.dirtyCount).toBe(0);
  });

  it('no corrections → export equals the seed labels', async () => {
    const service = new FakeService([1, 0, 1]);
    await mount(service.api());

    expect(service.exportRecords()).toEqual(service.seedRecords());
  });
});
