import type { PageInfo, TokenRecord } from '../src/types.js';

export const PAGE: PageInfo = { page_num: 1, page_width: 2480, page_height: 3508 };

export function makeToken(overrides: Partial<TokenRecord> = {}): TokenRecord {
  return {
    token_index: 0,
    page_num: 1,
    text: 'word',
    box: { left: 100, top: 200, width: 80, height: 30 },
    probability: null,
    predicted_label: null,
    label: 0,
    source: 'seed',
    ...overrides,
  };
}

export function makeTokens(labels: number[]): TokenRecord[] {
  return labels.map((label, i) =>
    makeToken({
      token_index: i,
      text: `tok${i}`,
      box: { left: 100 + 200 * i, top: 200, width: 80, height: 30 },
      label,
    }),
  );
}
