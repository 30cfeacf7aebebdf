import type { ReviewState } from './state.js';
import type { PageInfo } from './types.js';

export interface RenderHandlers {
  onTokenClick?: (index: number) => void;
}

function pct(value: number, total: number): string {
  return `${(100 * value) / total}%`;
}

/**
 * Draw one page's tokens into `frame` as absolutely positioned boxes.
 * Geometry is expressed in percentages of the page dimensions, so the frame
 * can be any size and boxes keep their proportional placement. Tokens whose
 * effective label is 1 get the `on` class (the green highlight); unsaved
 * edits get `dirty`; the selected token gets `selected`.
 */
export function renderPage(
  frame: HTMLElement,
  state: ReviewState,
  page: PageInfo,
  handlers: RenderHandlers = {},
): void {
  frame.textContent = '';
  frame.classList.add('page-frame');
  frame.style.aspectRatio = `${page.page_width} / ${page.page_height}`;

  for (let index = 0; index < state.size; index++) {
    const token = state.token(index);
    if (token.page_num !== page.page_num) continue;

    const el = document.createElement('div');
    el.className = 'token';
    if (state.effectiveLabel(index) === 1) el.classList.add('on');
    if (state.isDirty(index)) el.classList.add('dirty');
    if (index === state.selected) el.classList.add('selected');

    el.style.left = pct(token.box.left, page.page_width);
    el.style.top = pct(token.box.top, page.page_height);
    el.style.width = pct(token.box.width, page.page_width);
    el.style.height = pct(token.box.height, page.page_height);

    el.textContent = token.text;
    el.dataset.index = String(index);
    if (token.probability !== null) {
      el.title = `p(table)=${token.probability.toFixed(3)}`;
    }
    if (handlers.onTokenClick) {
      const cb = handlers.onTokenClick;
      el.addEventListener('click', () => cb(index));
    }
    frame.appendChild(el);
  }
}
