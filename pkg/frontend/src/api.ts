import type {
  DocumentListResponse,
  ExportResponse,
  LabelWrite,
  TokensResponse,
  WriteResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = 'ApiError';
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  if (!response.ok) {
    // FastAPI puts the human-readable reason in {"detail": ...}
    let detail = `${response.status} ${response.statusText}`;
    try {
      const body = await response.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(detail, response.status);
  }
  return response.json() as Promise<T>;
}

function post<T>(path: string, payload: unknown): Promise<T> {
  return request<T>(path, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(payload),
  });
}

export function listDocuments(): Promise<DocumentListResponse> {
  return request('/documents');
}

export function fetchTokens(docId: string): Promise<TokensResponse> {
  return request(`/documents/${encodeURIComponent(docId)}/tokens`);
}

export function saveLabels(docId: string, writes: LabelWrite[]): Promise<WriteResponse> {
  return post(`/documents/${encodeURIComponent(docId)}/labels`, writes);
}

export function exportTrainingSet(path?: string): Promise<ExportResponse> {
  return post('/export-training-set', path ? { path } : {});
}

export interface ReviewApi {
  listDocuments: typeof listDocuments;
  fetchTokens: typeof fetchTokens;
  saveLabels: typeof saveLabels;
  exportTrainingSet: typeof exportTrainingSet;
}

export const reviewApi: ReviewApi = {
  listDocuments,
  fetchTokens,
  saveLabels,
  exportTrainingSet,
};
