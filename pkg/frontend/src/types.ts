// Wire types for the review service JSON API (schema tabext-api-v1).

export const API_SCHEMA_VERSION = 'tabext-api-v1';

export type Label = 0 | 1;

export interface Box {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface TokenRecord {
  token_index: number;
  page_num: number;
  text: string;
  box: Box;
  probability: number | null;
  predicted_label: number | null;
  label: number | null;
  source: string | null;
}

export interface PageInfo {
  page_num: number;
  page_width: number;
  page_height: number;
}

export interface DocumentSummary {
  doc_id: string;
  page_count: number;
  token_count: number;
  reviewed_fraction: number;
}

export interface DocumentListResponse {
  schema_version: string;
  documents: DocumentSummary[];
  has_model: boolean;
}

export interface TokensResponse {
  schema_version: string;
  doc_id: string;
  pages: PageInfo[];
  tokens: TokenRecord[];
}

export interface LabelWrite {
  token_index: number;
  label: Label;
}

export interface WriteResponse {
  schema_version: string;
  accepted: number;
  revisions: unknown[];
}

export interface ExportResponse {
  schema_version: string;
  path: string;
  count: number;
  records: unknown[];
}
