/**
 * Wire types for the analysis service.  Field names match the JSON payloads
 * exactly; the frontend never reshapes or recomputes them, it only renders.
 */

export interface FilterTermPayload {
  variant_id: string;
  error_kind: string | null;
}

export interface VariantAggregate {
  variant_id: string;
  display_text: string;
  correct_count: number;
  incorrect_count: number;
  submission_count: number;
  error_facets: Record<string, number>;
}

export interface StepAggregate {
  step: number;
  display_label: string;
  member_lines: number;
  correct_count: number;
  incorrect_count: number;
  ratio: number;
  color: string;
  color_rgb: number[];
  variants: VariantAggregate[];
}

export interface LinePayload {
  index: number;
  text: string;
  raw_start: number;
  raw_end: number;
  step: number | null;
  tag: number;
  variant_id: string;
  label_class: string;
  label_kind: string;
  matched: boolean;
}

export interface SubmissionEntry {
  submission_id: string;
  passed: boolean;
  source: string;
  lines: LinePayload[];
}

export interface SubmissionPage {
  variant_id: string;
  error_kind: string | null;
  page: number;
  page_size: number;
  total_matches: number;
  page_count: number;
  entries: SubmissionEntry[];
  analysis_hash?: string;
}

export interface ViewPayload {
  steps: StepAggregate[];
  stack: FilterTermPayload[];
  active_submissions: number;
  total_submissions: number;
  detail: SubmissionPage | null;
  session_id: string;
  analysis_hash: string;
}

export interface SessionInfo {
  session_id: string;
  analysis_hash: string;
}

export interface Health {
  status: string;
  corpus_size: number;
  analysis_hash: string;
}
