/**
 * Shapes of the /v1 API payloads this console consumes.
 *
 * Scores arrive as fixed three-decimal strings ("2.705") and are rendered
 * verbatim; the client never recomputes or reformats a number.
 */

export interface BlockSummary {
  block_id: string;
  title: string;
  indicator_count: number;
}

export interface CatalogSummary {
  catalog_id: string;
  version: string;
  indicator_count: number;
  blocks: BlockSummary[];
}

export interface IndicatorJson {
  number: string;
  text: string;
  yes_score: string;
  no_score: string;
  layer: string;
}

export interface CatalogDetail {
  catalog_id: string;
  version: string;
  blocks: Array<{ block_id: string; title: string; indicators: IndicatorJson[] }>;
}

export interface SessionMetadataJson {
  use_case_id: string;
  title: string;
  participants: string[];
  trl: string | null;
  session_date: string;
  recommended_followup_months: number | null;
  notes: string;
}

export interface AnswerJson {
  block_id: string;
  number: string;
  verdict: 'yes' | 'no';
  unsure: boolean;
  comment: string | null;
  answered_at: string;
}

export interface SessionJson {
  session_id: string;
  catalog_ref: { catalog_id: string; version: string };
  selected_blocks: string[];
  metadata: SessionMetadataJson;
  state: 'in_progress' | 'complete';
  seq: number;
  answers: AnswerJson[];
}

export interface NextPayload {
  done: boolean;
  block_id?: string;
  indicator_id?: string;
  text?: string;
  layer?: string;
  seq: number;
  progress: { answered: number; reachable_remaining_upper_bound: number };
}

export interface ContributionJson {
  block_id: string;
  number: string;
  verdict: 'yes' | 'no';
  contribution: string;
}

export interface BlockScoreJson {
  block_id: string;
  raw_sum: string;
  normalized: string;
}

export interface ScoreReportJson {
  session_id: string;
  contributions: ContributionJson[];
  block_scores: BlockScoreJson[];
  global_score: string;
  erl: { level: number; label: string };
  unsure_followups: Array<{ block_id: string; number: string }>;
}

export interface TimelinePointJson {
  session_id: string;
  session_date: string;
  global_score: string;
  erl_level: number;
  block_scores: BlockScoreJson[];
}

export interface TimelineJson {
  use_case_id: string;
  points: TimelinePointJson[];
}

export interface BlockDeltaJson {
  block_id: string;
  old: string;
  new: string;
  delta: string;
}

export interface SessionDiffJson {
  from_id: string;
  to_id: string;
  answer_changes: Array<{
    block_id: string;
    number: string;
    old: { verdict: string; unsure: boolean } | null;
    new: { verdict: string; unsure: boolean } | null;
  }>;
  contribution_delta_by_indicator: Array<{ block_id: string; number: string; delta: string }>;
  block_deltas: BlockDeltaJson[];
  global_delta: string;
  erl_change: { old: number; new: number };
}

export interface NewSessionResponse {
  session: SessionJson;
  next: NextPayload;
}

export interface AnswerBody {
  block_id: string;
  indicator: string;
  verdict: 'yes' | 'no';
  unsure: boolean;
  comment: string | null;
  expected_seq: number;
}
