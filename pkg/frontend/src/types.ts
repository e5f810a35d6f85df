// Client-side mirrors of the teaching service API payloads.

export interface PredictionPayload {
  belief: Record<string, string>;
  db_bucket: string;
  response_delex: string;
}

export interface TurnPayload {
  index: number;
  user_utterance: string;
  agent_utterance: string;
  prediction: PredictionPayload;
  discrepancy_flags: string[];
}

export interface SessionStart {
  session_id: string;
  domain: string;
}

export interface LogSummary {
  id: string;
  domain: string;
  started_at: string;
  ended_at: string | null;
  turns: number;
  flags: string[];
  active: boolean;
}

export interface LogPage {
  logs: LogSummary[];
  page: number;
  pages: number;
  total: number;
}

export interface LogTurn {
  index: number;
  user_utterance: string;
  agent_utterance: string;
  prediction: PredictionPayload;
  discrepancy_flags: string[];
  error: string | null;
}

export interface LogDetail extends LogSummary {
  turns: number;
  // the detail endpoint replaces the count with the actual turns
}

export interface LogDetailFull extends Omit<LogSummary, "turns"> {
  turns: LogTurn[];
}

export interface SlotDef {
  name: string;
  informable: boolean;
  requestable: boolean;
  type: string;
}

export interface SchemaSummary {
  domain: string;
  slots: SlotDef[];
  primary_key: string;
  blocks: { id: string; kind: string; slots: string[] }[];
  values: Record<string, string[]>;
}

export interface CorrectionPayload {
  session_id: string;
  turn_index: number;
  corrected_belief?: Record<string, string>;
  corrected_response_delex?: string;
  author?: string;
}

export interface CorrectionReply {
  accepted: boolean;
  deduplicated: boolean;
}

export interface MetricsPayload {
  success_rate: number;
  avg_turns_successful: number;
  jga: number;
  n_goals: number;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
