import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import type { TurnPayload } from "./types.js";

export interface TranscriptRow {
  index: number;
  userText: string;
  agentText: string;
  belief: [string, string][]; // sorted for stable rendering
  dbBucket: string;
  responseDelex: string;
  flags: string[];
}

/** Field-for-field mapping of an API turn payload into what the transcript
 * renders.  The only transformation is sorting the belief for display. */
export function toTranscriptRow(turn: TurnPayload): TranscriptRow {
  return {
    index: turn.index,
    userText: turn.user_utterance,
    agentText: turn.agent_utterance,
    belief: Object.entries(turn.prediction.belief).sort(([a], [b]) =>
      a < b ? -1 : a > b ? 1 : 0,
    ),
    dbBucket: turn.prediction.db_bucket,
    responseDelex: turn.prediction.response_delex,
    flags: [...turn.discrepancy_flags],
  };
}

/** One chat session per view: transcript, live belief card, error banner. */
export class ChatView {
  sessionId: string | null = null;
  domain = "";
  transcript: TranscriptRow[] = [];
  turns: TurnPayload[] = []; // raw payloads, kept verbatim
  error: string | null = null;
  ended = false;
  busy = false;

  constructor(private readonly api: Api) {}

  get inputEnabled(): boolean {
    return this.sessionId !== null && !this.ended && !this.busy;
  }

  /** Latest predicted belief: the live goal card. */
  get liveBelief(): [string, string][] {
    const last = this.transcript[this.transcript.length - 1];
    return last ? last.belief : [];
  }

  async start(domain?: string): Promise<void> {
    const started = await this.api.startSession(domain);
    this.sessionId = started.session_id;
    this.domain = started.domain;
    this.transcript = [];
    this.turns = [];
    this.error = null;
    this.ended = false;
  }

  /** Send one utterance; the transcript appends exactly the returned turn.
   * On failure nothing is appended and the error is surfaced inline. */
  async send(utterance: string): Promise<TurnPayload | null> {
    if (!this.sessionId || this.ended) {
      this.error = "no active session";
      return null;
    }
    this.busy = true;
    try {
      const turn = await this.api.sendTurn(this.sessionId, utterance);
      this.turns.push(turn);
      this.transcript.push(toTranscriptRow(turn));
      this.error = null;
      return turn;
    } catch (err) {
      this.error = err instanceof ApiError ? err.message : String(err);
      return null;
    } finally {
      this.busy = false;
    }
  }

  async end(): Promise<void> {
    if (!this.sessionId || this.ended) return;
    await this.api.endSession(this.sessionId);
    this.ended = true;
  }
}
