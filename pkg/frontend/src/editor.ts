import type { CorrectionPayload, SchemaSummary } from "./types.js";

export interface BeliefChip {
  slot: string;
  value: string;
}

function sameBelief(a: Record<string, string>, b: Record<string, string>): boolean {
  const ka = Object.keys(a).sort();
  const kb = Object.keys(b).sort();
  if (ka.length !== kb.length) return false;
  return ka.every((k, i) => k === kb[i] && a[k] === b[k]);
}

/** Per-turn correction editor: belief chips plus response text.
 *
 * Chips are restricted to the informable slots advertised by the schema
 * endpoint, and nothing is submitted until the teacher explicitly does so
 * (dirty state is tracked, never auto-flushed). */
export class TurnEditor {
  private belief: Record<string, string>;
  private response: string;

  constructor(
    readonly sessionId: string,
    readonly turnIndex: number,
    private readonly originalBelief: Record<string, string>,
    private readonly originalResponse: string,
    private readonly schema: SchemaSummary,
  ) {
    this.belief = { ...originalBelief };
    this.response = originalResponse;
  }

  get informableSlots(): string[] {
    return this.schema.slots.filter((s) => s.informable).map((s) => s.name);
  }

  /** Known values for a slot, for the chip value dropdown. */
  valuesFor(slot: string): string[] {
    return this.schema.values[slot] ?? [];
  }

  get chips(): BeliefChip[] {
    return Object.entries(this.belief)
      .map(([slot, value]) => ({ slot, value }))
      .sort((a, b) => (a.slot < b.slot ? -1 : 1));
  }

  get responseText(): string {
    return this.response;
  }

  setChip(slot: string, value: string): void {
    if (!this.informableSlots.includes(slot)) {
      throw new Error(`unknown slot ${slot}`);
    }
    if (!value.trim()) {
      throw new Error("chip value must be non-empty");
    }
    this.belief[slot] = value;
  }

  removeChip(slot: string): void {
    delete this.belief[slot];
  }

  setResponse(text: string): void {
    this.response = text;
  }

  get beliefDirty(): boolean {
    return !sameBelief(this.belief, this.originalBelief);
  }

  get responseDirty(): boolean {
    return this.response !== this.originalResponse;
  }

  get dirty(): boolean {
    return this.beliefDirty || this.responseDirty;
  }

  /** Validation message, or null when submittable. */
  validate(): string | null {
    if (!this.dirty) return "no changes to submit";
    if (this.responseDirty && !this.response.trim()) {
      return "corrected response must be non-empty";
    }
    return null;
  }

  /** The exact wire payload; carries only the fields that changed. */
  buildPayload(author?: string): CorrectionPayload {
    const problem = this.validate();
    if (problem) throw new Error(problem);
    const payload: CorrectionPayload = {
      session_id: this.sessionId,
      turn_index: this.turnIndex,
    };
    if (this.beliefDirty) payload.corrected_belief = { ...this.belief };
    if (this.responseDirty) payload.corrected_response_delex = this.response;
    if (author) payload.author = author;
    return payload;
  }
}
