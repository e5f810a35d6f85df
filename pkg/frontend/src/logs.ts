import type { Api, LogFilters } from "./api.js";
import type { LogPage, LogSummary } from "./types.js";

/** Browsable, pollable session log list with filters and paging. */
export class LogListView {
  logs: LogSummary[] = [];
  page = 1;
  pages = 1;
  total = 0;
  flaggedOnly = false;
  domain: string | null = null;
  error: string | null = null;
  pollMs: number;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: Api,
    pollMs = 5000,
    readonly pageSize = 20,
  ) {
    this.pollMs = pollMs;
  }

  private filters(): LogFilters {
    return {
      flagged: this.flaggedOnly || undefined,
      domain: this.domain ?? undefined,
      page: this.page,
      pageSize: this.pageSize,
    };
  }

  apply(pageData: LogPage): void {
    this.logs = pageData.logs;
    this.page = pageData.page;
    this.pages = pageData.pages;
    this.total = pageData.total;
  }

  async refresh(): Promise<void> {
    try {
      this.apply(await this.api.listLogs(this.filters()));
      this.error = null;
    } catch (err) {
      this.error = String(err);
    }
  }

  async setFlaggedOnly(on: boolean): Promise<void> {
    this.flaggedOnly = on;
    this.page = 1;
    await this.refresh();
  }

  async setDomain(domain: string | null): Promise<void> {
    this.domain = domain;
    this.page = 1;
    await this.refresh();
  }

  get hasNext(): boolean {
    return this.page < this.pages;
  }

  get hasPrev(): boolean {
    return this.page > 1;
  }

  async next(): Promise<void> {
    if (!this.hasNext) return;
    this.page += 1;
    await this.refresh();
  }

  async prev(): Promise<void> {
    if (!this.hasPrev) return;
    this.page -= 1;
    await this.refresh();
  }

  startPolling(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.refresh(), this.pollMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
