// Client-side snapshot of server state plus view preferences. All of
// it is rebuildable from the API: a hard refresh loses nothing but the
// current filter selections.

import {
  ConflictError,
  LabelRequest,
  PackageBundle,
  QueueRow,
  RuleStats,
  TriageApi,
  Verdict,
  LabelScope,
} from "./api.js";

export type RuleFamily = "all" | "metadata" | "static" | "dynamic";

const FAMILY_PREFIX: Record<Exclude<RuleFamily, "all">, string> = {
  metadata: "M_",
  static: "S_",
  dynamic: "D_",
};

export interface Filters {
  status: string;
  family: RuleFamily;
}

export interface AppState {
  revision: number;
  queue: QueueRow[];
  stats: Record<string, RuleStats>;
  selected: PackageBundle | null;
  filters: Filters;
  notice: string;
  conflict: boolean;
}

export function initialState(): AppState {
  return {
    revision: 0,
    queue: [],
    stats: {},
    selected: null,
    filters: { status: "FLAGGED", family: "all" },
    notice: "",
    conflict: false,
  };
}

export function visibleRows(state: AppState): QueueRow[] {
  const { family } = state.filters;
  if (family === "all") return state.queue;
  const prefix = FAMILY_PREFIX[family];
  return state.queue.filter((row) =>
    row.triggers.some((t) => t.rule_id.startsWith(prefix) && !t.excluded),
  );
}

export function persistenceDays(releaseTime: string, now: Date = new Date()): number {
  const released = Date.parse(releaseTime);
  if (Number.isNaN(released)) return 0;
  const days = (now.getTime() - released) / 86_400_000;
  return Math.max(0, Math.floor(days));
}

// Optimistic removal: a labeled package leaves the FLAGGED queue
// immediately; the follow-up refresh reconciles with the server.
export function withoutCoordinate(rows: QueueRow[], coordinate: string): QueueRow[] {
  return rows.filter((row) => row.coordinate !== coordinate);
}

export class Store {
  state: AppState = initialState();
  private listeners: Array<(s: AppState) => void> = [];

  constructor(private api: TriageApi) {}

  subscribe(fn: (s: AppState) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  async refresh(): Promise<void> {
    const [queueRes, statsRes] = await Promise.all([
      this.api.getQueue(this.state.filters.status),
      this.api.getRuleStats(),
    ]);
    this.state = {
      ...this.state,
      revision: queueRes.revision,
      queue: queueRes.queue,
      stats: statsRes.rules,
      conflict: false,
    };
    this.emit();
  }

  async select(coordinate: string): Promise<void> {
    this.state = { ...this.state, selected: await this.api.getPackage(coordinate) };
    this.emit();
  }

  closeEvidence(): void {
    this.state = { ...this.state, selected: null };
    this.emit();
  }

  setFilters(filters: Partial<Filters>): Promise<void> {
    this.state = { ...this.state, filters: { ...this.state.filters, ...filters } };
    this.emit();
    return this.refresh();
  }

  async label(
    coordinate: string,
    verdict: Verdict,
    scope: LabelScope = "coordinate",
    ruleId = "",
    note = "",
  ): Promise<void> {
    const req: LabelRequest = {
      coordinate,
      verdict,
      scope,
      note,
      revision: this.state.revision,
    };
    if (scope === "rule") req.rule_id = ruleId;

    // optimistic: drop the row now, reconcile after the post
    this.state = {
      ...this.state,
      queue: withoutCoordinate(this.state.queue, coordinate),
      selected: null,
      notice: `${verdict} recorded for ${coordinate}`,
    };
    this.emit();

    try {
      await this.api.postLabel(req);
    } catch (err) {
      if (err instanceof ConflictError) {
        this.state = {
          ...this.state,
          conflict: true,
          notice: "Queue changed under you; refresh before labeling.",
        };
        this.emit();
        return;
      }
      this.state = { ...this.state, notice: `Label failed: ${(err as Error).message}` };
      this.emit();
      await this.refresh();
      return;
    }
    await this.refresh();
  }
}
