// Typed client for the triage service. Every call goes through the
// documented JSON API; nothing here reaches into engine internals.

export interface RuleTrigger {
  rule_id: string;
  weight: number;
  gray: boolean;
  excluded: boolean;
}

export interface QueueRow {
  coordinate: string;
  status: string;
  score: number;
  non_gray_score: number;
  triggers: RuleTrigger[];
  amplified_downloads: number;
  release_time: string;
}

export interface QueueResponse {
  revision: number;
  queue: QueueRow[];
}

export interface FlowEndpoint {
  api: string;
  category: string;
  file: string;
  line: number;
}

export interface ExcerptLine {
  line: number;
  text: string;
  hit: boolean;
}

export interface FlowHop {
  file: string;
  line: number;
  note: string;
  excerpt: ExcerptLine[];
}

export interface Flow {
  source: FlowEndpoint;
  sink: FlowEndpoint;
  path: FlowHop[];
}

export interface PackageBundle {
  revision: number;
  report: QueueRow;
  metadata_findings: Record<string, unknown> | null;
  static_findings: { flows: Flow[]; [key: string]: unknown } | null;
  dynamic_findings: Record<string, unknown> | null;
  attributed: Array<Record<string, unknown>>;
  downloads: number | null;
  authors: string[];
}

export type Verdict = "MALICIOUS" | "BENIGN";
export type LabelScope = "coordinate" | "rule" | "author";

export interface LabelRequest {
  coordinate: string;
  verdict: Verdict;
  scope?: LabelScope;
  rule_id?: string;
  note?: string;
  revision?: number;
}

export interface RuleStats {
  triggers: number;
  tp: number;
  fp: number;
  description: string;
  gray: boolean;
}

export interface StatsResponse {
  revision: number;
  rules: Record<string, RuleStats>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

// 409 means somebody labeled from a newer snapshot first
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class TriageApi {
  constructor(
    private baseUrl: string = "http://127.0.0.1:8400",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      let message = `${res.status}`;
      try {
        const body = await res.json();
        if (body && typeof body.error === "string") message = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (res.status === 409) throw new ConflictError(message);
      throw new ApiError(res.status, message);
    }
    return res.json() as Promise<T>;
  }

  getQueue(status?: string, top?: number): Promise<QueueResponse> {
    const params = new URLSearchParams();
    if (status) params.set("status", status);
    if (top !== undefined) params.set("top", String(top));
    const qs = params.toString();
    return this.request<QueueResponse>(`/queue${qs ? "?" + qs : ""}`);
  }

  getPackage(coordinate: string): Promise<PackageBundle> {
    const [registry, name, version] = coordinate.split(":");
    return this.request<PackageBundle>(
      `/package/${encodeURIComponent(registry)}/${encodeURIComponent(name)}/${encodeURIComponent(version)}`,
    );
  }

  postLabel(req: LabelRequest): Promise<{ revision: number; report: QueueRow }> {
    return this.request(`/label`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getRuleStats(): Promise<StatsResponse> {
    return this.request<StatsResponse>(`/rules/stats`);
  }
}
