// In-memory stand-in for the triage service, implementing the
// documented API semantics: revision bumps on every label, 404/409/422
// errors, FP/TP tallies derived from verdicts, and shared-author
// feedback after a MALICIOUS verdict. Tests drive the real client and
// store against it through a fetch-compatible entry point.

import { QueueRow, RuleTrigger } from "../src/api.js";

export interface FakePackage {
  coordinate: string;
  authors: string[];
  ruleIds: string[];
  amplified: number;
  releaseTime: string;
}

const RULE_IDS = [
  "M_TYPOSQUAT", "M_CROSS_REGISTRY", "M_MALWARE_RELATION", "M_RELEASE_WINDOW",
  "M_EMBEDDED_BINARY", "S_INSTALL_HOOK", "S_NEW_RISKY_APIS", "S_EXFIL_FLOW",
  "S_DOWNLOAD_EXEC_FLOW", "D_UNEXPECTED_ENDPOINT", "D_SENSITIVE_READ",
  "D_SENSITIVE_WRITE", "D_UNEXPECTED_PROCESS",
];

export class FakeTriageServer {
  revision = 1;
  verdicts = new Map<string, string>();
  packages: FakePackage[];
  labelCalls: Array<Record<string, unknown>> = [];

  constructor(packages: FakePackage[]) {
    this.packages = packages.map((p) => ({ ...p, ruleIds: [...p.ruleIds] }));
  }

  private triggersOf(pkg: FakePackage): RuleTrigger[] {
    const ids = [...pkg.ruleIds];
    // a confirmed-malicious author taints every other package it ships
    const badAuthors = new Set<string>();
    for (const other of this.packages) {
      if (other.coordinate !== pkg.coordinate && this.verdicts.get(other.coordinate) === "MALICIOUS") {
        for (const a of other.authors) badAuthors.add(a);
      }
    }
    if (pkg.authors.some((a) => badAuthors.has(a)) && !ids.includes("M_MALWARE_RELATION")) {
      ids.push("M_MALWARE_RELATION");
    }
    return ids.map((rule_id) => ({ rule_id, weight: 1, gray: false, excluded: false }));
  }

  private statusOf(pkg: FakePackage): string {
    const verdict = this.verdicts.get(pkg.coordinate);
    if (verdict === "MALICIOUS") return "CONFIRMED_MALICIOUS";
    if (verdict === "BENIGN") return "CONFIRMED_BENIGN";
    return this.triggersOf(pkg).length > 0 ? "FLAGGED" : "CLEAN";
  }

  private rowOf(pkg: FakePackage): QueueRow {
    const triggers = this.triggersOf(pkg);
    return {
      coordinate: pkg.coordinate,
      status: this.statusOf(pkg),
      score: triggers.length,
      non_gray_score: triggers.length,
      triggers,
      amplified_downloads: pkg.amplified,
      release_time: pkg.releaseTime,
    };
  }

  private stats(): Record<string, { triggers: number; tp: number; fp: number; description: string; gray: boolean }> {
    const out: Record<string, { triggers: number; tp: number; fp: number; description: string; gray: boolean }> = {};
    for (const id of RULE_IDS) out[id] = { triggers: 0, tp: 0, fp: 0, description: id, gray: false };
    for (const pkg of this.packages) {
      const verdict = this.verdicts.get(pkg.coordinate);
      for (const t of this.triggersOf(pkg)) {
        out[t.rule_id].triggers += 1;
        if (verdict === "MALICIOUS") out[t.rule_id].tp += 1;
        if (verdict === "BENIGN") out[t.rule_id].fp += 1;
      }
    }
    return out;
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const u = new URL(url);
    const json = (status: number, body: unknown) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (u.pathname === "/queue") {
      const wanted = (u.searchParams.get("status") ?? "FLAGGED").split(",");
      let rows = this.packages.map((p) => this.rowOf(p)).filter((r) => wanted.includes(r.status));
      rows = rows.sort((a, b) => b.score - a.score || a.coordinate.localeCompare(b.coordinate));
      const top = u.searchParams.get("top");
      if (top) rows = rows.slice(0, Number(top));
      return json(200, { revision: this.revision, queue: rows });
    }

    if (u.pathname.startsWith("/package/")) {
      const [registry, name, version] = u.pathname.split("/").slice(2);
      const key = `${registry}:${name}:${version}`;
      const pkg = this.packages.find((p) => p.coordinate === key);
      if (!pkg) return json(404, { error: `unknown coordinate ${key}` });
      return json(200, {
        revision: this.revision,
        report: this.rowOf(pkg),
        metadata_findings: { typosquat_of: [] },
        static_findings: { flows: [] },
        dynamic_findings: null,
        attributed: [],
        downloads: pkg.amplified,
        authors: pkg.authors,
      });
    }

    if (u.pathname === "/label" && init?.method === "POST") {
      const body = JSON.parse(String(init.body));
      this.labelCalls.push(body);
      if (body.revision !== undefined && body.revision !== this.revision) {
        return json(409, { error: `stale revision ${body.revision} (current ${this.revision}); refresh and retry` });
      }
      const pkg = this.packages.find((p) => p.coordinate === body.coordinate);
      if (!pkg) return json(404, { error: `unknown coordinate ${body.coordinate}` });
      if (body.verdict !== "MALICIOUS" && body.verdict !== "BENIGN") {
        return json(422, { error: `unknown verdict ${body.verdict}` });
      }
      if (body.scope && !["coordinate", "rule", "author"].includes(body.scope)) {
        return json(422, { error: `unknown scope ${body.scope}` });
      }
      this.verdicts.set(body.coordinate, body.verdict);
      this.revision += 1;
      return json(200, { revision: this.revision, report: this.rowOf(pkg) });
    }

    if (u.pathname === "/rules/stats") {
      return json(200, { revision: this.revision, rules: this.stats() });
    }

    return json(404, { error: `no route ${u.pathname}` });
  };
}

export function seededPackages(): FakePackage[] {
  return [
    {
      coordinate: "npm:payload-fetch-utils:2.1.4",
      authors: ["jmorrow-dev"],
      ruleIds: ["S_INSTALL_HOOK", "S_DOWNLOAD_EXEC_FLOW", "D_UNEXPECTED_ENDPOINT"],
      amplified: 260,
      releaseTime: "2026-04-25T09:30:00Z",
    },
    {
      coordinate: "pypi:quick-env-info:0.3.1",
      authors: ["dev-telemetry-labs"],
      ruleIds: ["D_SENSITIVE_READ", "D_UNEXPECTED_ENDPOINT"],
      amplified: 900,
      releaseTime: "2026-02-10T12:00:00Z",
    },
    {
      coordinate: "npm:imgfast:3.2.0",
      authors: ["imgfast-team"],
      ruleIds: ["M_EMBEDDED_BINARY"],
      amplified: 15000,
      releaseTime: "2026-02-20T12:00:00Z",
    },
    {
      coordinate: "pypi:mathkit:2.4.0",
      authors: ["dev-telemetry-labs"],
      ruleIds: [],
      amplified: 700,
      releaseTime: "2026-03-22T12:00:00Z",
    },
  ];
}
