import { describe, expect, it } from "vitest";

import { PackageBundle } from "../src/api.js";
import { initialState } from "../src/state.js";
import { escapeHtml, renderDashboard, renderEvidence, renderNotice, renderQueue } from "../src/view.js";

const row = {
  coordinate: "npm:payload-fetch-utils:2.1.4",
  status: "FLAGGED",
  score: 3,
  non_gray_score: 3,
  triggers: [
    { rule_id: "S_INSTALL_HOOK", weight: 1, gray: false, excluded: false },
    { rule_id: "D_UNEXPECTED_ENDPOINT", weight: 1, gray: true, excluded: false },
  ],
  amplified_downloads: 15200,
  release_time: "2026-04-25T09:30:00Z",
};

describe("renderQueue", () => {
  it("shows score, badges, reach and age per row", () => {
    const state = { ...initialState(), queue: [row] };
    const html = renderQueue(state, new Date("2026-05-05T09:30:00Z"));
    expect(html).toContain("npm:payload-fetch-utils:2.1.4");
    expect(html).toContain("3.0");
    expect(html).toContain("S_INSTALL_HOOK");
    expect(html).toContain('class="badge dynamic gray"');
    expect(html).toContain("15.2k");
    expect(html).toContain("10d");
    expect(html).toContain('data-action="label-benign"');
  });

  it("escapes hostile package names", () => {
    const evil = { ...row, coordinate: 'npm:<img src=x onerror=alert(1)>:1.0.0' };
    const html = renderQueue({ ...initialState(), queue: [evil] });
    expect(html).not.toContain("<img");
    expect(html).toContain("&lt;img");
  });

  it("renders an empty message when nothing matches", () => {
    expect(renderQueue(initialState())).toContain("Queue is empty");
  });
});

describe("renderEvidence", () => {
  const bundle: PackageBundle = {
    revision: 1,
    report: row,
    metadata_findings: { typosquat_of: [] },
    static_findings: {
      flows: [
        {
          source: { api: "https.get", category: "NETWORK", file: "setup.js", line: 3 },
          sink: { api: "eval", category: "CODEGEN", file: "setup.js", line: 7 },
          path: [
            {
              file: "setup.js",
              line: 3,
              note: "source https.get",
              excerpt: [
                { line: 2, text: "function pull(url) {", hit: false },
                { line: 3, text: "  https.get(url, handler);", hit: true },
              ],
            },
            { file: "setup.js", line: 7, note: "sink eval", excerpt: [] },
          ],
        },
      ],
    },
    dynamic_findings: {
      unexpected_endpoints: [
        { mode: "INSTALL", ts: 1.5, kind: "DNS_QUERY", detail: { domain: "cdn.evil.example" } },
      ],
      sensitive_reads: [],
      sensitive_writes: [],
      unexpected_processes: [],
    },
    attributed: [],
    downloads: 260,
    authors: ["jmorrow-dev"],
  };

  it("renders flow hops as file:line with excerpts", () => {
    const html = renderEvidence(bundle);
    expect(html).toContain("setup.js:3");
    expect(html).toContain("setup.js:7");
    expect(html).toContain("https.get(url, handler);");
    expect(html).toContain('class="src-line hit"');
    expect(html).toContain("https.get");
    expect(html).toContain("eval");
  });

  it("renders the trace events table", () => {
    const html = renderEvidence(bundle);
    expect(html).toContain("DNS_QUERY");
    expect(html).toContain("cdn.evil.example");
  });

  it("has label controls with all three scopes", () => {
    const html = renderEvidence(bundle);
    expect(html).toContain('value="coordinate"');
    expect(html).toContain('value="rule"');
    expect(html).toContain('value="author"');
    expect(html).toContain('data-action="label-malicious"');
  });
});

describe("renderDashboard", () => {
  it("shows trigger, tp and fp tallies per rule", () => {
    const html = renderDashboard({
      S_INSTALL_HOOK: { triggers: 4, tp: 2, fp: 1, description: "install hook", gray: false },
    });
    expect(html).toContain("S_INSTALL_HOOK");
    expect(html).toContain("4 hit");
    expect(html).toContain("2 tp");
    expect(html).toContain("1 fp");
  });

  it("scales bar widths against the busiest rule", () => {
    const html = renderDashboard({
      A_RULE: { triggers: 10, tp: 5, fp: 0, description: "", gray: false },
      B_RULE: { triggers: 5, tp: 0, fp: 5, description: "", gray: false },
    });
    expect(html).toContain("width:100%");
    expect(html).toContain("width:50%");
  });
});

describe("renderNotice", () => {
  it("conflict notices carry a refresh action", () => {
    const html = renderNotice({
      ...initialState(),
      conflict: true,
      notice: "Queue changed under you; refresh before labeling.",
    });
    expect(html).toContain('data-action="refresh"');
    expect(html).toContain("refresh before labeling");
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup and quotes", () => {
    expect(escapeHtml(`<a b="c" d='e'>&`)).toBe("&lt;a b=&quot;c&quot; d=&#39;e&#39;&gt;&amp;");
  });
});
