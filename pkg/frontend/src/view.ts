// HTML renderers. Pure string-in string-out so they test without a
// browser; main.ts owns the DOM writes and event wiring.

import { Flow, PackageBundle, RuleStats } from "./api.js";
import { AppState, persistenceDays, visibleRows } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function badge(ruleId: string, gray: boolean, excluded: boolean): string {
  const family = ruleId.startsWith("M_") ? "meta" : ruleId.startsWith("S_") ? "static" : "dynamic";
  const mods = `${gray ? " gray" : ""}${excluded ? " excluded" : ""}`;
  return `<span class="badge ${family}${mods}">${escapeHtml(ruleId)}</span>`;
}

function fmtDownloads(n: number): string {
  if (n >= 1_000_000) return `${(n / 1_000_000).toFixed(1)}M`;
  if (n >= 1_000) return `${(n / 1_000).toFixed(1)}k`;
  return String(n);
}

export function renderQueue(state: AppState, now: Date = new Date()): string {
  const rows = visibleRows(state);
  if (rows.length === 0) {
    return `<p class="empty">Queue is empty for this filter.</p>`;
  }
  const body = rows
    .map((row) => {
      const badges = row.triggers.map((t) => badge(t.rule_id, t.gray, t.excluded)).join(" ");
      const days = persistenceDays(row.release_time, now);
      return `<tr data-coordinate="${escapeHtml(row.coordinate)}">
        <td class="coord"><a href="#" data-action="open">${escapeHtml(row.coordinate)}</a></td>
        <td class="score">${row.score.toFixed(1)}</td>
        <td class="badges">${badges}</td>
        <td class="downloads">${fmtDownloads(row.amplified_downloads)}</td>
        <td class="days">${days}d</td>
        <td class="actions">
          <button data-action="label-malicious">malicious</button>
          <button data-action="label-benign">benign</button>
        </td>
      </tr>`;
    })
    .join("\n");
  return `<table class="queue">
    <thead><tr><th>package</th><th>score</th><th>rules</th><th>reach</th><th>age</th><th></th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}

export function renderFilters(state: AppState): string {
  const statuses = ["FLAGGED", "CONFIRMED_MALICIOUS", "CONFIRMED_BENIGN", "CLEAN", "EXCLUDED"];
  const families = ["all", "metadata", "static", "dynamic"];
  const statusOpts = statuses
    .map((s) => `<option value="${s}"${s === state.filters.status ? " selected" : ""}>${s}</option>`)
    .join("");
  const familyOpts = families
    .map((f) => `<option value="${f}"${f === state.filters.family ? " selected" : ""}>${f}</option>`)
    .join("");
  return `<label>status <select data-filter="status">${statusOpts}</select></label>
    <label>rule family <select data-filter="family">${familyOpts}</select></label>`;
}

function renderFlow(flow: Flow): string {
  const hops = flow.path
    .map((hop) => {
      const excerpt = hop.excerpt
        .map(
          (l) =>
            `<div class="src-line${l.hit ? " hit" : ""}"><span class="ln">${l.line}</span>${escapeHtml(l.text)}</div>`,
        )
        .join("");
      return `<li><code>${escapeHtml(hop.file)}:${hop.line}</code> ${escapeHtml(hop.note)}
        <div class="excerpt">${excerpt}</div></li>`;
    })
    .join("\n");
  return `<div class="flow">
    <div class="flow-head">${escapeHtml(flow.source.api)} (${flow.source.category})
      &rarr; ${escapeHtml(flow.sink.api)} (${flow.sink.category})</div>
    <ol class="hops">${hops}</ol>
  </div>`;
}

function renderDynamicTable(doc: Record<string, unknown>): string {
  const buckets = [
    "unexpected_endpoints",
    "sensitive_reads",
    "sensitive_writes",
    "unexpected_processes",
  ];
  const rows: string[] = [];
  for (const bucket of buckets) {
    const events = (doc[bucket] as Array<Record<string, unknown>>) ?? [];
    for (const ev of events) {
      rows.push(`<tr>
        <td>${escapeHtml(String(ev.mode))}</td>
        <td>${escapeHtml(String(ev.kind))}</td>
        <td>${escapeHtml(bucket.replace(/_/g, " "))}</td>
        <td><code>${escapeHtml(JSON.stringify(ev.detail))}</code></td>
      </tr>`);
    }
  }
  if (rows.length === 0) return `<p class="empty">No dynamic findings.</p>`;
  return `<table class="trace">
    <thead><tr><th>mode</th><th>event</th><th>why</th><th>detail</th></tr></thead>
    <tbody>${rows.join("\n")}</tbody>
  </table>`;
}

export function renderEvidence(bundle: PackageBundle): string {
  const report = bundle.report;
  const badges = report.triggers.map((t) => badge(t.rule_id, t.gray, t.excluded)).join(" ");
  const meta = bundle.metadata_findings
    ? `<pre class="doc">${escapeHtml(JSON.stringify(bundle.metadata_findings, null, 2))}</pre>`
    : `<p class="empty">No metadata findings.</p>`;
  const flows = bundle.static_findings?.flows ?? [];
  const staticTab = bundle.static_findings
    ? `${flows.length ? flows.map(renderFlow).join("\n") : ""}
       <pre class="doc">${escapeHtml(JSON.stringify({ ...bundle.static_findings, flows: undefined }, null, 2))}</pre>`
    : `<p class="empty">No static findings.</p>`;
  const dynamicTab = bundle.dynamic_findings
    ? renderDynamicTable(bundle.dynamic_findings)
    : `<p class="empty">No dynamic findings.</p>`;
  const attributed = bundle.attributed.length
    ? `<p class="attributed">${bundle.attributed.length} install-time finding(s) attributed to dependencies.</p>`
    : "";

  return `<div class="evidence" data-coordinate="${escapeHtml(report.coordinate)}">
    <header>
      <h2>${escapeHtml(report.coordinate)}</h2>
      <p>${badges}</p>
      <p>status ${escapeHtml(report.status)} &middot; score ${report.score.toFixed(1)}
         &middot; reach ${fmtDownloads(report.amplified_downloads)}
         &middot; authors ${escapeHtml(bundle.authors.join(", ") || "unknown")}</p>
      <button data-action="close">back to queue</button>
    </header>
    <nav class="tabs">
      <button data-tab="metadata">metadata</button>
      <button data-tab="static">static</button>
      <button data-tab="dynamic">dynamic</button>
    </nav>
    <section data-pane="metadata">${meta}</section>
    <section data-pane="static">${staticTab}${attributed}</section>
    <section data-pane="dynamic" hidden>${dynamicTab}</section>
    <footer class="label-bar">
      <label>scope <select data-label-scope>
        <option value="coordinate">package</option>
        <option value="rule">package+rule</option>
        <option value="author">author</option>
      </select></label>
      <select data-label-rule hidden>
        ${report.triggers.map((t) => `<option>${escapeHtml(t.rule_id)}</option>`).join("")}
      </select>
      <input data-label-note placeholder="note" />
      <button data-action="label-malicious">malicious</button>
      <button data-action="label-benign">benign</button>
    </footer>
  </div>`;
}

export function renderDashboard(stats: Record<string, RuleStats>): string {
  const ids = Object.keys(stats).sort();
  if (ids.length === 0) return "";
  const maxTriggers = Math.max(1, ...ids.map((id) => stats[id].triggers));
  const rows = ids
    .map((id) => {
      const s = stats[id];
      const width = (n: number) => Math.round((n / maxTriggers) * 100);
      return `<div class="rule-row" data-rule="${escapeHtml(id)}" title="${escapeHtml(s.description)}">
        <span class="rule-id">${escapeHtml(id)}</span>
        <span class="bars">
          <span class="bar triggers" style="width:${width(s.triggers)}%"></span>
          <span class="bar tp" style="width:${width(s.tp)}%"></span>
          <span class="bar fp" style="width:${width(s.fp)}%"></span>
        </span>
        <span class="tallies">${s.triggers} hit &middot; ${s.tp} tp &middot; <span class="fp-count">${s.fp} fp</span></span>
      </div>`;
    })
    .join("\n");
  return `<div class="dashboard">${rows}</div>`;
}

export function renderNotice(state: AppState): string {
  if (state.conflict) {
    return `<div class="notice conflict">${escapeHtml(state.notice)}
      <button data-action="refresh">refresh</button></div>`;
  }
  return state.notice ? `<div class="notice">${escapeHtml(state.notice)}</div>` : "";
}
