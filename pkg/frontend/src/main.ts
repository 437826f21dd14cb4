// Wires the store to the page: render on every state change, translate
// clicks into store calls. Everything below assumes index.html's ids.

import { TriageApi, Verdict } from "./api.js";
import { Store } from "./state.js";
import { renderDashboard, renderEvidence, renderFilters, renderNotice, renderQueue } from "./view.js";

const api = new TriageApi(
  (window as unknown as { PKGVET_API?: string }).PKGVET_API ?? "http://127.0.0.1:8400",
);
const store = new Store(api);

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

store.subscribe((state) => {
  $("notice").innerHTML = renderNotice(state);
  $("filters").innerHTML = renderFilters(state);
  $("dashboard").innerHTML = renderDashboard(state.stats);
  if (state.selected) {
    $("queue").hidden = true;
    $("evidence").hidden = false;
    $("evidence").innerHTML = renderEvidence(state.selected);
  } else {
    $("evidence").hidden = true;
    $("queue").hidden = false;
    $("queue").innerHTML = renderQueue(state);
  }
});

function coordinateOf(el: Element): string {
  const host = el.closest("[data-coordinate]");
  return host?.getAttribute("data-coordinate") ?? "";
}

function labelFrom(el: Element, verdict: Verdict): void {
  const coordinate = coordinateOf(el);
  if (!coordinate) return;
  const pane = el.closest(".evidence");
  const scopeSel = pane?.querySelector<HTMLSelectElement>("[data-label-scope]");
  const ruleSel = pane?.querySelector<HTMLSelectElement>("[data-label-rule]");
  const noteInput = pane?.querySelector<HTMLInputElement>("[data-label-note]");
  const scope = (scopeSel?.value ?? "coordinate") as "coordinate" | "rule" | "author";
  void store.label(coordinate, verdict, scope, ruleSel?.value ?? "", noteInput?.value ?? "");
}

document.addEventListener("click", (event) => {
  const target = event.target as Element;
  const action = target.closest("[data-action]")?.getAttribute("data-action");
  if (!action) return;
  event.preventDefault();
  if (action === "open") void store.select(coordinateOf(target));
  else if (action === "close") store.closeEvidence();
  else if (action === "refresh") void store.refresh();
  else if (action === "label-malicious") labelFrom(target, "MALICIOUS");
  else if (action === "label-benign") labelFrom(target, "BENIGN");
  else if (target.hasAttribute("data-tab")) switchTab(target);
});

document.addEventListener("click", (event) => {
  const tab = (event.target as Element).closest("[data-tab]");
  if (tab) switchTab(tab);
});

function switchTab(tab: Element): void {
  const name = tab.getAttribute("data-tab");
  const pane = tab.closest(".evidence");
  pane?.querySelectorAll("[data-pane]").forEach((section) => {
    (section as HTMLElement).hidden = section.getAttribute("data-pane") !== name;
  });
}

document.addEventListener("change", (event) => {
  const target = event.target as HTMLSelectElement;
  const filter = target.getAttribute("data-filter");
  if (filter === "status") void store.setFilters({ status: target.value });
  else if (filter === "family")
    void store.setFilters({ family: target.value as "all" | "metadata" | "static" | "dynamic" });
  else if (target.hasAttribute("data-label-scope")) {
    const ruleSel = target
      .closest(".evidence")
      ?.querySelector<HTMLSelectElement>("[data-label-rule]");
    if (ruleSel) ruleSel.hidden = target.value !== "rule";
  }
});

void store.refresh();
