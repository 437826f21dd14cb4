import { describe, expect, it } from "vitest";

import { TriageApi } from "../src/api.js";
import { Store, initialState, persistenceDays, visibleRows, withoutCoordinate } from "../src/state.js";
import { FakeTriageServer, seededPackages } from "./fake_server.js";

function storeOn(server: FakeTriageServer): Store {
  return new Store(new TriageApi("http://test.local", server.fetch));
}

describe("pure state helpers", () => {
  it("filters rows by rule family", async () => {
    const server = new FakeTriageServer(seededPackages());
    const store = storeOn(server);
    await store.refresh();

    const all = visibleRows(store.state);
    expect(all).toHaveLength(3);

    store.state = { ...store.state, filters: { status: "FLAGGED", family: "metadata" } };
    expect(visibleRows(store.state).map((r) => r.coordinate)).toEqual(["npm:imgfast:3.2.0"]);

    store.state = { ...store.state, filters: { status: "FLAGGED", family: "dynamic" } };
    expect(visibleRows(store.state).map((r) => r.coordinate)).toEqual([
      "npm:payload-fetch-utils:2.1.4",
      "pypi:quick-env-info:0.3.1",
    ]);
  });

  it("computes persistence days from release time", () => {
    const now = new Date("2026-05-01T00:00:00Z");
    expect(persistenceDays("2026-04-25T09:30:00Z", now)).toBe(5);
    expect(persistenceDays("2026-05-02T00:00:00Z", now)).toBe(0);
    expect(persistenceDays("not a date", now)).toBe(0);
  });

  it("drops exactly the labeled coordinate", () => {
    const rows = [
      { coordinate: "a" },
      { coordinate: "b" },
    ] as ReturnType<typeof initialState>["queue"];
    expect(withoutCoordinate(rows, "a").map((r) => r.coordinate)).toEqual(["b"]);
  });
});

describe("Store", () => {
  it("refresh pulls queue, stats and revision together", async () => {
    const store = storeOn(new FakeTriageServer(seededPackages()));
    await store.refresh();
    expect(store.state.revision).toBe(1);
    expect(store.state.queue).toHaveLength(3);
    expect(store.state.stats.S_INSTALL_HOOK.triggers).toBe(1);
  });

  it("label removes the row optimistically, then reconciles", async () => {
    const server = new FakeTriageServer(seededPackages());
    const store = storeOn(server);
    await store.refresh();

    const emitted: number[] = [];
    store.subscribe((s) => emitted.push(s.queue.length));
    await store.label("npm:imgfast:3.2.0", "BENIGN");

    // first emission is the optimistic removal, before any response
    expect(emitted[0]).toBe(2);
    expect(store.state.queue.map((r) => r.coordinate)).not.toContain("npm:imgfast:3.2.0");
    expect(server.verdicts.get("npm:imgfast:3.2.0")).toBe("BENIGN");
  });

  it("a stale revision turns into a refresh prompt, not a crash", async () => {
    const server = new FakeTriageServer(seededPackages());
    const store = storeOn(server);
    await store.refresh();
    server.revision = 7; // another analyst labeled in between

    await store.label("npm:imgfast:3.2.0", "BENIGN");
    expect(store.state.conflict).toBe(true);
    expect(store.state.notice).toMatch(/refresh/i);
    expect(server.verdicts.has("npm:imgfast:3.2.0")).toBe(false);

    await store.refresh();
    expect(store.state.conflict).toBe(false);
    expect(store.state.revision).toBe(7);
  });

  it("select loads the evidence bundle and close clears it", async () => {
    const store = storeOn(new FakeTriageServer(seededPackages()));
    await store.refresh();
    await store.select("npm:imgfast:3.2.0");
    expect(store.state.selected?.report.coordinate).toBe("npm:imgfast:3.2.0");
    store.closeEvidence();
    expect(store.state.selected).toBeNull();
  });
});
