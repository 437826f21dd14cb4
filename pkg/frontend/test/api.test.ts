import { describe, expect, it } from "vitest";

import { ApiError, ConflictError, TriageApi } from "../src/api.js";
import { FakeTriageServer, seededPackages } from "./fake_server.js";

function client(server: FakeTriageServer): TriageApi {
  return new TriageApi("http://test.local", server.fetch);
}

describe("TriageApi", () => {
  it("fetches the flagged queue by default", async () => {
    const api = client(new FakeTriageServer(seededPackages()));
    const res = await api.getQueue();
    expect(res.revision).toBe(1);
    expect(res.queue.map((r) => r.status)).toEqual(["FLAGGED", "FLAGGED", "FLAGGED"]);
  });

  it("passes status and top through as query params", async () => {
    const api = client(new FakeTriageServer(seededPackages()));
    const res = await api.getQueue("FLAGGED", 1);
    expect(res.queue).toHaveLength(1);
    expect(res.queue[0].coordinate).toBe("npm:payload-fetch-utils:2.1.4");
  });

  it("splits a coordinate into the package path", async () => {
    const api = client(new FakeTriageServer(seededPackages()));
    const bundle = await api.getPackage("npm:imgfast:3.2.0");
    expect(bundle.report.coordinate).toBe("npm:imgfast:3.2.0");
    expect(bundle.authors).toEqual(["imgfast-team"]);
  });

  it("maps 404 to ApiError with the server message", async () => {
    const api = client(new FakeTriageServer(seededPackages()));
    await expect(api.getPackage("npm:ghost:0.0.0")).rejects.toThrowError(ApiError);
    await expect(api.getPackage("npm:ghost:0.0.0")).rejects.toThrow(/npm:ghost:0.0.0/);
  });

  it("maps 409 to ConflictError", async () => {
    const server = new FakeTriageServer(seededPackages());
    const api = client(server);
    await expect(
      api.postLabel({ coordinate: "npm:imgfast:3.2.0", verdict: "BENIGN", revision: 99 }),
    ).rejects.toThrowError(ConflictError);
  });

  it("posts the full label payload", async () => {
    const server = new FakeTriageServer(seededPackages());
    const api = client(server);
    await api.postLabel({
      coordinate: "npm:imgfast:3.2.0",
      verdict: "BENIGN",
      scope: "coordinate",
      note: "reviewed the binary",
      revision: 1,
    });
    expect(server.labelCalls[0]).toMatchObject({
      coordinate: "npm:imgfast:3.2.0",
      verdict: "BENIGN",
      scope: "coordinate",
      note: "reviewed the binary",
      revision: 1,
    });
  });

  it("surfaces 422 for a bad verdict", async () => {
    const api = client(new FakeTriageServer(seededPackages()));
    await expect(
      api.postLabel({ coordinate: "npm:imgfast:3.2.0", verdict: "SHRUG" as never }),
    ).rejects.toThrow(/verdict/);
  });
});
