// Progress view: one failed recommender shows its failure without
// blocking the remaining rows, and polling stops exactly at terminal state.
import assert from "node:assert/strict";
import test from "node:test";
import { buildProgressModel, renderProgress, startPolling } from "../src/progress.js";
function entry(overrides) {
    return {
        status: "pending",
        metrics: null,
        violations: {},
        train_seconds: null,
        recommend_seconds: null,
        detail: null,
        ...overrides,
    };
}
function record(status, per) {
    return {
        id: "exp-1",
        config: {
            dataset_id: "d",
            split_method: "random",
            test_fraction: 0.2,
            k: 10,
            rating_threshold: 3,
            recommender_ids: Object.keys(per),
            seed: 7,
        },
        status,
        realized_split_sizes: { train: 4000, test: 1000 },
        per_recommender: per,
        created_at: "2026-01-01T00:00:00+00:00",
        finished_at: null,
        failure_detail: null,
        digest: null,
    };
}
test("an injected per-recommender failure leaves the other rows live", () => {
    const model = buildProgressModel(record("running", {
        broken: entry({ status: "failed", detail: "training timeout" }),
        busy: entry({ status: "recommending", train_seconds: 2.5 }),
        waiting: entry({ status: "pending" }),
    }));
    assert.equal(model.terminal, false);
    assert.equal(model.rows.length, 3);
    const byId = Object.fromEntries(model.rows.map((row) => [row.recommender, row]));
    assert.equal(byId["broken"].status, "failed");
    assert.equal(byId["broken"].detail, "training timeout");
    assert.equal(byId["busy"].status, "recommending");
    assert.equal(byId["waiting"].status, "pending");
    const html = renderProgress(model);
    assert.ok(html.includes("badge-failed"));
    assert.ok(html.includes("badge-recommending"));
    assert.ok(html.includes("training timeout"));
});
test("model reports terminal only for done or failed records", () => {
    assert.equal(buildProgressModel(record("running", {})).terminal, false);
    assert.equal(buildProgressModel(record("queued", {})).terminal, false);
    assert.equal(buildProgressModel(record("done", {})).terminal, true);
    assert.equal(buildProgressModel(record("failed", {})).terminal, true);
});
test("polling keeps exactly one request in flight and stops on terminal", async () => {
    const states = ["running", "running", "done"];
    let calls = 0;
    let pending = [];
    const handle = startPolling(async () => {
        calls += 1;
        return states[Math.min(calls - 1, states.length - 1)] === "done";
    }, 1000, (callback) => {
        pending.push(callback);
        return 0;
    });
    // Each scheduled tick fires only after the previous poll resolved.
    await Promise.resolve();
    assert.equal(calls, 1);
    assert.equal(pending.length, 1);
    pending.shift()();
    await Promise.resolve();
    assert.equal(calls, 2);
    pending.shift()();
    await Promise.resolve();
    assert.equal(calls, 3);
    // Terminal: nothing further scheduled.
    await Promise.resolve();
    assert.equal(pending.length, 0);
    handle.stop();
});
test("a stopped poll never fires again", async () => {
    let calls = 0;
    const pending = [];
    const handle = startPolling(async () => {
        calls += 1;
        return false;
    }, 1000, (callback) => {
        pending.push(callback);
        return 0;
    });
    await Promise.resolve();
    handle.stop();
    pending.shift()?.();
    await Promise.resolve();
    assert.equal(calls, 1);
});
