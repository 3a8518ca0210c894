// Display fidelity: every metric cell must be byte-equal to the number in
// the GET /experiments/{id} payload, the columns must appear in the
// published order, and sorting/highlighting must not touch the bytes.
import assert from "node:assert/strict";
import test from "node:test";
import { losslessParse } from "../src/lossless.js";
import { bestValues, buildCompareRows, buildResultRows, renderResultsTable, sortRows, } from "../src/results.js";
import { METRIC_COLUMNS } from "../src/types.js";
function recordText(id, entries) {
    // Assemble the payload by hand so it contains number spellings a
    // JavaScript round-trip would normalize (1e-07, 0.30000000000000004).
    const per = Object.entries(entries)
        .map(([rid, metrics]) => {
        const body = metrics === null
            ? '"status": "failed", "metrics": null, "detail": "training timeout"'
            : `"status": "done", "metrics": ${metrics}, "detail": null`;
        return `"${rid}": {${body}, "violations": {}, "train_seconds": 1.5, "recommend_seconds": 0.5}`;
    })
        .join(", ");
    return `{
    "id": "${id}",
    "config": {"dataset_id": "d", "split_method": "random", "test_fraction": 0.2,
               "k": 10, "rating_threshold": 3, "recommender_ids": [${Object.keys(entries)
        .map((rid) => `"${rid}"`)
        .join(", ")}], "seed": 7},
    "status": "done",
    "realized_split_sizes": {"train": 4000, "test": 1000},
    "per_recommender": {${per}},
    "created_at": "2026-01-01T00:00:00+00:00",
    "finished_at": "2026-01-01T00:01:00+00:00",
    "failure_detail": null,
    "digest": "sha256:0"
  }`;
}
const AWKWARD_METRICS = '{"coverage": 1.000000, "precision": 1e-07, "recall": 0.30000000000000004, ' +
    '"ndcg": 0.005069, "novelty": 13.37526, "diversity": null, "serendipity": 0.005003}';
test("metric cells are byte-equal to the payload numbers", () => {
    const text = recordText("exp-1", { random: AWKWARD_METRICS });
    const rows = buildResultRows(text);
    assert.equal(rows.length, 1);
    const cells = rows[0].cells;
    assert.equal(cells.coverage.raw, "1.000000");
    assert.equal(cells.precision.raw, "1e-07"); // JS would print 1e-7
    assert.equal(cells.recall.raw, "0.30000000000000004");
    assert.equal(cells.ndcg.raw, "0.005069");
    assert.equal(cells.novelty.raw, "13.37526");
    assert.equal(cells.serendipity.raw, "0.005003");
    // Every numeric cell's bytes literally appear in the payload.
    for (const column of METRIC_COLUMNS) {
        const cell = cells[column];
        if (cell.value !== null) {
            assert.ok(text.includes(`"${column}": ${cell.raw}`), column);
        }
    }
    // Absent diversity renders as a dash, never a fabricated number.
    assert.equal(cells.diversity.raw, "–");
    assert.equal(cells.diversity.value, null);
});
test("rendered table keeps the published column order", () => {
    const html = renderResultsTable(buildResultRows(recordText("exp-2", { random: AWKWARD_METRICS })));
    const positions = ["Coverage", "Precision", "Recall", "NDCG", "Novelty", "Diversity", "Serendipity"]
        .map((label) => html.indexOf(`>${label}<`));
    assert.ok(positions.every((p) => p >= 0));
    assert.deepEqual(positions, [...positions].sort((a, b) => a - b));
    assert.ok(html.includes("1e-07"));
});
const LOW = '{"coverage": 0.017920, "precision": 0.145146, "recall": 0.084294, ' +
    '"ndcg": 0.158512, "novelty": 8.580345, "diversity": 0.600524, "serendipity": 0.071869}';
const HIGH = '{"coverage": 1.000000, "precision": 0.005152, "recall": 0.002526, ' +
    '"ndcg": 0.005069, "novelty": 13.37526, "diversity": 0.966485, "serendipity": 0.005003}';
test("sorting orders by numeric value and leaves bytes alone", () => {
    const rows = buildResultRows(recordText("exp-3", { mp: LOW, random: HIGH }));
    const byCoverage = sortRows(rows, "coverage", "desc");
    assert.deepEqual(byCoverage.map((r) => r.recommender), ["random", "mp"]);
    const byPrecision = sortRows(rows, "precision", "desc");
    assert.deepEqual(byPrecision.map((r) => r.recommender), ["mp", "random"]);
    assert.equal(byCoverage[0].cells.coverage.raw, "1.000000");
});
test("failed rows sink in sorts and keep their detail", () => {
    const rows = buildResultRows(recordText("exp-4", { ok: LOW, broken: null }));
    const sorted = sortRows(rows, "precision", "desc");
    assert.equal(sorted[sorted.length - 1].recommender, "broken");
    assert.equal(sorted[sorted.length - 1].detail, "training timeout");
    const html = renderResultsTable(rows);
    assert.ok(html.includes("badge-failed"));
});
test("best-value highlighting picks each column maximum", () => {
    const rows = buildResultRows(recordText("exp-5", { mp: LOW, random: HIGH }));
    const best = bestValues(rows);
    assert.equal(best.coverage, 1.0);
    assert.equal(best.precision, 0.145146);
    const html = renderResultsTable(rows);
    assert.ok(html.includes('class="metric best">1.000000<'));
    assert.ok(html.includes('class="metric best">0.145146<'));
});
test("compare view groups rows per recommender across records", () => {
    const a = recordText("exp-a", { mp: LOW, random: HIGH });
    const b = recordText("exp-b", { mp: LOW, random: HIGH });
    const rows = buildCompareRows([a, b]);
    assert.deepEqual(rows.map((r) => [r.recommender, r.experimentId]), [
        ["mp", "exp-a"],
        ["mp", "exp-b"],
        ["random", "exp-a"],
        ["random", "exp-b"],
    ]);
    const html = renderResultsTable(rows, null, true);
    assert.ok(html.includes("exp-a") && html.includes("exp-b"));
});
test("lossless parser round-trips structure and keeps number bytes", () => {
    const text = '{"a": [1e-07, 2.50, "x,\\"y\\"", null, true], "b": {"c": -0.0}}';
    const tree = losslessParse(text);
    const arr = tree["a"];
    assert.equal(arr[0].raw, "1e-07");
    assert.equal(arr[1].raw, "2.50");
    assert.equal(arr[2], 'x,"y"');
    assert.equal(arr[3], null);
    assert.equal(arr[4], true);
    assert.equal(tree["b"]["c"].raw, "-0.0");
});
