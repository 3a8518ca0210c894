// Client-side mirror of the evaluator's configuration validation. The rules
// and the "field: message" shape must stay in lockstep with the server;
// tests/fixtures/config_cases.json (shared with the server's test suite)
// keeps both sides honest.
export const SPLIT_METHODS = ["random", "timestamp"];
function isNumber(value) {
    return typeof value === "number" && !Number.isNaN(value);
}
export function validateConfig(config) {
    const violations = [];
    if (typeof config.dataset_id !== "string" || config.dataset_id === "") {
        violations.push("dataset_id: must be a non-empty identifier");
    }
    if (!SPLIT_METHODS.includes(config.split_method)) {
        violations.push(`split_method: must be one of ${SPLIT_METHODS.join(", ")}; got ${JSON.stringify(config.split_method)}`);
    }
    if (!isNumber(config.test_fraction) || !(config.test_fraction > 0 && config.test_fraction < 1)) {
        violations.push(`test_fraction: must lie strictly between 0 and 1; got ${JSON.stringify(config.test_fraction)}`);
    }
    if (!isNumber(config.k) || !Number.isInteger(config.k) || config.k < 1) {
        violations.push(`k: must be a positive integer; got ${JSON.stringify(config.k)}`);
    }
    if (!isNumber(config.rating_threshold) || !Number.isFinite(config.rating_threshold)) {
        violations.push(`rating_threshold: must be a finite number; got ${JSON.stringify(config.rating_threshold)}`);
    }
    if (!Array.isArray(config.recommender_ids) || config.recommender_ids.length === 0) {
        violations.push("recommender_ids: at least one recommender must be selected");
    }
    else {
        const seen = new Set();
        const duplicates = new Set();
        for (const rid of config.recommender_ids) {
            if (seen.has(rid))
                duplicates.add(rid);
            seen.add(rid);
        }
        if (duplicates.size > 0) {
            violations.push(`recommender_ids: duplicate entries ${JSON.stringify([...duplicates].sort())}`);
        }
        if (config.recommender_ids.some((rid) => typeof rid !== "string" || rid === "")) {
            violations.push("recommender_ids: identifiers must be non-empty strings");
        }
    }
    if (!isNumber(config.seed) || !Number.isInteger(config.seed) || config.seed < 0) {
        violations.push(`seed: must be a non-negative integer; got ${JSON.stringify(config.seed)}`);
    }
    return violations;
}
/**
 * Rules that need dataset metadata, enforced before submission so the
 * evaluator never even sees the doomed experiment: a timestamp split
 * cannot run on a dataset without timestamps (HetRec LastFM).
 */
export function datasetProblems(config, dataset) {
    if (!dataset)
        return [];
    if (config.split_method === "timestamp" && !dataset.has_timestamps) {
        return [
            `split_method: dataset ${dataset.id} carries no timestamps; pick the random split`,
        ];
    }
    return [];
}
