// Payload shapes of the evaluator's public API. The console displays these
// verbatim; it never recomputes a metric.
/** Column order of the published result tables. */
export const METRIC_COLUMNS = [
    "coverage",
    "precision",
    "recall",
    "ndcg",
    "novelty",
    "diversity",
    "serendipity",
];
