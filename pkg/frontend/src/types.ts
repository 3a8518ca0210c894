// Payload shapes of the evaluator's public API. The console displays these
// verbatim; it never recomputes a metric.

export interface ExperimentConfig {
  dataset_id: string;
  split_method: string;
  test_fraction: number;
  k: number;
  rating_threshold: number;
  recommender_ids: string[];
  seed: number;
}

export type MetricName =
  | "coverage"
  | "precision"
  | "recall"
  | "ndcg"
  | "novelty"
  | "diversity"
  | "serendipity";

/** Column order of the published result tables. */
export const METRIC_COLUMNS: readonly MetricName[] = [
  "coverage",
  "precision",
  "recall",
  "ndcg",
  "novelty",
  "diversity",
  "serendipity",
];

export type MetricsDict = Record<MetricName, number | null>;

export interface RecommenderEntry {
  status: string;
  metrics: MetricsDict | null;
  violations: Record<string, number>;
  train_seconds: number | null;
  recommend_seconds: number | null;
  detail: string | null;
}

export interface ExperimentRecord {
  id: string;
  config: ExperimentConfig;
  status: string;
  realized_split_sizes: { train: number; test: number } | null;
  per_recommender: Record<string, RecommenderEntry>;
  created_at: string;
  finished_at: string | null;
  failure_detail: string | null;
  digest: string | null;
}

export interface ExperimentSummary {
  id: string;
  dataset_id: string;
  split_method: string;
  k: number;
  status: string;
  recommender_ids: string[];
  created_at: string;
}

export interface ExperimentListing {
  experiments: ExperimentSummary[];
  page: number;
  page_size: number;
  total: number;
}

export interface DatasetInfo {
  id: string;
  format: string;
  path: string;
  has_timestamps: boolean;
}

export interface RecommenderInfo {
  id: string;
  base_uri: string;
  reachable: boolean;
}
