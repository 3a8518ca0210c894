// Result tables: one row per recommender, the seven metric columns in the
// published order, sortable, with the best value of each column
// highlighted. Cell text comes from the record's raw bytes (lossless
// parse), never from re-serialized numbers.

import { losslessGet, losslessParse, RawNumber, type LosslessValue } from "./lossless.js";
import { METRIC_COLUMNS, type MetricName } from "./types.js";

export interface MetricCell {
  /** Exact byte content of the value in the record payload. */
  raw: string;
  /** Numeric value for sorting and best-of highlighting; null if absent. */
  value: number | null;
}

export interface ResultRow {
  experimentId: string;
  recommender: string;
  status: string;
  detail: string | null;
  cells: Record<MetricName, MetricCell>;
}

const ABSENT: MetricCell = { raw: "–", value: null };

/** Build display rows straight from the raw response body of GET /experiments/{id}. */
export function buildResultRows(payloadText: string): ResultRow[] {
  const tree = losslessParse(payloadText);
  const id = losslessGet(tree, ["id"]);
  const order = losslessGet(tree, ["config", "recommender_ids"]);
  if (typeof id !== "string" || !Array.isArray(order)) {
    throw new Error("malformed experiment record");
  }
  const rows: ResultRow[] = [];
  for (const entry of order) {
    if (typeof entry !== "string") continue;
    const status = losslessGet(tree, ["per_recommender", entry, "status"]);
    const detail = losslessGet(tree, ["per_recommender", entry, "detail"]);
    const cells = {} as Record<MetricName, MetricCell>;
    for (const column of METRIC_COLUMNS) {
      const value = losslessGet(tree, ["per_recommender", entry, "metrics", column]);
      cells[column] =
        value instanceof RawNumber ? { raw: value.raw, value: value.value } : ABSENT;
    }
    rows.push({
      experimentId: id,
      recommender: entry,
      status: typeof status === "string" ? status : "unknown",
      detail: typeof detail === "string" ? detail : null,
      cells,
    });
  }
  return rows;
}

export type SortDirection = "asc" | "desc";

export function sortRows(
  rows: ResultRow[],
  column: MetricName | "recommender",
  direction: SortDirection,
): ResultRow[] {
  const sign = direction === "asc" ? 1 : -1;
  return [...rows].sort((a, b) => {
    if (column === "recommender") {
      return sign * a.recommender.localeCompare(b.recommender);
    }
    const av = a.cells[column].value;
    const bv = b.cells[column].value;
    if (av === null && bv === null) return 0;
    if (av === null) return 1; // absent values sink regardless of direction
    if (bv === null) return -1;
    return sign * (av - bv);
  });
}

/** The best (maximum) numeric value per column, for highlighting. */
export function bestValues(rows: ResultRow[]): Partial<Record<MetricName, number>> {
  const best: Partial<Record<MetricName, number>> = {};
  for (const column of METRIC_COLUMNS) {
    for (const row of rows) {
      const value = row.cells[column].value;
      if (value === null) continue;
      const current = best[column];
      if (current === undefined || value > current) best[column] = value;
    }
  }
  return best;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export const COLUMN_LABELS: Record<MetricName, string> = {
  coverage: "Coverage",
  precision: "Precision",
  recall: "Recall",
  ndcg: "NDCG",
  novelty: "Novelty",
  diversity: "Diversity",
  serendipity: "Serendipity",
};

export function renderResultsTable(
  rows: ResultRow[],
  sort: { column: MetricName | "recommender"; direction: SortDirection } | null = null,
  groupByExperiment = false,
): string {
  const ordered = sort ? sortRows(rows, sort.column, sort.direction) : rows;
  const best = bestValues(ordered);
  const header = METRIC_COLUMNS.map((column) => {
    const marker =
      sort && sort.column === column ? (sort.direction === "asc" ? " ▲" : " ▼") : "";
    return `<th data-sort="${column}">${COLUMN_LABELS[column]}${marker}</th>`;
  }).join("");
  const experimentColumn = groupByExperiment ? "<th>Experiment</th>" : "";
  const body = ordered
    .map((row) => {
      const cells = METRIC_COLUMNS.map((column) => {
        const cell = row.cells[column];
        const isBest =
          cell.value !== null && best[column] !== undefined && cell.value === best[column];
        return `<td class="metric${isBest ? " best" : ""}">${escapeHtml(cell.raw)}</td>`;
      }).join("");
      const experimentCell = groupByExperiment
        ? `<td class="exp-id">${escapeHtml(row.experimentId)}</td>`
        : "";
      const name = row.status === "done"
        ? escapeHtml(row.recommender)
        : `${escapeHtml(row.recommender)} <span class="badge badge-${escapeHtml(row.status)}">${escapeHtml(row.status)}</span>`;
      return `<tr>${experimentCell}<td class="rec-name">${name}</td>${cells}</tr>`;
    })
    .join("");
  return `<table class="results">
<thead><tr>${experimentColumn}<th data-sort="recommender">Recommender</th>${header}</tr></thead>
<tbody>${body}</tbody>
</table>`;
}

/** Side-by-side comparison: rows of several records grouped by recommender. */
export function buildCompareRows(payloadTexts: string[]): ResultRow[] {
  const rows = payloadTexts.flatMap((text) => buildResultRows(text));
  return [...rows].sort(
    (a, b) =>
      a.recommender.localeCompare(b.recommender) ||
      a.experimentId.localeCompare(b.experimentId),
  );
}

export function renderConfigPanel(payloadText: string): string {
  const tree = losslessParse(payloadText);
  const config = losslessGet(tree, ["config"]);
  if (config === undefined || config === null || config instanceof RawNumber) return "";
  const renderValue = (value: LosslessValue): string => {
    if (value instanceof RawNumber) return value.raw;
    if (Array.isArray(value)) return value.map(renderValue).join(", ");
    return JSON.stringify(value);
  };
  const entries = Object.entries(config as { [key: string]: LosslessValue })
    .map(
      ([key, value]) =>
        `<div class="config-item"><span class="config-key">${escapeHtml(key)}</span>` +
        `<span class="config-value">${escapeHtml(renderValue(value))}</span></div>`,
    )
    .join("");
  return `<div class="config-panel">${entries}</div>`;
}
