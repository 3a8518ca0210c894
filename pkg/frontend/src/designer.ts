// The experiment designer form: registered datasets and recommenders with
// reachability badges, published defaults prefilled, and submission gated
// on the exact validation rules the evaluator enforces.

import { escapeHtml } from "./results.js";
import type { DatasetInfo, ExperimentConfig, RecommenderInfo } from "./types.js";
import { datasetProblems, validateConfig } from "./validation.js";

export interface DesignerState {
  dataset_id: string;
  split_method: string;
  test_fraction: string;
  k: string;
  rating_threshold: string;
  seed: string;
  selected: string[];
}

export const DESIGNER_DEFAULTS: Omit<DesignerState, "dataset_id" | "selected"> = {
  split_method: "random",
  test_fraction: "0.2",
  k: "10",
  rating_threshold: "3",
  seed: "0",
};

export function initialState(datasets: DatasetInfo[]): DesignerState {
  return {
    dataset_id: datasets[0]?.id ?? "",
    selected: [],
    ...DESIGNER_DEFAULTS,
  };
}

function parseNumber(text: string): number {
  return text.trim() === "" ? Number.NaN : Number(text);
}

/** The config the form would submit; invalid fields become NaN and get flagged. */
export function toConfig(state: DesignerState): ExperimentConfig {
  return {
    dataset_id: state.dataset_id,
    split_method: state.split_method,
    test_fraction: parseNumber(state.test_fraction),
    k: parseNumber(state.k),
    rating_threshold: parseNumber(state.rating_threshold),
    recommender_ids: [...state.selected],
    seed: parseNumber(state.seed),
  };
}

export function designerProblems(
  state: DesignerState,
  datasets: DatasetInfo[],
): string[] {
  const config = toConfig(state);
  const dataset = datasets.find((d) => d.id === state.dataset_id);
  return [...validateConfig(config), ...datasetProblems(config, dataset)];
}

export function submitDisabled(state: DesignerState, datasets: DatasetInfo[]): boolean {
  return designerProblems(state, datasets).length > 0;
}

function field(name: string, label: string, value: string, hint: string): string {
  return `<label class="field">
  <span>${label}</span>
  <input name="${name}" value="${escapeHtml(value)}" data-field="${name}" />
  <small>${hint}</small>
</label>`;
}

export function renderDesigner(
  state: DesignerState,
  datasets: DatasetInfo[],
  recommenders: RecommenderInfo[],
): string {
  const datasetOptions = datasets
    .map(
      (d) =>
        `<option value="${escapeHtml(d.id)}"${d.id === state.dataset_id ? " selected" : ""}>` +
        `${escapeHtml(d.id)} (${escapeHtml(d.format)})</option>`,
    )
    .join("");
  const splitOptions = ["random", "timestamp"]
    .map(
      (m) =>
        `<option value="${m}"${m === state.split_method ? " selected" : ""}>${m}</option>`,
    )
    .join("");
  const recommenderBoxes = recommenders
    .map((rec) => {
      const checked = state.selected.includes(rec.id) ? " checked" : "";
      const badge = rec.reachable
        ? '<span class="badge badge-ready">reachable</span>'
        : '<span class="badge badge-failed">unreachable</span>';
      return `<label class="rec-box">
  <input type="checkbox" data-recommender="${escapeHtml(rec.id)}"${checked} />
  ${escapeHtml(rec.id)} ${badge}
</label>`;
    })
    .join("\n");
  const problems = designerProblems(state, datasets);
  const problemList = problems
    .map((problem) => `<li class="error">${escapeHtml(problem)}</li>`)
    .join("");
  const disabled = problems.length > 0 ? " disabled" : "";
  return `<section class="designer">
<h2>Design an experiment</h2>
<label class="field"><span>Dataset</span>
  <select data-field="dataset_id">${datasetOptions}</select>
</label>
<label class="field"><span>Split method</span>
  <select data-field="split_method">${splitOptions}</select>
</label>
${field("test_fraction", "Test set fraction", state.test_fraction, "share of ratings held out, strictly between 0 and 1")}
${field("k", "List length k", state.k, "length of each recommendation list")}
${field("rating_threshold", "Rating threshold", state.rating_threshold, "values strictly above count as likes")}
${field("seed", "Split seed", state.seed, "makes the random split reproducible")}
<fieldset class="recommenders"><legend>Recommenders</legend>
${recommenderBoxes || "<p>No recommenders registered.</p>"}
</fieldset>
<ul class="problems">${problemList}</ul>
<button data-action="submit"${disabled}>Run experiment</button>
</section>`;
}
