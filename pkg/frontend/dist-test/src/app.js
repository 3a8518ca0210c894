// Single-page shell: hash routing between the designer, the experiment
// list, per-experiment progress/results, and comparison. One in-flight
// poll per view, 2 s interval, and the store as the only source of truth.
import { ApiClient, ApiError } from "./api.js";
import { designerProblems, initialState, renderDesigner, toConfig, } from "./designer.js";
import { buildProgressModel, renderProgress, startPolling } from "./progress.js";
import { buildCompareRows, buildResultRows, escapeHtml, renderConfigPanel, renderResultsTable, } from "./results.js";
const POLL_INTERVAL_MS = 2000;
const api = new ApiClient("");
const root = document.getElementById("app");
let activePoll = null;
function stopPolling() {
    if (activePoll) {
        activePoll.stop();
        activePoll = null;
    }
}
function banner(message) {
    return `<div class="banner error">${escapeHtml(message)}
  <button data-action="retry">Retry</button></div>`;
}
function nav() {
    return `<nav>
  <a href="#/designer">New experiment</a>
  <a href="#/experiments">Experiments</a>
</nav>`;
}
// --- designer view ---------------------------------------------------------
async function showDesigner() {
    stopPolling();
    let datasets;
    let recommenders;
    try {
        [datasets, recommenders] = await Promise.all([api.datasets(), api.recommenders()]);
    }
    catch {
        root.innerHTML = nav() + banner("evaluator API unreachable");
        return;
    }
    let state = initialState(datasets);
    const draw = () => {
        root.innerHTML = nav() + renderDesigner(state, datasets, recommenders);
        wire();
    };
    const wire = () => {
        for (const input of root.querySelectorAll("[data-field]")) {
            input.addEventListener("change", () => {
                state = { ...state, [input.dataset.field]: input.value };
                draw();
            });
        }
        for (const box of root.querySelectorAll("[data-recommender]")) {
            box.addEventListener("change", () => {
                const rid = box.dataset.recommender;
                const selected = box.checked
                    ? [...state.selected, rid]
                    : state.selected.filter((existing) => existing !== rid);
                state = { ...state, selected };
                draw();
            });
        }
        root.querySelector('[data-action="submit"]')?.addEventListener("click", async () => {
            if (designerProblems(state, datasets).length > 0)
                return;
            try {
                const id = await api.submit(toConfig(state));
                window.location.hash = `#/experiments/${id}`;
            }
            catch (error) {
                const messages = error instanceof ApiError ? error.violations : ["submission failed"];
                root.querySelector(".problems").innerHTML = messages
                    .map((message) => `<li class="error">${escapeHtml(message)}</li>`)
                    .join("");
            }
        });
    };
    draw();
}
// --- experiment list ----------------------------------------------------------
async function showList(statusFilter) {
    stopPolling();
    let listing;
    try {
        listing = await api.listExperiments(statusFilter ? { status: statusFilter } : {});
    }
    catch {
        root.innerHTML = nav() + banner("evaluator API unreachable");
        return;
    }
    const filters = ["", "queued", "running", "done", "failed"]
        .map((status) => {
        const label = status === "" ? "all" : status;
        const current = status === statusFilter ? " class=\"current\"" : "";
        return `<a href="#/experiments${status ? `?status=${status}` : ""}"${current}>${label}</a>`;
    })
        .join(" ");
    const rows = listing.experiments
        .map((summary) => `<tr>
  <td><a href="#/experiments/${escapeHtml(summary.id)}">${escapeHtml(summary.id)}</a></td>
  <td>${escapeHtml(summary.dataset_id)}</td>
  <td>${escapeHtml(summary.split_method)}</td>
  <td>${summary.k}</td>
  <td><span class="badge badge-${escapeHtml(summary.status)}">${escapeHtml(summary.status)}</span></td>
  <td>${summary.recommender_ids.map(escapeHtml).join(", ")}</td>
</tr>`)
        .join("");
    root.innerHTML = `${nav()}
<section>
<h2>Experiments <small>(${listing.total})</small></h2>
<p class="filters">${filters}</p>
<table class="listing">
<thead><tr><th>Id</th><th>Dataset</th><th>Split</th><th>k</th><th>Status</th><th>Recommenders</th></tr></thead>
<tbody>${rows}</tbody>
</table>
</section>`;
}
// --- progress and results -------------------------------------------------------
async function showExperiment(id, sortSpec) {
    stopPolling();
    const render = async () => {
        let text;
        try {
            text = await api.experimentText(id);
        }
        catch (error) {
            root.innerHTML =
                nav() +
                    banner(error instanceof ApiError && error.status === 404
                        ? `no such experiment: ${id}`
                        : "evaluator API unreachable");
            return false;
        }
        const record = JSON.parse(text);
        const model = buildProgressModel(record);
        if (!model.terminal || record.status === "failed") {
            root.innerHTML = nav() + renderProgress(model);
            return model.terminal;
        }
        const [column, direction] = sortSpec ? sortSpec.split(":") : [null, null];
        const sort = column
            ? { column: column, direction: (direction ?? "desc") }
            : null;
        const rows = buildResultRows(text);
        const download = `data:application/json;charset=utf-8,${encodeURIComponent(text)}`;
        root.innerHTML = `${nav()}
<section>
<h2>Experiment ${escapeHtml(id)} <span class="badge badge-done">done</span></h2>
${renderResultsTable(rows, sort)}
<h3>Configuration</h3>
${renderConfigPanel(text)}
<p><a download="${escapeHtml(id)}.json" href="${download}">Download raw record</a></p>
</section>`;
        for (const th of root.querySelectorAll("th[data-sort]")) {
            th.addEventListener("click", () => {
                const next = th.dataset.sort;
                const flipped = sort && sort.column === next && sort.direction === "desc" ? "asc" : "desc";
                window.location.hash = `#/experiments/${id}?sort=${next}:${flipped}`;
            });
        }
        return true;
    };
    const terminal = await render();
    if (!terminal) {
        activePoll = startPolling(render, POLL_INTERVAL_MS);
    }
}
async function showCompare(idsParam) {
    stopPolling();
    const ids = idsParam.split(",").filter((value) => value.length > 0);
    try {
        const texts = await Promise.all(ids.map((id) => api.experimentText(id)));
        const rows = buildCompareRows(texts);
        root.innerHTML = `${nav()}
<section>
<h2>Compare ${ids.map(escapeHtml).join(" vs ")}</h2>
${renderResultsTable(rows, null, true)}
</section>`;
    }
    catch {
        root.innerHTML = nav() + banner("could not load all experiments");
    }
}
// --- routing ------------------------------------------------------------------
async function route() {
    const hash = window.location.hash || "#/designer";
    const [path, queryText] = hash.slice(1).split("?");
    const query = new URLSearchParams(queryText ?? "");
    const parts = path.split("/").filter((part) => part.length > 0);
    if (parts[0] === "designer" || parts.length === 0) {
        await showDesigner();
    }
    else if (parts[0] === "experiments" && parts.length === 1) {
        await showList(query.get("status") ?? "");
    }
    else if (parts[0] === "experiments" && parts.length === 2) {
        await showExperiment(parts[1], query.get("sort") ?? "");
    }
    else if (parts[0] === "compare") {
        await showCompare(query.get("ids") ?? "");
    }
    else {
        root.innerHTML = nav() + banner(`unknown page: ${path}`);
    }
}
window.addEventListener("hashchange", () => void route());
document.addEventListener("click", (event) => {
    const target = event.target;
    if (target.dataset.action === "retry")
        void route();
});
void route();
