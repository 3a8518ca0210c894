// Live experiment progress: per-recommender phase badges built from the
// record, polled until the record is terminal. A failed recommender shows
// its detail without touching the other rows.
import { escapeHtml } from "./results.js";
export function buildProgressModel(record) {
    const rows = record.config.recommender_ids.map((rid) => {
        const entry = record.per_recommender[rid];
        return {
            recommender: rid,
            status: entry ? entry.status : "pending",
            detail: entry ? entry.detail : null,
            trainSeconds: entry ? entry.train_seconds : null,
            recommendSeconds: entry ? entry.recommend_seconds : null,
        };
    });
    return {
        id: record.id,
        status: record.status,
        failureDetail: record.failure_detail,
        terminal: record.status === "done" || record.status === "failed",
        rows,
    };
}
function seconds(value) {
    return value === null ? "" : `${value.toFixed(1)}s`;
}
export function renderProgress(model) {
    const rows = model.rows
        .map((row) => {
        const detail = row.detail
            ? `<span class="detail">${escapeHtml(row.detail)}</span>`
            : "";
        return `<li class="progress-row">
  <span class="rec-name">${escapeHtml(row.recommender)}</span>
  <span class="badge badge-${escapeHtml(row.status)}">${escapeHtml(row.status)}</span>
  <span class="timing">${seconds(row.trainSeconds)} ${seconds(row.recommendSeconds)}</span>
  ${detail}
</li>`;
    })
        .join("\n");
    const failure = model.failureDetail
        ? `<p class="error">${escapeHtml(model.failureDetail)}</p>`
        : "";
    return `<section class="progress">
<h2>Experiment ${escapeHtml(model.id)}
  <span class="badge badge-${escapeHtml(model.status)}">${escapeHtml(model.status)}</span></h2>
${failure}
<ul>${rows}</ul>
</section>`;
}
/**
 * Poll `fn` every `intervalMs`, one request in flight at a time, until it
 * returns true (terminal) or the handle is stopped. The timer dependency is
 * injectable so tests can pump the loop synchronously.
 */
export function startPolling(fn, intervalMs, schedule = (cb, ms) => setTimeout(cb, ms)) {
    let stopped = false;
    const tick = () => {
        if (stopped)
            return;
        void fn()
            .then((terminal) => {
            if (!stopped && !terminal)
                schedule(tick, intervalMs);
        })
            .catch(() => {
            if (!stopped)
                schedule(tick, intervalMs);
        });
    };
    tick();
    return {
        stop() {
            stopped = true;
        },
    };
}
