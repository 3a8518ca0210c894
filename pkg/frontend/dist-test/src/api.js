// Thin client over the evaluator's public API. The fetch dependency is
// injectable for tests; responses that power the results view are kept as
// raw text so metric bytes reach the table untouched.
export class ApiError extends Error {
    status;
    violations;
    constructor(message, status, violations = []) {
        super(message);
        this.status = status;
        this.violations = violations;
    }
}
export class ApiClient {
    base;
    fetchImpl;
    constructor(base = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.base = base;
        this.fetchImpl = fetchImpl;
    }
    async get(path) {
        const resp = await this.fetchImpl(this.base + path);
        if (!resp.ok) {
            throw new ApiError(`GET ${path} failed with ${resp.status}`, resp.status);
        }
        return resp;
    }
    async datasets() {
        const body = (await (await this.get("/datasets")).json());
        return body.datasets;
    }
    async recommenders() {
        const body = (await (await this.get("/recommenders")).json());
        return body.recommenders;
    }
    async listExperiments(params = {}) {
        const query = new URLSearchParams();
        if (params.status)
            query.set("status", params.status);
        if (params.dataset)
            query.set("dataset", params.dataset);
        if (params.page)
            query.set("page", String(params.page));
        const suffix = query.size > 0 ? `?${query.toString()}` : "";
        return (await (await this.get(`/experiments${suffix}`)).json());
    }
    async experiment(id) {
        return (await (await this.get(`/experiments/${id}`)).json());
    }
    /** Raw record text for byte-faithful metric display. */
    async experimentText(id) {
        return (await this.get(`/experiments/${id}`)).text();
    }
    async submit(config) {
        const resp = await this.fetchImpl(`${this.base}/experiments`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(config),
        });
        const body = (await resp.json());
        if (resp.status !== 201 || !body.id) {
            throw new ApiError("experiment rejected", resp.status, body.violations ?? ["submission failed"]);
        }
        return body.id;
    }
}
