// Thin client over the evaluator's public API. The fetch dependency is
// injectable for tests; responses that power the results view are kept as
// raw text so metric bytes reach the table untouched.

import type {
  DatasetInfo,
  ExperimentConfig,
  ExperimentListing,
  ExperimentRecord,
  RecommenderInfo,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly violations: string[] = [],
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get(path: string): Promise<Response> {
    const resp = await this.fetchImpl(this.base + path);
    if (!resp.ok) {
      throw new ApiError(`GET ${path} failed with ${resp.status}`, resp.status);
    }
    return resp;
  }

  async datasets(): Promise<DatasetInfo[]> {
    const body = (await (await this.get("/datasets")).json()) as { datasets: DatasetInfo[] };
    return body.datasets;
  }

  async recommenders(): Promise<RecommenderInfo[]> {
    const body = (await (await this.get("/recommenders")).json()) as {
      recommenders: RecommenderInfo[];
    };
    return body.recommenders;
  }

  async listExperiments(params: { status?: string; dataset?: string; page?: number } = {}): Promise<ExperimentListing> {
    const query = new URLSearchParams();
    if (params.status) query.set("status", params.status);
    if (params.dataset) query.set("dataset", params.dataset);
    if (params.page) query.set("page", String(params.page));
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    return (await (await this.get(`/experiments${suffix}`)).json()) as ExperimentListing;
  }

  async experiment(id: string): Promise<ExperimentRecord> {
    return (await (await this.get(`/experiments/${id}`)).json()) as ExperimentRecord;
  }

  /** Raw record text for byte-faithful metric display. */
  async experimentText(id: string): Promise<string> {
    return (await this.get(`/experiments/${id}`)).text();
  }

  async submit(config: ExperimentConfig): Promise<string> {
    const resp = await this.fetchImpl(`${this.base}/experiments`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
    const body = (await resp.json()) as { id?: string; violations?: string[] };
    if (resp.status !== 201 || !body.id) {
      throw new ApiError(
        "experiment rejected",
        resp.status,
        body.violations ?? ["submission failed"],
      );
    }
    return body.id;
  }
}
