/**
 * Typed client for the studio's backing HTTP service.
 *
 * The client is the only place the frontend talks to the network; every
 * view reconstructs itself from GETs through here, so the UI never holds
 * authoritative state.
 */

export interface Violation {
    code: string;
    message: string;
    field: string | null;
}

export class ApiError extends Error {
    constructor(
        public status: number,
        message: string,
        public violations: Violation[] = [],
    ) {
        super(message);
        this.name = "ApiError";
    }
}

export interface ScenarioInput {
    title: string;
    description: string;
    environment: string;
    hazard_category: string;
}

export interface ProjectSummary {
    project_id: string;
    scenario: ScenarioInput & { id: string };
    completed_steps: number;
    videos: string[];
}

export interface FieldSchema {
    name: string;
    type: string;
    values?: string[];
    required?: boolean;
    readonly?: boolean;
    nullable?: boolean;
    kinds?: string[];
}

export interface StepSchema {
    artifact: string;
    item_fields: FieldSchema[];
}

export type FormSchemas = Record<string, StepSchema>;

export type ArtifactDocument = Record<string, unknown>;

export interface VideoRecord {
    id: string;
    script_ref: string;
    first_frame_ref: string | null;
    video_ref: string | null;
    duration_s: number;
    alignment_score: number | null;
    status: "pending" | "rendered" | "failed";
    error: string | null;
}

export interface VideoScore {
    video_id: string;
    mode: string;
    alignment_score: number | null;
    gate_status: "valid" | "excluded";
    gate_reason: string | null;
    helpfulness: number;
    tone: number;
    latency_score: number;
    latency_error: number;
    safety_criticality: number;
    observability: number;
    over_alert: boolean;
    delta_t: number | null;
    overall: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudioApi {
    private fetchImpl: FetchLike;

    constructor(public baseUrl: string, fetchImpl?: FetchLike) {
        this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
    }

    private async requestText(method: string, path: string, body?: unknown): Promise<string> {
        const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
            method,
            headers: body === undefined ? {} : { "content-type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        const text = await response.text();
        if (!response.ok) {
            let message = `${method} ${path} failed with ${response.status}`;
            let violations: Violation[] = [];
            try {
                const detail = JSON.parse(text)?.detail;
                if (detail?.error) message = String(detail.error);
                if (Array.isArray(detail?.violations)) violations = detail.violations;
            } catch {
                // non-JSON error body; keep the generic message
            }
            throw new ApiError(response.status, message, violations);
        }
        return text;
    }

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        return JSON.parse(await this.requestText(method, path, body)) as T;
    }

    createProject(scenario: ScenarioInput): Promise<{ project_id: string }> {
        return this.request("POST", "/projects", { scenario });
    }

    getProject(projectId: string): Promise<ProjectSummary> {
        return this.request("GET", `/projects/${projectId}`);
    }

    getSchemas(): Promise<FormSchemas> {
        return this.request("GET", "/schemas");
    }

    runStep(projectId: string, step: number, body?: ArtifactDocument): Promise<ArtifactDocument> {
        return this.request("POST", `/projects/${projectId}/steps/${step}`, body ?? {});
    }

    getStep(projectId: string, step: number): Promise<ArtifactDocument> {
        return this.request("GET", `/projects/${projectId}/steps/${step}`);
    }

    putStep(projectId: string, step: number, document: ArtifactDocument): Promise<ArtifactDocument> {
        return this.request("PUT", `/projects/${projectId}/steps/${step}`, document);
    }

    generate(projectId: string, seedId: string): Promise<VideoRecord> {
        return this.request("POST", `/projects/${projectId}/generate`, { seed_id: seedId });
    }

    listVideos(projectId: string): Promise<{ videos: VideoRecord[] }> {
        return this.request("GET", `/projects/${projectId}/videos`);
    }

    /** Returns both the parsed score and the exact response text so the
     *  panel can render values that match the service byte for byte. */
    async evaluateRaw(
        projectId: string,
        body: { video_id: string; trace?: unknown },
    ): Promise<{ score: VideoScore; raw: string }> {
        const raw = await this.requestText("POST", `/projects/${projectId}/evaluate`, body);
        return { score: JSON.parse(raw) as VideoScore, raw };
    }

    report(projectId: string): Promise<{ rows: Record<string, unknown>[] }> {
        return this.request("GET", `/projects/${projectId}/report`);
    }
}
