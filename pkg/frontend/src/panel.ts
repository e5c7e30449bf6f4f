/**
 * Generation and evaluation panel: triggers video generation, polls the
 * job with backoff, and renders the fused score next to the video. The
 * score fields are rendered from the exact values the service returned;
 * the raw response text is kept on the panel for byte-level comparison.
 */

import type { StudioApi, VideoRecord, VideoScore } from "./api.js";

const SCORE_FIELDS: (keyof VideoScore)[] = [
    "overall", "helpfulness", "tone", "latency_score", "latency_error",
    "safety_criticality", "observability", "over_alert", "delta_t",
    "gate_status", "alignment_score", "mode",
];

function sleep(ms: number): Promise<void> {
    return new Promise((resolve) => setTimeout(resolve, ms));
}

export class EvaluationPanel {
    root: HTMLElement;
    video: VideoRecord | null = null;
    score: VideoScore | null = null;
    /** Exact evaluate response body, for byte-level comparison in tests. */
    rawScore: string | null = null;

    constructor(
        private api: StudioApi,
        private projectId: string,
        container: HTMLElement,
    ) {
        this.root = container.ownerDocument.createElement("section");
        this.root.className = "evaluation-panel";
        container.appendChild(this.root);
        this.render();
    }

    async generateFor(seedId: string, baseDelayMs = 100, maxAttempts = 20): Promise<VideoRecord> {
        let record = await this.api.generate(this.projectId, seedId);
        let delay = baseDelayMs;
        let attempts = 0;
        while (record.status === "pending" && attempts < maxAttempts) {
            await sleep(delay);
            delay = Math.min(delay * 2, 5_000);
            attempts += 1;
            const listing = await this.api.listVideos(this.projectId);
            const updated = listing.videos.find((video) => video.id === record.id);
            if (updated) record = updated;
        }
        this.video = record;
        this.render();
        return record;
    }

    async evaluate(videoId: string, trace?: unknown): Promise<VideoScore> {
        const { score, raw } = await this.api.evaluateRaw(this.projectId, {
            video_id: videoId,
            trace,
        });
        this.score = score;
        this.rawScore = raw;
        this.render();
        return score;
    }

    private render(): void {
        const doc = this.root.ownerDocument;
        this.root.innerHTML = "";

        const videoCard = doc.createElement("div");
        videoCard.className = "video-card";
        if (this.video) {
            videoCard.dataset.videoId = this.video.id;
            videoCard.dataset.status = this.video.status;
            const title = doc.createElement("h3");
            title.textContent = `video ${this.video.id} (${this.video.status})`;
            videoCard.appendChild(title);
            const media = doc.createElement("p");
            media.className = "media-refs";
            media.textContent =
                `first frame: ${this.video.first_frame_ref ?? "-"} / ` +
                `video: ${this.video.video_ref ?? "-"}`;
            videoCard.appendChild(media);
            if (this.video.error) {
                const error = doc.createElement("p");
                error.className = "video-error";
                error.textContent = this.video.error;
                videoCard.appendChild(error);
            }
        } else {
            videoCard.textContent = "no video generated yet";
        }
        this.root.appendChild(videoCard);

        const scoreCard = doc.createElement("div");
        scoreCard.className = "score-card";
        if (this.score) {
            if (this.rawScore) scoreCard.dataset.raw = this.rawScore;
            const table = doc.createElement("table");
            table.className = "score-table";
            for (const field of SCORE_FIELDS) {
                const row = doc.createElement("tr");
                const name = doc.createElement("th");
                name.textContent = field;
                const value = doc.createElement("td");
                value.dataset.field = field;
                value.textContent = JSON.stringify(this.score[field]);
                row.appendChild(name);
                row.appendChild(value);
                table.appendChild(row);
            }
            scoreCard.appendChild(table);
        } else {
            scoreCard.textContent = "not evaluated yet";
        }
        this.root.appendChild(scoreCard);
    }
}
