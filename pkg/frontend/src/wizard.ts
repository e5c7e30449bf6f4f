/**
 * Six-stage wizard: Intervention, User Action, Signal, Mode, Script,
 * Generate. Each stage shows the retrieved artifact as an editable
 * schema-driven form; edits PUT back through the service and surface the
 * full violation list on rejection; advancing is blocked until the current
 * stage's artifact exists and validates.
 *
 * The controller keeps no authoritative state: `refresh()` rebuilds the
 * whole view from service GETs, so reloading mid-session reconstructs the
 * exact stage.
 */

import { ApiError, type ArtifactDocument, type FormSchemas, type StudioApi } from "./api.js";
import { buildArtifactForm, type FormHandle } from "./forms.js";
import { renderModeComparison } from "./modes.js";
import { EvaluationPanel } from "./panel.js";
import { renderViolations } from "./violations.js";

export interface Stage {
    stage: number;
    step: number | null;
    label: string;
}

export const STAGES: Stage[] = [
    { stage: 1, step: 1, label: "Intervention" },
    { stage: 2, step: 2, label: "User Action" },
    { stage: 3, step: 3, label: "Signal" },
    { stage: 4, step: 4, label: "Mode" },
    { stage: 5, step: 5, label: "Script" },
    { stage: 6, step: null, label: "Generate" },
];

export class WizardController {
    current = 1;
    artifacts = new Map<number, ArtifactDocument>();
    violations: import("./api.js").Violation[] = [];
    panel: EvaluationPanel | null = null;
    private form: FormHandle | null = null;
    private schemas: FormSchemas | null = null;

    constructor(
        private api: StudioApi,
        public projectId: string,
        private root: HTMLElement,
    ) {}

    /** Rebuild everything from the service; the UI holds no state of its own. */
    async refresh(): Promise<void> {
        if (this.schemas === null) {
            this.schemas = await this.api.getSchemas();
        }
        const summary = await this.api.getProject(this.projectId);
        this.artifacts.clear();
        for (let step = 1; step <= Math.min(summary.completed_steps, 5); step += 1) {
            this.artifacts.set(step, await this.api.getStep(this.projectId, step));
        }
        this.current = Math.min(summary.completed_steps + 1, 6);
        this.violations = [];
        this.render();
    }

    stepOfCurrent(): number | null {
        return STAGES[this.current - 1].step;
    }

    currentArtifact(): ArtifactDocument | null {
        const step = this.stepOfCurrent();
        if (step === null) return null;
        return this.artifacts.get(step) ?? null;
    }

    /** Run the current stage's pipeline step (no-op if it already ran). */
    async runCurrent(selection?: ArtifactDocument): Promise<void> {
        const step = this.stepOfCurrent();
        if (step === null) return;
        try {
            const artifact = await this.api.runStep(this.projectId, step, selection);
            this.artifacts.set(step, artifact);
            this.violations = [];
        } catch (error) {
            if (error instanceof ApiError) {
                this.violations = error.violations;
            } else {
                throw error;
            }
        }
        this.render();
    }

    /** PUT the edited artifact back; violations block advancing until fixed. */
    async saveEdit(document_: ArtifactDocument): Promise<boolean> {
        const step = this.stepOfCurrent();
        if (step === null) return false;
        try {
            const accepted = await this.api.putStep(this.projectId, step, document_);
            this.artifacts.set(step, accepted);
            for (let later = step + 1; later <= 5; later += 1) {
                this.artifacts.delete(later);
            }
            this.violations = [];
            this.render();
            return true;
        } catch (error) {
            if (error instanceof ApiError) {
                this.violations = error.violations;
                this.render();
                return false;
            }
            throw error;
        }
    }

    /** Save whatever is currently edited in the stage form. */
    async saveCurrentForm(): Promise<boolean> {
        if (this.form === null) return true;
        return this.saveEdit(this.form.collect());
    }

    canAdvance(): boolean {
        if (this.current >= 6) return false;
        return this.currentArtifact() !== null && this.violations.length === 0;
    }

    advance(): boolean {
        if (!this.canAdvance()) return false;
        this.current += 1;
        this.violations = [];
        this.render();
        return true;
    }

    goTo(stage: number): void {
        this.current = Math.max(1, Math.min(6, stage));
        this.violations = [];
        this.render();
    }

    render(): void {
        const doc = this.root.ownerDocument;
        this.root.innerHTML = "";
        this.form = null;
        this.panel = null;

        const nav = doc.createElement("nav");
        nav.className = "stage-nav";
        for (const stage of STAGES) {
            const button = doc.createElement("button");
            button.type = "button";
            button.textContent = `${stage.stage}. ${stage.label}`;
            button.dataset.stage = String(stage.stage);
            const done = stage.step !== null && this.artifacts.has(stage.step);
            button.className = [
                stage.stage === this.current ? "active" : "",
                done ? "done" : "",
            ].join(" ").trim();
            button.addEventListener("click", () => this.goTo(stage.stage));
            nav.appendChild(button);
        }
        this.root.appendChild(nav);

        const body = doc.createElement("div");
        body.className = "stage-body";
        body.dataset.stage = String(this.current);
        this.root.appendChild(body);

        const violationBox = doc.createElement("div");
        violationBox.className = "violations";
        this.root.appendChild(violationBox);
        renderViolations(violationBox, this.violations);

        const step = this.stepOfCurrent();
        if (step === null) {
            this.renderGenerateStage(body);
        } else {
            this.renderArtifactStage(body, step);
        }

        const controls = doc.createElement("div");
        controls.className = "stage-controls";
        const advanceButton = doc.createElement("button");
        advanceButton.type = "button";
        advanceButton.className = "advance";
        advanceButton.textContent = "Next stage";
        advanceButton.disabled = !this.canAdvance();
        advanceButton.addEventListener("click", () => void this.advance());
        controls.appendChild(advanceButton);
        this.root.appendChild(controls);
    }

    private renderArtifactStage(body: HTMLElement, step: number): void {
        const doc = body.ownerDocument;
        const artifact = this.artifacts.get(step);
        if (!artifact) {
            const runButton = doc.createElement("button");
            runButton.type = "button";
            runButton.className = "run-step";
            runButton.textContent = `Run ${STAGES[this.current - 1].label}`;
            runButton.addEventListener("click", () => void this.runCurrent());
            body.appendChild(runButton);
            return;
        }
        if (step === 4) {
            const comparison = doc.createElement("div");
            comparison.className = "mode-view";
            body.appendChild(comparison);
            renderModeComparison(comparison, artifact);
        }
        const formBox = doc.createElement("div");
        formBox.className = "form-box";
        body.appendChild(formBox);
        const schema = this.schemas?.[`step${step}`];
        if (schema) {
            this.form = buildArtifactForm(formBox, schema, artifact);
            const saveButton = doc.createElement("button");
            saveButton.type = "button";
            saveButton.className = "save-edit";
            saveButton.textContent = "Save edits";
            saveButton.addEventListener("click", () => void this.saveCurrentForm());
            body.appendChild(saveButton);
        }
    }

    private renderGenerateStage(body: HTMLElement): void {
        const doc = body.ownerDocument;
        const seeds = (this.artifacts.get(4)?.seeds as Record<string, unknown>[]) ?? [];
        const selector = doc.createElement("select");
        selector.className = "seed-selector";
        for (const seed of seeds) {
            const option = doc.createElement("option");
            option.value = String(seed.id);
            option.textContent = `${seed.mode} (${seed.id})`;
            selector.appendChild(option);
        }
        body.appendChild(selector);

        const generateButton = doc.createElement("button");
        generateButton.type = "button";
        generateButton.className = "generate";
        generateButton.textContent = "Generate video";
        body.appendChild(generateButton);

        const traceInput = doc.createElement("textarea");
        traceInput.className = "trace-input";
        traceInput.placeholder = "paste the segmentation trace JSON array here";
        body.appendChild(traceInput);

        const evaluateButton = doc.createElement("button");
        evaluateButton.type = "button";
        evaluateButton.className = "evaluate";
        evaluateButton.textContent = "Evaluate video";
        body.appendChild(evaluateButton);

        const panelBox = doc.createElement("div");
        panelBox.className = "panel-box";
        body.appendChild(panelBox);
        this.panel = new EvaluationPanel(this.api, this.projectId, panelBox);

        generateButton.addEventListener("click", () => {
            void this.panel?.generateFor(selector.value);
        });
        evaluateButton.addEventListener("click", () => {
            const video = this.panel?.video;
            if (!video) return;
            const trace = traceInput.value.trim() === ""
                ? undefined
                : JSON.parse(traceInput.value);
            void this.panel?.evaluate(video.id, trace);
        });
    }
}
