/** Studio bootstrap: scenario intake, then the six-stage wizard. */

import { StudioApi, type ScenarioInput } from "./api.js";
import { WizardController } from "./wizard.js";

const SCENARIO_FIELDS: (keyof ScenarioInput)[] = [
    "title", "description", "environment", "hazard_category",
];

export function mountApp(root: HTMLElement, baseUrl: string): void {
    const doc = root.ownerDocument;
    const api = new StudioApi(baseUrl);

    const intake = doc.createElement("form");
    intake.className = "scenario-intake";
    for (const name of SCENARIO_FIELDS) {
        const label = doc.createElement("label");
        const caption = doc.createElement("span");
        caption.textContent = name;
        const input = doc.createElement("input");
        input.name = name;
        input.required = true;
        label.appendChild(caption);
        label.appendChild(input);
        intake.appendChild(label);
    }
    const submit = doc.createElement("button");
    submit.type = "submit";
    submit.textContent = "Create project";
    intake.appendChild(submit);
    root.appendChild(intake);

    const wizardRoot = doc.createElement("div");
    wizardRoot.className = "wizard-root";
    root.appendChild(wizardRoot);

    intake.addEventListener("submit", (event) => {
        event.preventDefault();
        const scenario = Object.fromEntries(
            SCENARIO_FIELDS.map((name) => {
                const input = intake.querySelector<HTMLInputElement>(`[name="${name}"]`);
                return [name, input?.value ?? ""];
            }),
        ) as unknown as ScenarioInput;
        void (async () => {
            const { project_id } = await api.createProject(scenario);
            intake.hidden = true;
            const wizard = new WizardController(api, project_id, wizardRoot);
            await wizard.refresh();
        })();
    });
}

declare global {
    interface Window {
        EGOSIM_API_BASE?: string;
    }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
    mountApp(
        document.getElementById("app") as HTMLElement,
        window.EGOSIM_API_BASE ?? "",
    );
}
