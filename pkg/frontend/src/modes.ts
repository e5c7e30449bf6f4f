/**
 * Mode selection view: the three seeds from mode binding shown side by
 * side, with the mode-dependent fields (utterance presence/addressing and
 * user awareness) visually highlighted so the semantics are inspectable
 * before anything is rendered.
 */

import type { ArtifactDocument } from "./api.js";

const MODE_FIELDS = ["user_utterance", "utterance_addressed_to_agent", "user_aware"];

type Seed = Record<string, unknown>;

export function renderModeComparison(container: HTMLElement, document_: ArtifactDocument): void {
    const doc = container.ownerDocument;
    container.innerHTML = "";
    const row = doc.createElement("div");
    row.className = "mode-comparison";
    const seeds = (document_.seeds as Seed[] | undefined) ?? [];
    for (const seed of seeds) {
        const card = doc.createElement("section");
        card.className = "mode-card";
        card.dataset.mode = String(seed.mode);
        card.dataset.seedId = String(seed.id);

        const title = doc.createElement("h3");
        title.textContent = String(seed.mode);
        card.appendChild(title);

        const list = doc.createElement("dl");
        for (const [key, value] of Object.entries(seed)) {
            const term = doc.createElement("dt");
            term.textContent = key;
            const detail = doc.createElement("dd");
            detail.dataset.field = key;
            detail.textContent = value === null ? "(none)" : Array.isArray(value)
                ? value.join(", ")
                : String(value);
            if (MODE_FIELDS.includes(key)) {
                term.className = "mode-highlight";
                detail.className = "mode-highlight";
            }
            list.appendChild(term);
            list.appendChild(detail);
        }
        card.appendChild(list);
        row.appendChild(card);
    }
    container.appendChild(row);
}
