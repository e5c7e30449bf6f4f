/** Violation rendering: every violation the service returns is shown. */

import type { Violation } from "./api.js";

export function renderViolations(container: HTMLElement, violations: Violation[]): void {
    container.innerHTML = "";
    if (violations.length === 0) {
        container.classList.remove("has-violations");
        return;
    }
    container.classList.add("has-violations");
    const doc = container.ownerDocument;
    const heading = doc.createElement("p");
    heading.className = "violations-heading";
    heading.textContent = `${violations.length} validation problem(s):`;
    container.appendChild(heading);
    const list = doc.createElement("ul");
    list.className = "violations-list";
    for (const violation of violations) {
        const item = doc.createElement("li");
        item.className = "violation";
        item.dataset.code = violation.code;
        if (violation.field) item.dataset.field = violation.field;
        item.textContent = violation.field
            ? `[${violation.code}] ${violation.field}: ${violation.message}`
            : `[${violation.code}] ${violation.message}`;
        list.appendChild(item);
    }
    container.appendChild(list);
}
