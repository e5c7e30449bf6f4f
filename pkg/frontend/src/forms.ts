/**
 * Schema-driven artifact forms.
 *
 * Forms are built from the machine-readable schema document served by the
 * backend (GET /schemas), so the UI cannot drift from the validator: every
 * field name, enum value, and read-only flag comes from the service.
 */

import type { ArtifactDocument, FieldSchema, StepSchema } from "./api.js";

export interface FormHandle {
    /** Read the edited values back into a new artifact document. */
    collect(): ArtifactDocument;
    root: HTMLElement;
}

type Item = Record<string, unknown>;

function fieldInput(doc: Document, field: FieldSchema, value: unknown): HTMLElement {
    if (field.type === "enum") {
        const select = doc.createElement("select");
        select.name = field.name;
        select.disabled = Boolean(field.readonly);
        for (const option of field.values ?? []) {
            const element = doc.createElement("option");
            element.value = option;
            element.textContent = option;
            element.selected = option === value;
            select.appendChild(element);
        }
        return select;
    }
    if (field.type === "boolean") {
        const input = doc.createElement("input");
        input.type = "checkbox";
        input.name = field.name;
        input.checked = Boolean(value);
        input.disabled = Boolean(field.readonly);
        return input;
    }
    if (field.type === "number") {
        const input = doc.createElement("input");
        input.type = "number";
        input.step = "any";
        input.name = field.name;
        input.value = value === null || value === undefined ? "" : String(value);
        input.disabled = Boolean(field.readonly);
        return input;
    }
    const input = doc.createElement("input");
    input.type = "text";
    input.name = field.name;
    if (field.type === "string_list" && Array.isArray(value)) {
        input.value = value.join(", ");
    } else {
        input.value = value === null || value === undefined ? "" : String(value);
    }
    input.disabled = Boolean(field.readonly);
    return input;
}

function segmentEditor(doc: Document, segments: Item[]): HTMLElement {
    const wrapper = doc.createElement("div");
    wrapper.className = "segments";
    segments.forEach((segment, index) => {
        const block = doc.createElement("fieldset");
        block.className = "segment";
        block.dataset.kind = String(segment.kind);
        const legend = doc.createElement("legend");
        legend.textContent = `${segment.kind} [${segment.start_offset_s}s +${segment.duration_s}s]`;
        block.appendChild(legend);
        const prompt = doc.createElement("textarea");
        prompt.name = `segments.${index}.prompt`;
        prompt.value = String(segment.prompt ?? "");
        block.appendChild(prompt);
        wrapper.appendChild(block);
    });
    return wrapper;
}

function readField(field: FieldSchema, item: Item, scope: HTMLElement): unknown {
    const original = item[field.name];
    if (field.readonly) return original;
    if (field.type === "segment_list") {
        const segments = (original as Item[]).map((segment, index) => {
            const textarea = scope.querySelector<HTMLTextAreaElement>(
                `[name="segments.${index}.prompt"]`,
            );
            return { ...segment, prompt: textarea ? textarea.value : segment.prompt };
        });
        return segments;
    }
    const input = scope.querySelector<HTMLInputElement | HTMLSelectElement>(
        `[name="${field.name}"]`,
    );
    if (!input) return original;
    if (field.type === "boolean") return (input as HTMLInputElement).checked;
    if (field.type === "number") {
        const text = input.value.trim();
        return text === "" ? null : Number(text);
    }
    if (field.type === "string_list") {
        return input.value.split(",").map((part) => part.trim()).filter((part) => part.length > 0);
    }
    const text = input.value;
    if (field.nullable && text.trim() === "") return null;
    return text;
}

/**
 * Render one artifact document (a list of items under `schema.artifact`)
 * as editable per-item fieldsets; extra top-level keys pass through collect()
 * untouched.
 */
export function buildArtifactForm(
    container: HTMLElement,
    schema: StepSchema,
    document_: ArtifactDocument,
): FormHandle {
    const doc = container.ownerDocument;
    container.innerHTML = "";
    const form = doc.createElement("form");
    form.className = "artifact-form";
    form.dataset.artifact = schema.artifact;
    const items = (document_[schema.artifact] as Item[] | undefined) ?? [];

    items.forEach((item, index) => {
        const itemBlock = doc.createElement("fieldset");
        itemBlock.className = "artifact-item";
        itemBlock.dataset.index = String(index);
        const legend = doc.createElement("legend");
        legend.textContent = `${schema.artifact} #${index + 1}`;
        itemBlock.appendChild(legend);
        for (const field of schema.item_fields) {
            const row = doc.createElement("label");
            row.className = `field field-${field.name}`;
            const caption = doc.createElement("span");
            caption.textContent = field.name;
            row.appendChild(caption);
            if (field.type === "segment_list") {
                row.appendChild(segmentEditor(doc, (item[field.name] as Item[]) ?? []));
            } else {
                row.appendChild(fieldInput(doc, field, item[field.name]));
            }
            itemBlock.appendChild(row);
        }
        form.appendChild(itemBlock);
    });
    container.appendChild(form);

    return {
        root: form,
        collect(): ArtifactDocument {
            const edited = items.map((item, index) => {
                const scope = form.querySelector<HTMLElement>(
                    `fieldset.artifact-item[data-index="${index}"]`,
                );
                const next: Item = { ...item };
                if (!scope) return next;
                for (const field of schema.item_fields) {
                    next[field.name] = readField(field, item, scope);
                }
                return next;
            });
            return { ...document_, [schema.artifact]: edited };
        },
    };
}
