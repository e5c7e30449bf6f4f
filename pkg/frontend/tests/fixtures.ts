/** Shared test fixtures: scenario body and a deterministic trace. */

import type { ScenarioInput } from "../src/api.js";

export const SCENARIO: ScenarioInput = {
    title: "Stovetop frying",
    description: "A user fries food in a small kitchen while multitasking.",
    environment: "Kitchen & Food Prep",
    hazard_category: "burn",
};

/** Mirror of the backend test trace: hazard visible from t=5 s, hand
 *  reaching it by t=8 s. */
export function makeTraceRecords(durationS = 12.0, fps = 2.0): unknown[] {
    const frames = [];
    const count = Math.floor(durationS * fps) + 1;
    for (let i = 0; i < count; i += 1) {
        const t = i / fps;
        const handX = 0.5 - Math.max(0, 8.0 - t) * 0.05;
        frames.push({
            frame_index: i,
            timestamp: t,
            hand_centroid: [Number(handX.toFixed(6)), 0.5],
            hazards: [{
                prompt_id: "hazard-pan",
                confidence: t >= 5.0 ? 0.9 : 0.2,
                area_ratio: Math.min(1.0, 0.05 + 0.02 * i),
                centroid: [0.5, 0.5],
            }],
        });
    }
    return frames;
}
