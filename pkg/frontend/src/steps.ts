/** Turns a prediction into the ordered list of staged verdicts to display.
 *
 * The cascade stops early, so later phases may be null; absent phases are
 * simply not part of the list — the card renders exactly these steps.
 */

import type { PhaseVerdict, PredictResponse } from "./types.js";

export interface Step {
  phase: 1 | 2 | 3;
  title: string;
  verdict: PhaseVerdict;
}

const TITLES: Record<1 | 2 | 3, string> = {
  1: "Step 1 · Healthy vs Unhealthy",
  2: "Step 2 · Pneumonia vs COVID",
  3: "Step 3 · COVID severity",
};

export function stepsFor(response: PredictResponse): Step[] {
  const steps: Step[] = [{ phase: 1, title: TITLES[1], verdict: response.phase1 }];
  if (response.phase2 !== null) {
    steps.push({ phase: 2, title: TITLES[2], verdict: response.phase2 });
  }
  if (response.phase3 !== null) {
    steps.push({ phase: 3, title: TITLES[3], verdict: response.phase3 });
  }
  return steps;
}
