import type { MedianCurve, TraceRow } from "./types.js";

/**
 * Incumbent cost of one trial at every iteration 1..maxIterations.
 *
 * Trace rows may skip iterations (the many-goal planner emits rows on its
 * own schedule), so values are carried forward; before the first row the
 * incumbent is Infinity.
 */
export function incumbentByIteration(trace: TraceRow[], maxIterations: number): number[] {
  const out = new Array<number>(maxIterations).fill(Infinity);
  let k = 0;
  let current = Infinity;
  const sorted = [...trace].sort((a, b) => a.iteration - b.iteration);
  for (let it = 1; it <= maxIterations; it++) {
    while (k < sorted.length && sorted[k].iteration <= it) {
      current = Math.min(current, sorted[k].bestCost);
      k++;
    }
    out[it - 1] = current;
  }
  return out;
}

/** Lower median: the floor((n-1)/2)-th order statistic. */
export function lowerMedian(values: number[]): number {
  if (values.length === 0) return Infinity;
  const sorted = [...values].sort((a, b) => a - b);
  return sorted[Math.floor((sorted.length - 1) / 2)];
}

/**
 * Median best cost per iteration across trials.
 *
 * Trials without a solution contribute Infinity, so the curve shows a gap
 * (Infinity) whenever half or more of the trials are still unsolved; with
 * an even count the lower median is taken.
 */
export function medianCostCurve(traces: TraceRow[][], maxIterations: number): MedianCurve {
  if (traces.length === 0) {
    throw new Error("median curve needs at least one trace");
  }
  const incumbents = traces.map((t) => incumbentByIteration(t, maxIterations));
  const curve = new Array<number>(maxIterations);
  for (let it = 0; it < maxIterations; it++) {
    curve[it] = lowerMedian(incumbents.map((row) => row[it]));
  }
  return curve;
}
