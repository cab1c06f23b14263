/** One parsed trace row: the incumbent best cost when the row was emitted. */
export interface TraceRow {
  iteration: number;
  wallMs: number;
  /** Infinity until the first solution. */
  bestCost: number;
}

/** All trials of one planner on one (chain, environment) group. */
export interface TraceBundle {
  chain: string;
  env: string;
  planner: string;
  traces: TraceRow[][];
}

/** One row of summary.json's "groups" array, as written by the bench CLI. */
export interface SummaryGroup {
  chain: string;
  env: string;
  planner: string;
  n_trials: number;
  n_success: number;
  success_rate: number;
  iter_p10: number | string;
  iter_p50: number | string;
  iter_p90: number | string;
  median_first_cost: number | string;
  median_final_cost: number | string;
  mean_first_ms: number | null;
  mean_final_ms: number | null;
  mean_total_ms: number;
}

/** A median curve indexed by iteration (1-based); Infinity marks a gap. */
export type MedianCurve = number[];
