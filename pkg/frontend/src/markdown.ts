import type { SummaryGroup } from "./types.js";

const COLUMNS: Array<[string, (g: SummaryGroup) => string]> = [
  ["Env.", (g) => g.env],
  ["Algorithm", (g) => g.planner],
  ["Succ. Rate", (g) => `${(100 * g.success_rate).toFixed(1)}%`],
  ["1st Sol. p10", (g) => fmt(g.iter_p10)],
  ["1st Sol. p50", (g) => fmt(g.iter_p50)],
  ["1st Sol. p90", (g) => fmt(g.iter_p90)],
  ["Median Cost First", (g) => fmt(g.median_first_cost)],
  ["Median Cost Final", (g) => fmt(g.median_final_cost)],
  ["Avg ms First", (g) => fmt(g.mean_first_ms)],
  ["Avg ms Final", (g) => fmt(g.mean_final_ms)],
];

function fmt(v: number | string | null): string {
  if (v === null || v === undefined) return "-";
  if (typeof v === "string") return v; // ">3000" and "inf" pass through
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

/**
 * A summary table with one row per (chain, env, planner) group, mirroring
 * the convergence-characteristics layout: success rate, first-solution
 * iteration percentiles, cost medians, mean runtimes. Identical input
 * produces byte-identical markdown. An empty summary yields headers only.
 */
export function summaryTable(groups: SummaryGroup[]): string {
  const lines = [
    `| ${COLUMNS.map(([name]) => name).join(" | ")} |`,
    `|${COLUMNS.map(() => "---").join("|")}|`,
  ];
  const sorted = [...groups].sort((a, b) =>
    a.chain.localeCompare(b.chain) || a.env.localeCompare(b.env)
    || a.planner.localeCompare(b.planner));
  let chain = "";
  for (const g of sorted) {
    if (g.chain !== chain) {
      chain = g.chain;
      lines.push(`| **${chain}** |${COLUMNS.slice(1).map(() => " |").join("")}`);
    }
    lines.push(`| ${COLUMNS.map(([, render]) => render(g)).join(" | ")} |`);
  }
  return lines.join("\n") + "\n";
}
