import { describe, expect, it } from "vitest";

import { summaryTable } from "../src/markdown.js";
import type { SummaryGroup } from "../src/types.js";

function group(overrides: Partial<SummaryGroup>): SummaryGroup {
  return {
    chain: "generic6", env: "random", planner: "many",
    n_trials: 100, n_success: 95, success_rate: 0.95,
    iter_p10: 120, iter_p50: 250.5, iter_p90: 600,
    median_first_cost: 14.2, median_final_cost: 11.05,
    mean_first_ms: 40.1, mean_final_ms: 480.7, mean_total_ms: 900.2,
    ...overrides,
  };
}

describe("summaryTable", () => {
  it("renders headers only for an empty summary", () => {
    const md = summaryTable([]);
    const lines = md.trim().split("\n");
    expect(lines).toHaveLength(2);
    expect(lines[0]).toContain("Succ. Rate");
    expect(lines[0]).toContain("Median Cost Final");
  });

  it("passes failure markers straight through", () => {
    const md = summaryTable([group({
      planner: "rrtstar", success_rate: 0.0,
      iter_p10: ">3000", iter_p50: ">3000", iter_p90: ">3000",
      median_first_cost: "inf", median_final_cost: "inf",
      mean_first_ms: null, mean_final_ms: null,
    })]);
    expect(md).toContain(">3000");
    expect(md).toContain("inf");
    expect(md).toContain("0.0%");
  });

  it("is byte-identical across repeated renders", () => {
    const groups = [
      group({ env: "wall", planner: "connect" }),
      group({ env: "random" }),
      group({ env: "wall", planner: "many", median_final_cost: 5.1 }),
    ];
    const a = summaryTable(groups);
    const b = summaryTable([...groups]);
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);
  });

  it("orders rows by chain, environment, planner", () => {
    const md = summaryTable([
      group({ env: "wall" }),
      group({ env: "passage" }),
      group({ env: "random" }),
    ]);
    const envOrder = md.split("\n")
      .filter((l) => l.includes("| many |"))
      .map((l) => l.split("|")[1].trim());
    expect(envOrder).toEqual(["passage", "random", "wall"]);
  });
});
