import * as fs from "fs";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { parseCsv } from "../src/csv";
import { buildBars, buildMovingAverage, buildTraces, SchemaError } from "../src/figures";

const FIXTURES = path.join(__dirname, "fixtures");

function fixture(name: string) {
  return parseCsv(fs.readFileSync(path.join(FIXTURES, name), "utf8"));
}

function polylines(svg: string): string[] {
  return [...svg.matchAll(/<polyline[^>]*points="([^"]*)"/g)].map((m) => m[1]);
}

function legendLabels(svg: string): string[] {
  return [...svg.matchAll(/<text x="674\.00"[^>]*>([^<]*)<\/text>/g)].map((m) => m[1]);
}

describe("buildMovingAverage", () => {
  it("emits one file per scenario with one line per policy", () => {
    const result = buildMovingAverage(fixture("moving_average.csv"), "ma");
    expect(result.files.map((f) => f.name)).toEqual(["ma_random.svg", "ma_smooth.svg"]);
    for (const file of result.files) {
      expect(polylines(file.svg)).toHaveLength(4);
    }
    expect(result.warnings).toEqual([]);
  });

  it("is deterministic", () => {
    const a = buildMovingAverage(fixture("moving_average.csv"), "ma");
    const b = buildMovingAverage(fixture("moving_average.csv"), "ma");
    expect(a.files).toEqual(b.files);
  });

  it("averages multiple users at each query position", () => {
    const table = parseCsv(
      "scenario,policy,user_id,user_category,query_index,ma_qoe\n" +
        "s,jaunt,u1,balanced,10,1.0\n" +
        "s,jaunt,u2,balanced,10,3.0\n" +
        "s,jaunt,u1,balanced,11,2.0\n" +
        "s,jaunt,u2,balanced,11,2.0\n",
    );
    const { files } = buildMovingAverage(table, "ma");
    const [points] = polylines(files[0].svg);
    const ys = points.split(" ").map((p) => Number(p.split(",")[1]));
    // both positions average to 2.0, so the line is flat
    expect(ys[0]).toBe(ys[1]);
  });

  it("warns and produces nothing on headers-only input", () => {
    const result = buildMovingAverage(fixture("moving_average_empty.csv"), "ma");
    expect(result.files).toEqual([]);
    expect(result.warnings.some((w) => w.includes("no plottable rows"))).toBe(true);
  });

  it("rejects schema mismatches, naming the missing columns", () => {
    expect(() => buildMovingAverage(fixture("aggregates.csv"), "ma")).toThrowError(SchemaError);
    try {
      buildMovingAverage(fixture("aggregates.csv"), "ma");
    } catch (err) {
      expect((err as SchemaError).missing).toEqual(["query_index", "ma_qoe"]);
    }
  });
});

describe("buildTraces", () => {
  it("draws one line and one legend entry per server", () => {
    const { files } = buildTraces(fixture("traces.csv"), "traces");
    expect(files).toHaveLength(1);
    expect(files[0].name).toBe("traces.svg");
    expect(polylines(files[0].svg)).toHaveLength(5);
    expect(legendLabels(files[0].svg)).toEqual([
      "srv_calm",
      "srv_flat_high",
      "srv_ramp",
      "srv_spiky",
      "srv_wave",
    ]);
  });

  it("renders a constant-latency server as a flat line", () => {
    const { files } = buildTraces(fixture("traces.csv"), "traces");
    // series are sorted by server id; srv_flat_high is second
    const flat = polylines(files[0].svg)[1];
    const ys = new Set(flat.split(" ").map((p) => p.split(",")[1]));
    expect(ys.size).toBe(1);
  });

  it("rejects wrong schemas", () => {
    expect(() => buildTraces(fixture("aggregates.csv"), "traces")).toThrowError(
      /missing columns \[time_index/,
    );
  });
});

describe("buildBars", () => {
  function barRects(svg: string): Array<{ y: number; height: number }> {
    // bar geometry is always two-decimal formatted; the background and
    // legend swatches use bare integers
    return [...svg.matchAll(/<rect x="[^"]*" y="([^"]*)" width="([^"]*)" height="([^"]*)" fill="[^"]*"\/>/g)]
      .filter((m) => m[2].includes("."))
      .map((m) => ({ y: Number(m[1]), height: Number(m[3]) }));
  }

  it("bar heights are proportional to the fixture values", () => {
    const { files, warnings } = buildBars(fixture("aggregates.csv"), "bars");
    expect(files).toHaveLength(1);
    expect(files[0].name).toBe("bars_random.svg");
    expect(warnings.some((w) => w.includes("user_003"))).toBe(true);
    const rects = barRects(files[0].svg);
    // two panels x two users x two policies
    expect(rects).toHaveLength(8);
    const accuracy = rects.slice(0, 4).map((r) => r.height);
    // fixture accuracies (policy-major order within user groups):
    // user_001 dir=0.8 jaunt=0.9, user_002 dir=0.4 jaunt=0.6
    const values = [0.8, 0.9, 0.4, 0.6];
    const unit = accuracy[0] / values[0];
    for (let i = 1; i < values.length; i += 1) {
      expect(accuracy[i] / values[i]).toBeCloseTo(unit, 1);
    }
  });

  it("single-policy input yields one bar per user group", () => {
    const { files } = buildBars(fixture("aggregates_single_policy.csv"), "bars");
    const rects = barRects(files[0].svg);
    expect(rects).toHaveLength(4); // 2 panels x 2 users x 1 policy
  });

  it("rejects schemas missing metric columns", () => {
    expect(() => buildBars(fixture("aggregates_bad_schema.csv"), "bars")).toThrowError(
      /missing columns \[accuracy, mean_latency_s\]/,
    );
  });
});
