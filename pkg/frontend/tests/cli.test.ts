import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterEach, describe, expect, it } from "vitest";

import { main, parseArgs, runReport } from "../src/cli";

const FIXTURES = path.join(__dirname, "fixtures");
const scratch: string[] = [];

function tmpDir(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "qoe-report-"));
  scratch.push(dir);
  return dir;
}

afterEach(() => {
  while (scratch.length > 0) {
    fs.rmSync(scratch.pop() as string, { recursive: true, force: true });
  }
});

function quietly(spec: Parameters<typeof runReport>[0]): { code: number; log: string[] } {
  const log: string[] = [];
  const code = runReport(spec, (line) => log.push(line));
  return { code, log };
}

describe("parseArgs", () => {
  it("accepts the documented shape with an optional leading subcommand", () => {
    const spec = parseArgs(["report", "--in", "a", "--out", "b", "--figs", "ma,bars", "--fmt", "svg"]);
    expect(spec.figs).toEqual(["ma", "bars"]);
    expect(spec.fmt).toBe("svg");
  });

  it("rejects unknown figures, formats, and flags", () => {
    expect(() => parseArgs(["--in", "a", "--out", "b", "--figs", "pie"])).toThrow(/unknown figure/);
    expect(() => parseArgs(["--in", "a", "--out", "b", "--fmt", "gif"])).toThrow(/svg or png/);
    expect(() => parseArgs(["--in", "a", "--out", "b", "--wat", "x"])).toThrow(/unknown flag/);
    expect(() => parseArgs(["--in", "a"])).toThrow(/--out/);
  });
});

describe("runReport", () => {
  it("renders all figures from the fixture directory", () => {
    const out = tmpDir();
    const { code } = quietly({ inDir: FIXTURES, outDir: out, figs: ["ma", "traces", "bars"], fmt: "svg", titles: {} });
    expect(code).toBe(0);
    expect(fs.readdirSync(out).sort()).toEqual([
      "bars_random.svg",
      "ma_random.svg",
      "ma_smooth.svg",
      "traces.svg",
    ]);
  });

  it("never mutates its inputs", () => {
    const before = fs.readFileSync(path.join(FIXTURES, "aggregates.csv"), "utf8");
    quietly({ inDir: FIXTURES, outDir: tmpDir(), figs: ["bars"], fmt: "svg", titles: {} });
    expect(fs.readFileSync(path.join(FIXTURES, "aggregates.csv"), "utf8")).toBe(before);
  });

  it("fails with the path when an input file is missing", () => {
    const empty = tmpDir();
    const { code, log } = quietly({ inDir: empty, outDir: tmpDir(), figs: ["traces"], fmt: "svg", titles: {} });
    expect(code).toBe(1);
    expect(log.join("\n")).toContain(path.join(empty, "traces.csv"));
  });

  it("headers-only input warns and exits nonzero", () => {
    const dir = tmpDir();
    fs.copyFileSync(
      path.join(FIXTURES, "moving_average_empty.csv"),
      path.join(dir, "moving_average.csv"),
    );
    const { code, log } = quietly({ inDir: dir, outDir: tmpDir(), figs: ["ma"], fmt: "svg", titles: {} });
    expect(code).toBe(3);
    expect(log.join("\n")).toContain("no plottable rows");
  });

  it("schema mismatch exits 1 and lists the missing columns", () => {
    const dir = tmpDir();
    fs.copyFileSync(
      path.join(FIXTURES, "aggregates_bad_schema.csv"),
      path.join(dir, "aggregates.csv"),
    );
    const { code, log } = quietly({ inDir: dir, outDir: tmpDir(), figs: ["bars"], fmt: "svg", titles: {} });
    expect(code).toBe(1);
    expect(log.join("\n")).toMatch(/missing columns \[accuracy, mean_latency_s\]/);
  });

  it("png output is refused with a clear message", () => {
    const { code, log } = quietly({ inDir: FIXTURES, outDir: tmpDir(), figs: ["ma"], fmt: "png", titles: {} });
    expect(code).toBe(1);
    expect(log.join("\n")).toContain("png output is not supported");
  });
});

describe("main", () => {
  it("maps usage errors to exit 1", () => {
    expect(main(["--in", "only"])).toBe(1);
  });
});
