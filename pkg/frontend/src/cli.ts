#!/usr/bin/env node
/**
 * report --in <dir> --out <dir> --figs ma,traces,bars --fmt svg
 *
 * Reads the simulator's CSV outputs and writes static SVG figures.
 * Exit codes: 0 success, 1 validation error (missing file/column, bad
 * flag), 2 runtime error, 3 completed with empty-figure warnings.
 */

import * as fs from "fs";
import * as path from "path";

import { parseCsv } from "./csv";
import { BuildResult, buildBars, buildMovingAverage, buildTraces, SchemaError } from "./figures";

const FIGS: Record<string, { file: string; build: (text: string, file: string, title?: string) => BuildResult }> = {
  ma: {
    file: "moving_average.csv",
    build: (text, file, title) => buildMovingAverage(parseCsv(text), file, title),
  },
  traces: {
    file: "traces.csv",
    build: (text, file, title) => buildTraces(parseCsv(text), file, title),
  },
  bars: {
    file: "aggregates.csv",
    build: (text, file, title) => buildBars(parseCsv(text), file, title),
  },
};

export interface ReportSpec {
  inDir: string;
  outDir: string;
  figs: string[];
  fmt: "svg" | "png";
  titles: Record<string, string>;
}

export function parseArgs(argv: string[]): ReportSpec {
  const args = argv[0] === "report" ? argv.slice(1) : [...argv];
  const spec: ReportSpec = { inDir: "", outDir: "", figs: Object.keys(FIGS), fmt: "svg", titles: {} };
  for (let i = 0; i < args.length; i += 2) {
    const flag = args[i];
    const value = args[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} expects a value`);
    }
    if (flag === "--in") {
      spec.inDir = value;
    } else if (flag === "--out") {
      spec.outDir = value;
    } else if (flag === "--figs") {
      spec.figs = value.split(",").map((f) => f.trim()).filter(Boolean);
    } else if (flag === "--fmt") {
      if (value !== "svg" && value !== "png") {
        throw new Error(`--fmt must be svg or png, got ${value}`);
      }
      spec.fmt = value;
    } else if (flag.startsWith("--title-")) {
      spec.titles[flag.slice("--title-".length)] = value;
    } else {
      throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!spec.inDir || !spec.outDir) {
    throw new Error("--in and --out are required");
  }
  const unknown = spec.figs.filter((f) => !(f in FIGS));
  if (unknown.length > 0) {
    throw new Error(`unknown figure selection: ${unknown.join(", ")} (choose from ${Object.keys(FIGS).join(", ")})`);
  }
  return spec;
}

export function runReport(spec: ReportSpec, log: (line: string) => void = console.error): number {
  if (spec.fmt === "png") {
    log("png output is not supported by this build; render svg and rasterize externally");
    return 1;
  }
  const emptyFigs: string[] = [];
  const outputs: Array<{ name: string; svg: string }> = [];
  for (const fig of spec.figs) {
    const { file, build } = FIGS[fig];
    const inputPath = path.join(spec.inDir, file);
    if (!fs.existsSync(inputPath)) {
      log(`${inputPath}: file not found`);
      return 1;
    }
    const text = fs.readFileSync(inputPath, "utf8");
    let result: BuildResult;
    try {
      result = build(text, inputPath, spec.titles[fig]);
    } catch (err) {
      if (err instanceof SchemaError) {
        log(err.message);
        return 1;
      }
      throw err;
    }
    for (const warning of result.warnings) {
      log(`warning: ${warning}`);
    }
    if (result.files.length === 0) {
      emptyFigs.push(fig);
    }
    outputs.push(...result.files);
  }
  fs.mkdirSync(spec.outDir, { recursive: true });
  for (const output of outputs) {
    fs.writeFileSync(path.join(spec.outDir, output.name), output.svg, "utf8");
    log(`wrote ${path.join(spec.outDir, output.name)}`);
  }
  if (emptyFigs.length > 0) {
    log(`empty figures (no plottable rows): ${emptyFigs.join(", ")}`);
    return 3;
  }
  return 0;
}

export function main(argv: string[]): number {
  let spec: ReportSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }
  try {
    return runReport(spec);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
