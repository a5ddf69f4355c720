/**
 * Figure builders over the simulator's CSV outputs.
 *
 * Each builder validates the columns it needs, skips unusable rows with a
 * warning, and returns deterministic SVG documents: moving-average QoE
 * curves (one file per scenario, one panel per user category, one line per
 * policy), latency traces (one line per server), and accuracy/latency bar
 * comparisons (grouped by user, one bar per policy).
 */

import { CsvTable, missingColumns, Row, toRecords } from "./csv";
import { BarPanel, colorFor, LinePanel, renderBarPanels, renderLinePanels } from "./svg";

export class SchemaError extends Error {
  constructor(public file: string, public missing: string[]) {
    super(`${file}: missing columns [${missing.join(", ")}]`);
  }
}

export interface FigureFile {
  name: string;
  svg: string;
}

export interface BuildResult {
  files: FigureFile[];
  warnings: string[];
}

const POLICY_ORDER = ["dir_rout", "pre_rout", "jaunt_greedy", "jaunt"];

function orderedPolicies(present: Set<string>): string[] {
  const known = POLICY_ORDER.filter((p) => present.has(p));
  const extras = [...present].filter((p) => !POLICY_ORDER.includes(p)).sort();
  return [...known, ...extras];
}

function groupBy(rows: Row[], key: string): Map<string, Row[]> {
  const out = new Map<string, Row[]>();
  for (const row of rows) {
    const value = row[key];
    const bucket = out.get(value);
    if (bucket) {
      bucket.push(row);
    } else {
      out.set(value, [row]);
    }
  }
  return out;
}

function numeric(row: Row, column: string): number {
  return Number(row[column]);
}

const MA_COLUMNS = ["scenario", "policy", "user_id", "user_category", "query_index", "ma_qoe"];

export function buildMovingAverage(table: CsvTable, file: string, title?: string): BuildResult {
  const missing = missingColumns(table, MA_COLUMNS);
  if (missing.length > 0) {
    throw new SchemaError(file, missing);
  }
  const warnings: string[] = [];
  const rows: Row[] = [];
  for (const row of toRecords(table)) {
    if (Number.isNaN(numeric(row, "query_index")) || Number.isNaN(numeric(row, "ma_qoe"))) {
      warnings.push(`${file}: skipped row with non-numeric values (${row.policy}, ${row.user_id})`);
      continue;
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    warnings.push(`${file}: no plottable rows, figure skipped`);
    return { files: [], warnings };
  }
  const files: FigureFile[] = [];
  for (const [scenario, scenarioRows] of [...groupBy(rows, "scenario")].sort()) {
    const policies = orderedPolicies(new Set(scenarioRows.map((r) => r.policy)));
    const panels: LinePanel[] = [];
    for (const [category, categoryRows] of [...groupBy(scenarioRows, "user_category")].sort()) {
      const series = policies.flatMap((policy) => {
        const mine = categoryRows.filter((r) => r.policy === policy);
        if (mine.length === 0) {
          return [];
        }
        // average the per-user series at each query position
        const byIndex = new Map<number, number[]>();
        for (const row of mine) {
          const x = numeric(row, "query_index");
          const bucket = byIndex.get(x);
          if (bucket) {
            bucket.push(numeric(row, "ma_qoe"));
          } else {
            byIndex.set(x, [numeric(row, "ma_qoe")]);
          }
        }
        const points = [...byIndex.entries()]
          .sort((a, b) => a[0] - b[0])
          .map(([x, values]) => ({ x, y: values.reduce((s, v) => s + v, 0) / values.length }));
        return [{ label: policy, color: colorFor(policy, policies), points }];
      });
      panels.push({
        title: `${title ?? "10-query moving-average QoE"} - ${scenario} / ${category}`,
        xLabel: "query index (window end)",
        yLabel: "QoE (10-query MA)",
        series,
      });
    }
    files.push({ name: `ma_${scenario}.svg`, svg: renderLinePanels(panels) });
  }
  return { files, warnings };
}

const TRACE_COLUMNS = ["time_index", "server_id", "latency_s"];

export function buildTraces(table: CsvTable, file: string, title?: string): BuildResult {
  const missing = missingColumns(table, TRACE_COLUMNS);
  if (missing.length > 0) {
    throw new SchemaError(file, missing);
  }
  const warnings: string[] = [];
  const rows: Row[] = [];
  for (const row of toRecords(table)) {
    if (Number.isNaN(numeric(row, "time_index")) || Number.isNaN(numeric(row, "latency_s"))) {
      warnings.push(`${file}: skipped row with non-numeric values (${row.server_id})`);
      continue;
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    warnings.push(`${file}: no plottable rows, figure skipped`);
    return { files: [], warnings };
  }
  const servers = [...groupBy(rows, "server_id")].sort();
  const labels = servers.map(([server]) => server);
  const series = servers.map(([server, serverRows]) => ({
    label: server,
    color: colorFor(server, labels),
    points: serverRows
      .map((r) => ({ x: numeric(r, "time_index"), y: numeric(r, "latency_s") }))
      .sort((a, b) => a.x - b.x),
  }));
  const panel: LinePanel = {
    title: title ?? "Per-server network latency",
    xLabel: "time step",
    yLabel: "latency (s)",
    series,
  };
  return { files: [{ name: "traces.svg", svg: renderLinePanels([panel]) }], warnings };
}

const BAR_COLUMNS = ["scenario", "policy", "user_id", "accuracy", "mean_latency_s"];

export function buildBars(table: CsvTable, file: string, title?: string): BuildResult {
  const missing = missingColumns(table, BAR_COLUMNS);
  if (missing.length > 0) {
    throw new SchemaError(file, missing);
  }
  const warnings: string[] = [];
  const rows: Row[] = [];
  for (const row of toRecords(table)) {
    if (Number.isNaN(numeric(row, "accuracy")) || Number.isNaN(numeric(row, "mean_latency_s"))) {
      warnings.push(`${file}: skipped row with non-numeric values (${row.policy}, ${row.user_id})`);
      continue;
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    warnings.push(`${file}: no plottable rows, figure skipped`);
    return { files: [], warnings };
  }
  const files: FigureFile[] = [];
  for (const [scenario, scenarioRows] of [...groupBy(rows, "scenario")].sort()) {
    const policies = orderedPolicies(new Set(scenarioRows.map((r) => r.policy)));
    const users = [...new Set(scenarioRows.map((r) => r.user_id))].sort();
    const cell = new Map<string, Row>();
    for (const row of scenarioRows) {
      cell.set(`${row.policy}|${row.user_id}`, row);
    }
    const panelFor = (metric: "accuracy" | "mean_latency_s", label: string): BarPanel => ({
      title: `${title ?? "Policy comparison"} - ${scenario} / ${label}`,
      yLabel: label,
      groups: users.map((user) => ({
        label: user,
        bars: policies.flatMap((policy) => {
          const row = cell.get(`${policy}|${user}`);
          if (row === undefined) {
            return [];
          }
          return [{ label: policy, color: colorFor(policy, policies), value: numeric(row, metric) }];
        }),
      })),
    });
    files.push({
      name: `bars_${scenario}.svg`,
      svg: renderBarPanels([
        panelFor("accuracy", "accuracy"),
        panelFor("mean_latency_s", "mean latency (s)"),
      ]),
    });
  }
  return { files, warnings };
}
