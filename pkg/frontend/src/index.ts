export { parseCsv, toRecords, missingColumns } from "./csv";
export type { CsvTable, Row } from "./csv";
export { buildMovingAverage, buildTraces, buildBars, SchemaError } from "./figures";
export type { BuildResult, FigureFile } from "./figures";
export { renderLinePanels, renderBarPanels, colorFor, PALETTE } from "./svg";
export { parseArgs, runReport, main } from "./cli";
export type { ReportSpec } from "./cli";
