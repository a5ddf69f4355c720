/**
 * Minimal RFC-4180 CSV reading: quoted fields, embedded commas/newlines,
 * CRLF or LF line endings. Inputs are never mutated; parsing is pure.
 */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let inQuotes = false;
  let i = 0;
  const push = () => {
    record.push(field);
    field = "";
  };
  const endRecord = () => {
    push();
    records.push(record);
    record = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      push();
      i += 1;
    } else if (ch === "\r" && text[i + 1] === "\n") {
      endRecord();
      i += 2;
    } else if (ch === "\n") {
      endRecord();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field.length > 0 || record.length > 0) {
    endRecord();
  }
  if (records.length === 0) {
    return { header: [], rows: [] };
  }
  const [header, ...rows] = records;
  return { header, rows: rows.filter((r) => !(r.length === 1 && r[0] === "")) };
}

export type Row = Record<string, string>;

export function toRecords(table: CsvTable): Row[] {
  return table.rows.map((cells) => {
    const row: Row = {};
    table.header.forEach((name, idx) => {
      row[name] = cells[idx] ?? "";
    });
    return row;
  });
}

/** Column names required but absent from the header; empty when valid. */
export function missingColumns(table: CsvTable, required: string[]): string[] {
  return required.filter((name) => !table.header.includes(name));
}
