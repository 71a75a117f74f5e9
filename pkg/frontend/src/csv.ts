// Reader for the fixed convergence-trace CSV schema produced by the
// experiment runner. Only the public file format is consumed here.

export const TRACE_COLUMNS = [
  'nu', 'U', 'lyap', 'cons_err', 'track_err', 'delta',
  'dnorm', 'E', 'T', 'dist_ref',
] as const;

export type TraceColumn = (typeof TRACE_COLUMNS)[number];

export interface Trace {
  columns: string[];
  rows: Map<string, (number | null)[]>;
  length: number;
}

export class MissingColumnError extends Error {
  readonly column: string;

  constructor(column: string, path: string) {
    super(`${path}: missing required column '${column}'`);
    this.column = column;
  }
}

export function parseTrace(text: string, path: string): Trace {
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== '');
  if (lines.length === 0) {
    throw new Error(`${path}: empty trace file`);
  }
  const header = lines[0].split(',');
  for (const required of TRACE_COLUMNS) {
    if (!header.includes(required)) {
      throw new MissingColumnError(required, path);
    }
  }
  if (lines.length === 1) {
    throw new Error(`${path}: trace has a header but no data rows`);
  }

  const rows = new Map<string, (number | null)[]>();
  for (const name of header) rows.set(name, []);
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',');
    if (parts.length !== header.length) {
      throw new Error(`${path}: row ${i} has ${parts.length} fields, ` +
        `expected ${header.length}`);
    }
    for (let j = 0; j < header.length; j++) {
      const raw = parts[j];
      const value = raw === '' ? null : Number(raw);
      if (value !== null && Number.isNaN(value)) {
        throw new Error(`${path}: row ${i}, column '${header[j]}': ` +
          `cannot parse '${raw}'`);
      }
      rows.get(header[j])!.push(value);
    }
  }
  return { columns: header, rows, length: lines.length - 1 };
}

export function column(trace: Trace, name: string, path: string): (number | null)[] {
  const values = trace.rows.get(name);
  if (values === undefined) {
    throw new MissingColumnError(name, path);
  }
  return values;
}
