// Plot specification: which traces to draw and how. Built either from a
// JSON spec file or from command-line arguments.

export interface TraceRef {
  path: string;
  label?: string;
}

export interface PlotSpec {
  traces: TraceRef[];
  yColumn: string;
  logScale: boolean;
  overlayOmega?: number;
  out: string;
}

export const DEFAULTS = {
  yColumn: 'dist_ref',
  logScale: true,
  out: 'figure.svg',
};

export function parseSpecFile(text: string, path: string): PlotSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`${path}: not valid JSON (${(err as Error).message})`);
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new Error(`${path}: spec must be a JSON object`);
  }
  const obj = raw as Record<string, unknown>;

  const traces = obj.traces;
  if (!Array.isArray(traces) || traces.length === 0) {
    throw new Error(`${path}: spec needs a non-empty 'traces' array`);
  }
  const refs: TraceRef[] = traces.map((t, i) => {
    if (typeof t === 'string') return { path: t };
    if (typeof t === 'object' && t !== null &&
        typeof (t as TraceRef).path === 'string') {
      return t as TraceRef;
    }
    throw new Error(`${path}: traces[${i}] must be a path or {path, label}`);
  });

  const spec: PlotSpec = {
    traces: refs,
    yColumn: typeof obj.yColumn === 'string' ? obj.yColumn : DEFAULTS.yColumn,
    logScale: typeof obj.logScale === 'boolean' ? obj.logScale : DEFAULTS.logScale,
    out: typeof obj.out === 'string' ? obj.out : DEFAULTS.out,
  };
  if (obj.overlayOmega !== undefined) {
    if (typeof obj.overlayOmega !== 'number' || obj.overlayOmega <= 0) {
      throw new Error(`${path}: overlayOmega must be a positive number`);
    }
    spec.overlayOmega = obj.overlayOmega;
  }
  return spec;
}

// Pull a named value out of the runner's key = value summary file.
export function omegaFromSummary(text: string, path: string): number {
  for (const line of text.split(/\r?\n/)) {
    const match = line.match(/^omega\s*=\s*(\S+)\s*$/);
    if (match) {
      const value = Number(match[1]);
      if (!Number.isFinite(value) || value <= 0) {
        throw new Error(`${path}: omega is '${match[1]}', not a positive number`);
      }
      return value;
    }
  }
  throw new Error(`${path}: no omega entry found in summary`);
}
