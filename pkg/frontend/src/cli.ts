#!/usr/bin/env node
// plot --spec FILE
// plot TRACE.csv [TRACE2.csv ...] [--out FIG.svg] [--column NAME]
//      [--label NAME ...] [--linear] [--omega VALUE | --summary FILE]

import { readFileSync, writeFileSync } from 'fs';
import * as path from 'path';

import { parseTrace, column } from './csv';
import { renderFigure, Series } from './figure';
import { PlotSpec, DEFAULTS, parseSpecFile, omegaFromSummary } from './spec';

function usage(): string {
  return [
    'usage: plot --spec FILE',
    '       plot TRACE.csv [TRACE2.csv ...] [options]',
    '',
    'options:',
    '  --out FILE      output SVG path (default figure.svg)',
    '  --column NAME   trace column for the y axis (default dist_ref)',
    '  --label NAME    legend label, repeatable, one per trace',
    '  --linear        plain y axis instead of log10',
    '  --omega VALUE   dashed theory-slope overlay from a contraction gain',
    '  --summary FILE  read omega from a runner summary file',
  ].join('\n');
}

function parseArgs(argv: string[]): PlotSpec {
  if (argv.length === 0) {
    throw new Error(usage());
  }
  const traces: string[] = [];
  const labels: string[] = [];
  let out = DEFAULTS.out;
  let yColumn = DEFAULTS.yColumn;
  let logScale = DEFAULTS.logScale;
  let overlayOmega: number | undefined;
  let specPath: string | undefined;
  let summaryPath: string | undefined;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`${arg} needs a value`);
      return argv[i];
    };
    switch (arg) {
      case '--spec': specPath = next(); break;
      case '--out': out = next(); break;
      case '--column': yColumn = next(); break;
      case '--label': labels.push(next()); break;
      case '--linear': logScale = false; break;
      case '--omega': {
        const v = Number(next());
        if (!Number.isFinite(v) || v <= 0) {
          throw new Error('--omega needs a positive number');
        }
        overlayOmega = v;
        break;
      }
      case '--summary': summaryPath = next(); break;
      case '--help': case '-h':
        console.log(usage());
        process.exit(0);
        break;
      default:
        if (arg.startsWith('--')) throw new Error(`unknown option ${arg}`);
        traces.push(arg);
    }
  }

  if (specPath !== undefined) {
    if (traces.length > 0) {
      throw new Error('--spec and positional trace paths are exclusive');
    }
    const spec = parseSpecFile(readFileSync(specPath, 'utf8'), specPath);
    // paths inside a spec file are relative to the spec file itself
    const base = path.dirname(specPath);
    spec.traces = spec.traces.map((t) => ({
      ...t, path: path.resolve(base, t.path),
    }));
    spec.out = path.resolve(base, spec.out);
    return spec;
  }

  if (traces.length === 0) {
    throw new Error('no trace files given\n' + usage());
  }
  if (labels.length > traces.length) {
    throw new Error('more --label values than traces');
  }
  if (summaryPath !== undefined) {
    if (overlayOmega !== undefined) {
      throw new Error('--omega and --summary are exclusive');
    }
    overlayOmega = omegaFromSummary(readFileSync(summaryPath, 'utf8'),
      summaryPath);
  }
  return {
    traces: traces.map((p, k) => ({ path: p, label: labels[k] })),
    yColumn, logScale, overlayOmega, out,
  };
}

export function run(argv: string[]): void {
  const spec = parseArgs(argv);
  const series: Series[] = spec.traces.map((ref) => {
    const trace = parseTrace(readFileSync(ref.path, 'utf8'), ref.path);
    const nus = column(trace, 'nu', ref.path);
    const values = column(trace, spec.yColumn, ref.path);
    const nu: number[] = [];
    const value: number[] = [];
    for (let i = 0; i < trace.length; i++) {
      if (nus[i] === null || values[i] === null) continue;
      nu.push(nus[i] as number);
      value.push(values[i] as number);
    }
    return { label: ref.label ?? path.basename(ref.path), nu, value };
  });

  const svg = renderFigure(series, {
    yLabel: spec.yColumn,
    logScale: spec.logScale,
    overlayOmega: spec.overlayOmega,
  });
  writeFileSync(spec.out, svg);
  console.log(`wrote ${spec.out}`);
}

if (require.main === module) {
  try {
    run(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exit(1);
  }
}
