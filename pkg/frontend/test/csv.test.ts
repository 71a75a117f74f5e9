import { describe, expect, it } from 'vitest';

import { MissingColumnError, column, parseTrace } from '../src/csv';

const HEADER = 'nu,U,lyap,cons_err,track_err,delta,dnorm,E,T,dist_ref';

function row(nu: number, dist: number | ''): string {
  return `${nu},1,2,0.1,0.2,0.05,0.3,0.4,0.5,${dist}`;
}

describe('parseTrace', () => {
  it('parses the fixed schema', () => {
    const trace = parseTrace([HEADER, row(0, 1.5), row(1, 0.75)].join('\n'),
      't.csv');
    expect(trace.length).toBe(2);
    expect(column(trace, 'nu', 't.csv')).toEqual([0, 1]);
    expect(column(trace, 'dist_ref', 't.csv')).toEqual([1.5, 0.75]);
  });

  it('keeps empty fields as nulls', () => {
    const trace = parseTrace([HEADER, row(0, '')].join('\n'), 't.csv');
    expect(column(trace, 'dist_ref', 't.csv')).toEqual([null]);
  });

  it('names the missing column', () => {
    const truncated = HEADER.replace(',dist_ref', '');
    const body = [truncated, '0,1,2,0.1,0.2,0.05,0.3,0.4,0.5'].join('\n');
    try {
      parseTrace(body, 'cut.csv');
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(MissingColumnError);
      expect((err as MissingColumnError).column).toBe('dist_ref');
      expect((err as Error).message).toContain('dist_ref');
    }
  });

  it('rejects empty input', () => {
    expect(() => parseTrace('', 'e.csv')).toThrow(/empty trace file/);
  });

  it('rejects a header-only file', () => {
    expect(() => parseTrace(HEADER + '\n', 'h.csv')).toThrow(/no data rows/);
  });

  it('rejects unparsable numbers', () => {
    const body = [HEADER, row(0, 1.0).replace('0.3', 'abc')].join('\n');
    expect(() => parseTrace(body, 'b.csv')).toThrow(/cannot parse 'abc'/);
  });

  it('rejects ragged rows', () => {
    const body = [HEADER, '0,1,2'].join('\n');
    expect(() => parseTrace(body, 'r.csv')).toThrow(/3 fields/);
  });
});

describe('column', () => {
  it('raises a named error for unknown columns', () => {
    const trace = parseTrace([HEADER, row(0, 1)].join('\n'), 't.csv');
    expect(() => column(trace, 'nope', 't.csv')).toThrow(/nope/);
  });
});
